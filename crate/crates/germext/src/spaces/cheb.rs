//! Functions on `[0, 1]` represented by Chebyshev coefficients, normed as
//! `C^n`: the max over derivative orders `k <= n` of the sampled sup of
//! `|x^(k)|`.
//!
//! The sup in the `C^n` norm is taken over a dense sample (8x the coefficient
//! count), not all of `[0, 1]`; sampling density is a tunable of the model,
//! not a certified bound.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{check_finite, Element, ElementJson, ElementMeta, SpaceDesc, SpaceError, WireElement};

/// `x(t) = sum_k c_k T_k(2t - 1)` with plain (unhalved) coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct ChebFn {
    coeffs: Vec<f64>,
    smoothness_order: usize,
}

impl ChebFn {
    pub fn new(coeffs: Vec<f64>, smoothness_order: usize) -> Result<Self, SpaceError> {
        if coeffs.is_empty() {
            return Err(SpaceError::EmptyCheb);
        }
        check_finite(&coeffs)?;
        Ok(Self {
            coeffs,
            smoothness_order,
        })
    }

    pub fn constant(value: f64, smoothness_order: usize) -> Self {
        Self {
            coeffs: vec![value],
            smoothness_order,
        }
    }

    /// Interpolates `f` at the `degree + 1` Chebyshev–Lobatto nodes and
    /// converts to coefficients. Exact (to rounding) for polynomials of
    /// degree at most `degree`.
    pub fn fit(
        f: impl Fn(f64) -> f64,
        degree: usize,
        smoothness_order: usize,
    ) -> Result<Self, SpaceError> {
        if degree == 0 {
            // A single Lobatto node degenerates; sample the midpoint instead.
            return Ok(Self::constant(f(0.5), smoothness_order));
        }
        let values: Vec<f64> = (0..=degree).map(|j| f(lobatto_t(j, degree))).collect();
        check_finite(&values)?;
        Ok(Self {
            coeffs: lobatto_to_coeffs(&values),
            smoothness_order,
        })
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn smoothness_order(&self) -> usize {
        self.smoothness_order
    }

    /// Clenshaw evaluation at `t` in `[0, 1]`.
    pub fn eval(&self, t: f64) -> f64 {
        let u = 2.0 * t - 1.0;
        let mut b1 = 0.0;
        let mut b2 = 0.0;
        for &ck in self.coeffs.iter().skip(1).rev() {
            let b0 = 2.0 * u * b1 - b2 + ck;
            b2 = b1;
            b1 = b0;
        }
        self.coeffs[0] + u * b1 - b2
    }

    /// Exact spectral differentiation: degree D goes to degree D-1.
    pub fn deriv(&self) -> ChebFn {
        let c = &self.coeffs;
        let n = c.len() - 1;
        let order = self.smoothness_order.saturating_sub(1);
        if n == 0 {
            return ChebFn {
                coeffs: vec![0.0],
                smoothness_order: order,
            };
        }
        let mut d = vec![0.0; n + 2];
        for k in (1..=n).rev() {
            d[k - 1] = d[k + 1] + 2.0 * k as f64 * c[k];
        }
        d[0] /= 2.0;
        d.truncate(n);
        // Chain rule for u = 2t - 1.
        for v in &mut d {
            *v *= 2.0;
        }
        ChebFn {
            coeffs: d,
            smoothness_order: order,
        }
    }

    /// `max_{k <= n} sup_t |x^(k)(t)|`, the space's norm.
    pub fn cn_norm(&self) -> f64 {
        let mut current = self.clone();
        let mut best = current.sampled_sup();
        for _ in 0..self.smoothness_order {
            current = current.deriv();
            best = best.max(current.sampled_sup());
        }
        best
    }

    fn sampled_sup(&self) -> f64 {
        let m = 8 * self.coeffs.len();
        (0..=m)
            .map(|i| self.eval(i as f64 / m as f64).abs())
            .fold(0.0, f64::max)
    }
}

/// `t`-coordinate of the `j`-th Chebyshev–Lobatto node on a degree-`n` grid,
/// ordered from `t = 1` down to `t = 0`.
fn lobatto_t(j: usize, n: usize) -> f64 {
    let u = (std::f64::consts::PI * j as f64 / n as f64).cos();
    (u + 1.0) / 2.0
}

/// Discrete Chebyshev transform of Lobatto-node values into plain
/// coefficients. Index products are reduced mod 2n before the angle is
/// formed, so no precision is lost to large trig arguments.
fn lobatto_to_coeffs(values: &[f64]) -> Vec<f64> {
    let n = values.len() - 1;
    let mut coeffs = vec![0.0; n + 1];
    for (k, ck) in coeffs.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (j, &v) in values.iter().enumerate() {
            let w = if j == 0 || j == n { 0.5 } else { 1.0 };
            let m = (j * k) % (2 * n);
            acc += w * v * (std::f64::consts::PI * m as f64 / n as f64).cos();
        }
        let halve = if k == 0 || k == n { 0.5 } else { 1.0 };
        *ck = acc * 2.0 / n as f64 * halve;
    }
    coeffs
}

/// Composes a scalar map with `x` by sampling at 4x oversampled Lobatto
/// nodes and refitting to `x`'s degree. Returns the composition and the
/// aliasing estimate: the coefficient mass discarded by the truncation.
pub fn cheb_compose(g: impl Fn(f64) -> f64, x: &ChebFn) -> (ChebFn, f64) {
    let len = x.coeffs.len();
    let over = 4 * len;
    let values: Vec<f64> = (0..=over).map(|j| g(x.eval(lobatto_t(j, over)))).collect();
    let full = lobatto_to_coeffs(&values);
    let alias = full[len..].iter().map(|c| c.abs()).sum();
    let out = ChebFn {
        coeffs: full[..len].to_vec(),
        smoothness_order: x.smoothness_order,
    };
    (out, alias)
}

impl Element for ChebFn {
    fn space(&self) -> SpaceDesc {
        SpaceDesc::Cheb {
            len: self.coeffs.len(),
            order: self.smoothness_order,
        }
    }

    fn coords(&self) -> &[f64] {
        &self.coeffs
    }

    fn with_coords(&self, coords: Vec<f64>) -> Self {
        assert_eq!(coords.len(), self.coeffs.len(), "cheb rebuild length mismatch");
        ChebFn {
            coeffs: coords,
            smoothness_order: self.smoothness_order,
        }
    }

    fn norm(&self) -> f64 {
        self.cn_norm()
    }

    fn zero_of(desc: &SpaceDesc) -> Result<Self, SpaceError> {
        match *desc {
            SpaceDesc::Cheb { len, order } => ChebFn::new(vec![0.0; len], order),
            ref other => Err(SpaceError::WrongSpace {
                expected: "cheb",
                got: other.clone(),
            }),
        }
    }

    fn random_unit(desc: &SpaceDesc, rng: &mut ChaCha8Rng) -> Result<Self, SpaceError> {
        match *desc {
            SpaceDesc::Cheb { len, order } => {
                // Geometric decay keeps random elements resolvable at the
                // stored degree; the C^n norm then rescales to 1.
                let mut decay = 1.0;
                let coeffs: Vec<f64> = (0..len)
                    .map(|_| {
                        let c = rng.random_range(-1.0..1.0) * decay;
                        decay *= 0.75;
                        c
                    })
                    .collect();
                let x = ChebFn::new(coeffs, order)?;
                let norm = x.cn_norm();
                Ok(x.scale(norm.recip()))
            }
            ref other => Err(SpaceError::WrongSpace {
                expected: "cheb",
                got: other.clone(),
            }),
        }
    }
}

impl WireElement for ChebFn {
    fn to_wire(&self) -> ElementJson {
        ElementJson {
            kind: "cheb".into(),
            data: self.coeffs.clone(),
            meta: ElementMeta {
                order: Some(self.smoothness_order),
                p: None,
            },
        }
    }

    fn from_wire(json: &ElementJson) -> Result<Self, SpaceError> {
        if json.kind != "cheb" {
            return Err(SpaceError::Wire(format!(
                "expected kind \"cheb\", got {:?}",
                json.kind
            )));
        }
        let order = json
            .meta
            .order
            .ok_or_else(|| SpaceError::Wire("cheb element needs meta.order".into()))?;
        ChebFn::new(json.data.clone(), order)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar_smooth::{ScalarSmoothFn, DEFAULT_THRESHOLDS};
    use rand::SeedableRng;

    fn truncator() -> ScalarSmoothFn {
        let (a, b) = DEFAULT_THRESHOLDS;
        ScalarSmoothFn::truncator(a, b).unwrap()
    }

    #[test]
    fn fit_and_eval_reproduce_cubics() {
        let x = ChebFn::fit(|t| t * t * t, 3, 0).unwrap();
        for i in 0..=50 {
            let t = i as f64 / 50.0;
            assert!((x.eval(t) - t * t * t).abs() <= 1e-14);
        }
    }

    #[test]
    fn differentiation_is_exact_on_polynomials() {
        let cubic = ChebFn::fit(|t| t * t * t, 3, 1).unwrap();
        let expect = ChebFn::fit(|t| 3.0 * t * t, 2, 0).unwrap();
        let got = cubic.deriv();
        assert_eq!(got.coeffs().len(), 3);
        for (g, e) in got.coeffs().iter().zip(expect.coeffs()) {
            assert!((g - e).abs() <= 1e-13, "{g} vs {e}");
        }
    }

    #[test]
    fn derivative_of_constant_is_zero() {
        let c = ChebFn::constant(4.0, 2);
        let d = c.deriv();
        assert_eq!(d.coeffs(), &[0.0]);
        assert_eq!(d.smoothness_order(), 1);
    }

    #[test]
    fn cn_norm_tracks_the_steepest_derivative() {
        // x(t) = t^2: sup|x| = 1, sup|x'| = 2.
        let x = ChebFn::fit(|t| t * t, 2, 1).unwrap();
        assert!((x.cn_norm() - 2.0).abs() <= 1e-12);
        let flat = ChebFn::fit(|t| t * t, 2, 0).unwrap();
        assert!((flat.cn_norm() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn compose_with_identity_returns_the_same_coefficients() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let desc = SpaceDesc::Cheb { len: 17, order: 1 };
        for _ in 0..20 {
            let x = ChebFn::random_unit(&desc, &mut rng).unwrap();
            let (same, alias) = cheb_compose(|s| s, &x);
            for (a, b) in same.coeffs().iter().zip(x.coeffs()) {
                assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
            }
            assert!(alias <= 1e-12);
        }
    }

    #[test]
    fn compose_on_the_flat_core_is_constant() {
        let h = truncator();
        let x = ChebFn::constant(0.2, 1);
        let (hx, alias) = cheb_compose(|s| h.eval(s), &x);
        assert!((hx.eval(0.3) - 0.2).abs() <= 1e-14);
        assert!(alias <= 1e-14);
    }

    #[test]
    fn compose_matches_the_pointwise_oracle() {
        let h = truncator();
        // Stays inside the identity core: composition is exactly linear.
        let small = ChebFn::fit(|t| t / 4.0, 64, 1).unwrap();
        let (h_small, _) = cheb_compose(|s| h.eval(s), &small);
        for i in 0..=100 {
            let t = i as f64 / 100.0;
            assert!((h_small.eval(t) - h.eval(t / 4.0)).abs() <= 1e-8);
        }
        // Crosses both thresholds: a genuinely non-polynomial composition.
        // The mollifier is C-infinity but not analytic, so coefficients decay
        // root-exponentially; the useful guarantees are that the reported
        // alias estimate dominates the pointwise truncation error and that
        // refinement actually converges.
        let mut last_err = f64::INFINITY;
        for len in [33usize, 65, 129] {
            let wide = ChebFn::fit(|t| 0.6 * t, len - 1, 1).unwrap();
            let (h_wide, alias) = cheb_compose(|s| h.eval(s), &wide);
            let mut worst = 0.0_f64;
            for i in 0..=100 {
                let t = i as f64 / 100.0;
                worst = worst.max((h_wide.eval(t) - h.eval(0.6 * t)).abs());
            }
            assert!(worst <= alias + 1e-12, "len={len}: {worst} > alias {alias}");
            assert!(worst < last_err, "no convergence at len={len}");
            last_err = worst;
        }
        assert!(last_err <= 1e-5);
    }

    #[test]
    fn random_unit_is_normalized() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let desc = SpaceDesc::Cheb { len: 9, order: 2 };
        for _ in 0..50 {
            let x = ChebFn::random_unit(&desc, &mut rng).unwrap();
            assert!((x.cn_norm() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn wire_roundtrip_requires_order() {
        let x = ChebFn::fit(|t| t, 3, 2).unwrap();
        let json = x.to_wire();
        assert_eq!(json.meta.order, Some(2));
        let back = ChebFn::from_wire(&json).unwrap();
        assert!(back.bit_eq(&x));
        assert_eq!(back.smoothness_order(), 2);

        let mut missing = json.clone();
        missing.meta.order = None;
        assert!(ChebFn::from_wire(&missing).is_err());
    }
}
