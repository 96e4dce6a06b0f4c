//! Concrete represented Banach spaces behind one [`Element`] trait.
//!
//! * [`GridFn`] — values on a finite uniform grid under the sup norm. With
//!   the grid itself taken as the underlying compact space this is exact, not
//!   a discretization; only the quadrature demos treat it as a sampling of
//!   `[0, 1]`, and their error is controlled by grid density.
//! * [`ChebFn`] — Chebyshev coefficients on `[0, 1]` under a `C^n` norm
//!   (max over derivative orders `k <= n` of the sampled sup of `x^(k)`).
//! * [`PVector`] — finite l_p vectors. The space accepts any integer
//!   `p >= 1`; only the bump constructions additionally require `p` even.
//! * `f64` — the scalar codomain, so real-valued functionals ride the same
//!   machinery as vector-valued maps.
//!
//! Elements are immutable values and all operations are pure.

mod cheb;
mod grid;
mod pvec;

pub use cheb::{cheb_compose, ChebFn};
pub use grid::GridFn;
pub use pvec::PVector;

use std::fmt;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpaceError {
    #[error("elements live in different spaces: {left:?} vs {right:?}")]
    SpaceMismatch { left: SpaceDesc, right: SpaceDesc },
    #[error("expected a {expected} element, got {got:?}")]
    WrongSpace { expected: &'static str, got: SpaceDesc },
    #[error("grid functions need at least 2 samples, got {d}")]
    GridTooShort { d: usize },
    #[error("chebyshev representation needs at least 1 coefficient")]
    EmptyCheb,
    #[error("p-vectors need at least 1 entry")]
    EmptyPvec,
    #[error("p must be a positive integer, got {p}")]
    BadP { p: u32 },
    #[error("non-finite entry at index {index}: {value}")]
    NonFinite { index: usize, value: f64 },
    #[error("composite Simpson quadrature needs an odd number of grid points, got {d}")]
    EvenGrid { d: usize },
    #[error("bad wire element: {0}")]
    Wire(String),
}

/// Identifies a space precisely enough to reconstruct zero elements, check
/// compatibility, and bound dual pairings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SpaceDesc {
    Grid { d: usize },
    Cheb { len: usize, order: usize },
    Pvec { d: usize, p: u32 },
    Scalar,
}

impl SpaceDesc {
    pub fn dim(&self) -> usize {
        match *self {
            SpaceDesc::Grid { d } => d,
            SpaceDesc::Cheb { len, .. } => len,
            SpaceDesc::Pvec { d, .. } => d,
            SpaceDesc::Scalar => 1,
        }
    }

    /// An upper bound on `|<phi, x>| / ||x||` for the discrete pairing
    /// `<phi, x> = sum_i phi_i x_i` over coordinates.
    ///
    /// Sup-norm spaces give `sum |phi_i|`; l_p gives the Hoelder conjugate
    /// norm; for Chebyshev coefficients, `|c_0| <= sup|x|` and
    /// `|c_k| <= 2 sup|x|` yield `|phi_0| + 2 sum_{k>=1} |phi_k|`.
    pub fn dual_norm_bound(&self, phi: &[f64]) -> f64 {
        assert_eq!(phi.len(), self.dim(), "functional length mismatch");
        match *self {
            SpaceDesc::Grid { .. } => phi.iter().map(|v| v.abs()).sum(),
            SpaceDesc::Cheb { .. } => {
                phi[0].abs() + 2.0 * phi[1..].iter().map(|v| v.abs()).sum::<f64>()
            }
            SpaceDesc::Pvec { p, .. } => {
                if p == 1 {
                    phi.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
                } else {
                    // Conjugate exponent q = p/(p-1).
                    let q = p as f64 / (p as f64 - 1.0);
                    scaled_power_norm(phi, q)
                }
            }
            SpaceDesc::Scalar => phi[0].abs(),
        }
    }
}

/// `(sum |v_i|^q)^(1/q)` with max-scaling to dodge overflow/underflow.
pub(crate) fn scaled_power_norm(v: &[f64], q: f64) -> f64 {
    let m = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if m == 0.0 {
        return 0.0;
    }
    let sum: f64 = v.iter().map(|x| (x.abs() / m).powf(q)).sum();
    m * sum.powf(q.recip())
}

/// A represented Banach-space element.
///
/// `coords` exposes the raw representation (grid samples, spectral
/// coefficients, vector entries) for linear plumbing; the norm is the
/// space's own and need not be any l_p norm of the coordinates.
pub trait Element: Clone + fmt::Debug + PartialEq + Send + Sync + 'static {
    fn space(&self) -> SpaceDesc;

    fn coords(&self) -> &[f64];

    /// Rebuilds an element of the same space from raw coordinates.
    ///
    /// Panics on length mismatch: callers are crate-internal and a mismatch
    /// is a bug, not an input error.
    fn with_coords(&self, coords: Vec<f64>) -> Self;

    fn norm(&self) -> f64;

    /// The zero element of the described space (fails on a foreign space kind).
    fn zero_of(desc: &SpaceDesc) -> Result<Self, SpaceError>;

    /// A reproducible pseudo-random element of norm (approximately) 1;
    /// exact 1 for sup-norm spaces.
    fn random_unit(desc: &SpaceDesc, rng: &mut ChaCha8Rng) -> Result<Self, SpaceError>;

    fn dim(&self) -> usize {
        self.coords().len()
    }

    fn zero_like(&self) -> Self {
        self.with_coords(vec![0.0; self.dim()])
    }

    fn lincomb(a: f64, x: &Self, b: f64, y: &Self) -> Result<Self, SpaceError> {
        if x.space() != y.space() {
            return Err(SpaceError::SpaceMismatch {
                left: x.space(),
                right: y.space(),
            });
        }
        let coords = x
            .coords()
            .iter()
            .zip(y.coords())
            .map(|(&xi, &yi)| a * xi + b * yi)
            .collect();
        Ok(x.with_coords(coords))
    }

    fn add(&self, other: &Self) -> Result<Self, SpaceError> {
        Self::lincomb(1.0, self, 1.0, other)
    }

    fn sub(&self, other: &Self) -> Result<Self, SpaceError> {
        Self::lincomb(1.0, self, -1.0, other)
    }

    /// Scalar multiple; `scale(1.0)` is bit-exact.
    fn scale(&self, a: f64) -> Self {
        self.with_coords(self.coords().iter().map(|&c| a * c).collect())
    }

    /// Bitwise coordinate equality — the currency of every identity-region claim.
    fn bit_eq(&self, other: &Self) -> bool {
        self.space() == other.space()
            && self
                .coords()
                .iter()
                .zip(other.coords())
                .all(|(x, y)| x.to_bits() == y.to_bits())
    }
}

impl Element for f64 {
    fn space(&self) -> SpaceDesc {
        SpaceDesc::Scalar
    }

    fn coords(&self) -> &[f64] {
        std::slice::from_ref(self)
    }

    fn with_coords(&self, coords: Vec<f64>) -> Self {
        assert_eq!(coords.len(), 1, "scalar rebuild length mismatch");
        coords[0]
    }

    fn norm(&self) -> f64 {
        self.abs()
    }

    fn zero_of(desc: &SpaceDesc) -> Result<Self, SpaceError> {
        match desc {
            SpaceDesc::Scalar => Ok(0.0),
            other => Err(SpaceError::WrongSpace {
                expected: "scalar",
                got: other.clone(),
            }),
        }
    }

    fn random_unit(desc: &SpaceDesc, rng: &mut ChaCha8Rng) -> Result<Self, SpaceError> {
        match desc {
            SpaceDesc::Scalar => Ok(if rng.random::<bool>() { 1.0 } else { -1.0 }),
            other => Err(SpaceError::WrongSpace {
                expected: "scalar",
                got: other.clone(),
            }),
        }
    }
}

/// Wire form of an element: `{"kind": "grid"|"cheb"|"pvec"|"scalar",
/// "data": [...], "meta": {...}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElementJson {
    pub kind: String,
    pub data: Vec<f64>,
    #[serde(default, skip_serializing_if = "ElementMeta::is_empty")]
    pub meta: ElementMeta,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ElementMeta {
    /// Smoothness order for `cheb` elements.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
    /// Exponent for `pvec` elements.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<u32>,
}

impl ElementMeta {
    pub fn is_empty(&self) -> bool {
        self.order.is_none() && self.p.is_none()
    }
}

/// Conversion between concrete elements and [`ElementJson`].
pub trait WireElement: Element {
    fn to_wire(&self) -> ElementJson;
    fn from_wire(json: &ElementJson) -> Result<Self, SpaceError>;
}

impl WireElement for f64 {
    fn to_wire(&self) -> ElementJson {
        ElementJson {
            kind: "scalar".into(),
            data: vec![*self],
            meta: ElementMeta::default(),
        }
    }

    fn from_wire(json: &ElementJson) -> Result<Self, SpaceError> {
        if json.kind != "scalar" {
            return Err(SpaceError::Wire(format!(
                "expected kind \"scalar\", got {:?}",
                json.kind
            )));
        }
        match json.data.as_slice() {
            [v] if v.is_finite() => Ok(*v),
            _ => Err(SpaceError::Wire(
                "scalar element needs exactly one finite datum".into(),
            )),
        }
    }
}

pub(crate) fn check_finite(entries: &[f64]) -> Result<(), SpaceError> {
    for (index, &value) in entries.iter().enumerate() {
        if !value.is_finite() {
            return Err(SpaceError::NonFinite { index, value });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(42)
    }

    fn random_of<E: Element>(desc: &SpaceDesc, rng: &mut ChaCha8Rng, scale: f64) -> E {
        E::random_unit(desc, rng).unwrap().scale(scale)
    }

    #[test]
    fn lincomb_examples() {
        let x = PVector::new(vec![1.0, 2.0], 2).unwrap();
        let y = PVector::new(vec![3.0, 4.0], 2).unwrap();
        let sum = PVector::lincomb(1.0, &x, 1.0, &y).unwrap();
        assert_eq!(sum.entries(), &[4.0, 6.0]);
        let zero = PVector::lincomb(1.0, &x, -1.0, &x).unwrap();
        assert!(zero.bit_eq(&x.zero_like()));
        let e1 = PVector::new(vec![1.0, 0.0], 2).unwrap();
        let e2 = PVector::new(vec![0.0, 1.0], 2).unwrap();
        let two_e1 = PVector::lincomb(2.0, &e1, 0.0, &e2).unwrap();
        assert_eq!(two_e1.entries(), &[2.0, 0.0]);
    }

    #[test]
    fn lincomb_rejects_mismatched_spaces() {
        let x = PVector::new(vec![1.0, 2.0], 2).unwrap();
        let y = PVector::new(vec![1.0, 2.0, 3.0], 2).unwrap();
        assert!(matches!(
            PVector::lincomb(1.0, &x, 1.0, &y),
            Err(SpaceError::SpaceMismatch { .. })
        ));
        let z = PVector::new(vec![1.0, 2.0], 4).unwrap();
        assert!(PVector::lincomb(1.0, &x, 1.0, &z).is_err());
    }

    #[test]
    fn norm_axioms_hold_on_random_pairs() {
        let mut rng = rng();
        let descs = [
            SpaceDesc::Grid { d: 17 },
            SpaceDesc::Cheb { len: 9, order: 1 },
            SpaceDesc::Pvec { d: 6, p: 4 },
        ];
        for _ in 0..1000 {
            for desc in &descs {
                match desc {
                    SpaceDesc::Grid { .. } => {
                        norm_axioms::<GridFn>(desc, &mut rng);
                    }
                    SpaceDesc::Cheb { .. } => {
                        norm_axioms::<ChebFn>(desc, &mut rng);
                    }
                    SpaceDesc::Pvec { .. } => {
                        norm_axioms::<PVector>(desc, &mut rng);
                    }
                    SpaceDesc::Scalar => unreachable!(),
                }
            }
        }
    }

    fn norm_axioms<E: Element>(desc: &SpaceDesc, rng: &mut ChaCha8Rng) {
        let lambda: f64 = rng.random_range(-3.0..3.0);
        let sx: f64 = rng.random_range(0.0..2.0);
        let sy: f64 = rng.random_range(0.0..2.0);
        let x: E = random_of(desc, rng, sx);
        let y: E = random_of(desc, rng, sy);
        let sum = x.add(&y).unwrap();
        assert!(
            sum.norm() <= x.norm() + y.norm() + 1e-12,
            "triangle inequality on {desc:?}"
        );
        let scaled = x.scale(lambda);
        let expect = lambda.abs() * x.norm();
        assert!(
            (scaled.norm() - expect).abs() <= 1e-12 * expect.max(1.0),
            "homogeneity on {desc:?}: {} vs {expect}",
            scaled.norm()
        );
    }

    #[test]
    fn dual_norm_bounds_the_pairing() {
        let mut rng = rng();
        let descs = [
            SpaceDesc::Grid { d: 17 },
            SpaceDesc::Cheb { len: 9, order: 1 },
            SpaceDesc::Pvec { d: 6, p: 2 },
            SpaceDesc::Pvec { d: 6, p: 1 },
        ];
        for desc in &descs {
            for _ in 0..300 {
                let phi: Vec<f64> = (0..desc.dim()).map(|_| rng.random_range(-2.0..2.0)).collect();
                let bound = desc.dual_norm_bound(&phi);
                let (pairing, norm) = match desc {
                    SpaceDesc::Grid { .. } => {
                        let x: GridFn = random_of(desc, &mut rng, 1.0);
                        (dot(&phi, x.coords()), x.norm())
                    }
                    SpaceDesc::Cheb { .. } => {
                        let x: ChebFn = random_of(desc, &mut rng, 1.0);
                        (dot(&phi, x.coords()), x.norm())
                    }
                    SpaceDesc::Pvec { .. } => {
                        let x: PVector = random_of(desc, &mut rng, 1.0);
                        (dot(&phi, x.coords()), x.norm())
                    }
                    SpaceDesc::Scalar => unreachable!(),
                };
                assert!(
                    pairing.abs() <= bound * norm * (1.0 + 1e-12),
                    "pairing bound on {desc:?}: |{pairing}| > {bound} * {norm}"
                );
            }
        }
    }

    fn dot(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }

    #[test]
    fn scalar_element_behaves() {
        let x = 3.0_f64;
        assert_eq!(x.space(), SpaceDesc::Scalar);
        assert_eq!(x.norm(), 3.0);
        assert_eq!(f64::zero_of(&SpaceDesc::Scalar).unwrap(), 0.0);
        let mut r = rng();
        let u = f64::random_unit(&SpaceDesc::Scalar, &mut r).unwrap();
        assert_eq!(u.abs(), 1.0);
        assert!(f64::zero_of(&SpaceDesc::Grid { d: 4 }).is_err());
    }

    #[test]
    fn wire_roundtrip_and_rejection() {
        let x = 2.5_f64;
        let json = x.to_wire();
        assert_eq!(json.kind, "scalar");
        assert_eq!(f64::from_wire(&json).unwrap(), 2.5);

        let text = serde_json::to_string(&json).unwrap();
        assert_eq!(text, r#"{"kind":"scalar","data":[2.5]}"#);

        let bad = ElementJson {
            kind: "scalar".into(),
            data: vec![1.0, 2.0],
            meta: ElementMeta::default(),
        };
        assert!(f64::from_wire(&bad).is_err());
        let foreign = ElementJson {
            kind: "grid".into(),
            data: vec![1.0],
            meta: ElementMeta::default(),
        };
        assert!(f64::from_wire(&foreign).is_err());
    }
}
