//! The numerical oracle layer: everything the rest of the crate claims gets
//! checked against the machinery here, which is built only on evaluation —
//! no analytic derivative formulas, no certificates taken on faith.
//!
//! * [`directional_deriv`] — central finite differences with Richardson
//!   extrapolation for `d^n/ds^n F(x + sv)` at `s = 0`, orders up to 4.
//! * [`taylor_coeffs`] — Taylor coefficients of `s -> F(sv)` by Chebyshev
//!   fitting on `[-radius, radius]`. On a region where the restriction is
//!   exactly polynomial the fit is exact, which is what makes high-order jet
//!   read-outs possible at all (raw FD beyond order 4 is hopeless in f64).
//! * [`sup_probe`] / [`identity_radius_probe`] — seeded randomized probes of
//!   sup bounds and identity regions, log-uniform in norm so both the core
//!   and the far field get exercised.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::kmaps::KMap;
use crate::spaces::{Element, SpaceDesc, SpaceError};

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("finite differences support derivative orders 0..=4, got {n}")]
    OrderTooHigh { n: usize },
    #[error("finite-difference config needs a positive finite base_step and levels >= 1")]
    BadFdConfig,
    #[error("taylor extraction needs a positive finite radius, got {radius}")]
    BadRadius { radius: f64 },
    #[error("taylor extraction degree {degree} exceeds the supported maximum {max}")]
    DegreeTooHigh { degree: usize, max: usize },
    #[error("probe config needs trials >= 1 and 0 < lo <= hi in norm_range")]
    BadProbeConfig,
    #[error(transparent)]
    Space(#[from] SpaceError),
}

/// Central-difference configuration.
#[derive(Clone, Debug)]
pub struct FdConfig {
    pub base_step: f64,
    /// Richardson levels (step halvings); the error estimate is the gap
    /// between the last two extrapolants, so 2+ levels give a usable one.
    pub levels: usize,
}

impl Default for FdConfig {
    fn default() -> Self {
        Self {
            base_step: 1e-2,
            levels: 4,
        }
    }
}

/// Randomized probe configuration; identical seeds reproduce bit-identical
/// probes.
#[derive(Clone, Debug)]
pub struct ProbeConfig {
    pub trials: usize,
    /// Norms are drawn log-uniformly from this range.
    pub norm_range: (f64, f64),
    pub seed: u64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            trials: 10_000,
            norm_range: (1e-3, 1e3),
            seed: 0,
        }
    }
}

pub struct DerivEstimate<Y> {
    pub value: Y,
    /// Gap between the last two Richardson extrapolants; infinite when only
    /// one level was run. When this is large the value is untrustworthy —
    /// callers should treat it as the oracle declining to answer.
    pub error_estimate: f64,
}

/// Max supported Taylor-extraction degree: Chebyshev-to-monomial conversion
/// loses roughly a bit per degree, so this keeps coefficients trustworthy.
pub const MAX_TAYLOR_DEGREE: usize = 24;

fn weighted_sum<Y: Element>(parts: &[(f64, Y)], scale: f64) -> Y {
    let proto = &parts[0].1;
    let mut out = vec![0.0; proto.dim()];
    for (w, y) in parts {
        for (o, c) in out.iter_mut().zip(y.coords()) {
            *o += w * c;
        }
    }
    for o in &mut out {
        *o *= scale;
    }
    proto.with_coords(out)
}

/// n-th derivative of `s -> F(x + s v)` at `s = 0` by central differences
/// with Richardson extrapolation.
pub fn directional_deriv<X: Element, Y: Element>(
    f: impl Fn(&X) -> Y,
    x: &X,
    v: &X,
    n: usize,
    cfg: &FdConfig,
) -> Result<DerivEstimate<Y>, VerifyError> {
    if n > 4 {
        return Err(VerifyError::OrderTooHigh { n });
    }
    if !(cfg.base_step.is_finite() && cfg.base_step > 0.0) || cfg.levels == 0 {
        return Err(VerifyError::BadFdConfig);
    }
    if n == 0 {
        return Ok(DerivEstimate {
            value: f(x),
            error_estimate: 0.0,
        });
    }
    let at = |s: f64| -> Result<Y, VerifyError> {
        let point = X::lincomb(1.0, x, s, v)?;
        Ok(f(&point))
    };
    // (offset, weight) stencils; scale carries the step powers.
    let stencil = |h: f64| -> Result<Y, VerifyError> {
        let (pts, scale): (&[(f64, f64)], f64) = match n {
            1 => (&[(1.0, 1.0), (-1.0, -1.0)], 0.5 / h),
            2 => (&[(1.0, 1.0), (0.0, -2.0), (-1.0, 1.0)], (h * h).recip()),
            3 => (
                &[(2.0, 1.0), (1.0, -2.0), (-1.0, 2.0), (-2.0, -1.0)],
                0.5 / (h * h * h),
            ),
            4 => (
                &[
                    (2.0, 1.0),
                    (1.0, -4.0),
                    (0.0, 6.0),
                    (-1.0, -4.0),
                    (-2.0, 1.0),
                ],
                (h * h * h * h).recip(),
            ),
            _ => unreachable!(),
        };
        let parts = pts
            .iter()
            .map(|&(offset, w)| Ok((w, at(offset * h)?)))
            .collect::<Result<Vec<_>, VerifyError>>()?;
        Ok(weighted_sum(&parts, scale))
    };
    // Richardson tableau in the element space; central stencils have error
    // series in h^2, so each level gains a factor-4 cancellation.
    let mut diag: Vec<Y> = Vec::with_capacity(cfg.levels);
    let mut error_estimate = f64::INFINITY;
    for i in 0..cfg.levels {
        let mut value = stencil(cfg.base_step / 2f64.powi(i as i32))?;
        for (m, prev) in diag.iter_mut().enumerate() {
            let pow = 4f64.powi(m as i32 + 1);
            let extrap = Y::lincomb(pow / (pow - 1.0), &value, -1.0 / (pow - 1.0), prev)?;
            *prev = value;
            value = extrap;
        }
        if let Some(last) = diag.last() {
            error_estimate = value.sub(last)?.norm();
        }
        diag.push(value);
    }
    Ok(DerivEstimate {
        value: diag.pop().expect("at least one level"),
        error_estimate,
    })
}

pub struct TaylorFit<Y> {
    /// `coeffs[m]` estimates the m-th Taylor coefficient (derivative / m!).
    pub coeffs: Vec<Y>,
    /// Max coordinate mismatch between fit and data, relative to the data
    /// scale (clamped below by 1).
    pub residual: f64,
}

/// Fits `s -> F(s v)` on `[-radius, radius]` by a degree-`degree` polynomial
/// through Chebyshev nodes and returns the monomial coefficients.
///
/// Exact (to conditioning) whenever the restriction is a polynomial of
/// degree at most `degree` on the interval — the intended use.
pub fn taylor_coeffs<X: Element, Y: Element>(
    f: impl Fn(&X) -> Y,
    v: &X,
    degree: usize,
    radius: f64,
) -> Result<TaylorFit<Y>, VerifyError> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(VerifyError::BadRadius { radius });
    }
    if degree > MAX_TAYLOR_DEGREE {
        return Err(VerifyError::DegreeTooHigh {
            degree,
            max: MAX_TAYLOR_DEGREE,
        });
    }
    let n = 4 * (degree + 1); // Gauss–Chebyshev node count
    let thetas: Vec<f64> = (0..n)
        .map(|i| std::f64::consts::PI * (2 * i + 1) as f64 / (2 * n) as f64)
        .collect();
    let us: Vec<f64> = thetas.iter().map(|t| t.cos()).collect();
    let data: Vec<Y> = us.iter().map(|&u| f(&v.scale(radius * u))).collect();
    let dim = data[0].dim();

    // Discrete Chebyshev analysis per coordinate, then conversion to
    // monomials in u and rescaling to s = radius * u.
    let t_mono = chebyshev_monomial_table(degree);
    let mut coeff_coords = vec![vec![0.0; dim]; degree + 1];
    let mut fitted = vec![vec![0.0; dim]; n];
    for c in 0..dim {
        let series: Vec<f64> = data.iter().map(|y| y.coords()[c]).collect();
        let mut cheb = vec![0.0; degree + 1];
        for (k, ck) in cheb.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (i, &d) in series.iter().enumerate() {
                acc += d * (k as f64 * thetas[i]).cos();
            }
            *ck = acc * 2.0 / n as f64;
        }
        cheb[0] *= 0.5;
        let mut mono = vec![0.0; degree + 1];
        for (k, &ck) in cheb.iter().enumerate() {
            for (m, &t) in t_mono[k].iter().enumerate() {
                mono[m] += ck * t;
            }
        }
        for (i, &u) in us.iter().enumerate() {
            fitted[i][c] = mono.iter().rev().fold(0.0, |acc, &a| acc * u + a);
        }
        for (m, row) in coeff_coords.iter_mut().enumerate() {
            row[c] = mono[m] / radius.powi(m as i32);
        }
    }

    let mut scale = 1.0_f64;
    let mut err = 0.0_f64;
    for (i, y) in data.iter().enumerate() {
        for (c, &d) in y.coords().iter().enumerate() {
            scale = scale.max(d.abs());
            err = err.max((fitted[i][c] - d).abs());
        }
    }
    let proto = data[0].zero_like();
    let coeffs = coeff_coords
        .into_iter()
        .map(|row| proto.with_coords(row))
        .collect();
    Ok(TaylorFit {
        coeffs,
        residual: err / scale,
    })
}

/// Coefficients of `T_k` in the monomial basis, `k = 0..=degree`.
fn chebyshev_monomial_table(degree: usize) -> Vec<Vec<f64>> {
    let mut table: Vec<Vec<f64>> = Vec::with_capacity(degree + 1);
    table.push(vec![1.0]);
    if degree == 0 {
        return table;
    }
    table.push(vec![0.0, 1.0]);
    for k in 2..=degree {
        let mut next = vec![0.0; k + 1];
        for (i, &c) in table[k - 1].iter().enumerate() {
            next[i + 1] += 2.0 * c;
        }
        for (i, &c) in table[k - 2].iter().enumerate() {
            next[i] -= c;
        }
        table.push(next);
    }
    table
}

/// Max of `||F(x)||` over seeded random probes with log-uniform norms.
pub fn sup_probe<X: Element, Y: Element>(
    f: impl Fn(&X) -> Y,
    domain: &SpaceDesc,
    cfg: &ProbeConfig,
) -> Result<f64, VerifyError> {
    let (lo, hi) = cfg.norm_range;
    if cfg.trials == 0 || !(lo > 0.0 && lo <= hi && hi.is_finite()) {
        return Err(VerifyError::BadProbeConfig);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let ratio = hi / lo;
    let mut sup = 0.0_f64;
    for _ in 0..cfg.trials {
        let t: f64 = rng.random_range(0.0..1.0);
        let x = X::random_unit(domain, &mut rng)?.scale(lo * ratio.powf(t));
        sup = sup.max(f(&x).norm());
    }
    Ok(sup)
}

#[derive(Clone, Debug)]
pub struct IdentityProbeReport {
    /// Largest probed norm below the first observed violation (the largest
    /// probed norm at all when none was found). An empirical lower bound for
    /// the identity region: with random probes it sits a hair below the true
    /// radius, so compare against `r_id` with a small multiplicative slack.
    pub certified_radius: f64,
    /// Probes with `||x|| <= r_id` where `K(x) != x` bitwise: any nonzero
    /// count falsifies the identity-radius claim.
    pub violations_inside: usize,
    pub probes: usize,
}

/// Probes `K(x) = x` bit-exactness across log-uniform norms.
pub fn identity_radius_probe<E: Element>(
    k: &KMap<E>,
    cfg: &ProbeConfig,
) -> Result<IdentityProbeReport, VerifyError> {
    let (lo, hi) = cfg.norm_range;
    if cfg.trials == 0 || !(lo > 0.0 && lo <= hi && hi.is_finite()) {
        return Err(VerifyError::BadProbeConfig);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let ratio = hi / lo;
    let mut results: Vec<(f64, bool)> = Vec::with_capacity(cfg.trials);
    for _ in 0..cfg.trials {
        let t: f64 = rng.random_range(0.0..1.0);
        let x = E::random_unit(k.space(), &mut rng)?.scale(lo * ratio.powf(t));
        let norm = x.norm();
        results.push((norm, k.evaluate(&x).bit_eq(&x)));
    }
    results.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut certified = 0.0_f64;
    for &(norm, ok) in &results {
        if !ok {
            break;
        }
        certified = norm;
    }
    let violations_inside = results
        .iter()
        .filter(|&&(norm, ok)| !ok && norm <= k.r_id())
        .count();
    Ok(IdentityProbeReport {
        certified_radius: certified,
        violations_inside,
        probes: cfg.trials,
    })
}
