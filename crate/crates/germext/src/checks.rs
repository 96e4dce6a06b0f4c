//! The verification suite behind both `germext verify` and the acceptance
//! tests: each function here measures one family of claims and returns the
//! outcome as report checks. Keeping these in the library (rather than in
//! the test tree) means the CLI, the integration tests, and any embedder run
//! the *same* measurements.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::borel::{choose_epsilons, random_rank_one_jet, BorelError, BorelSeries, Jet};
use crate::extension::{extend_germ, integral_local, ExtendError};
use crate::kmaps::{pointwise_kmap, pointwise_kmap_cheb, KmapError};
use crate::polynomials::PolyError;
use crate::report::Check;
use crate::scalar_smooth::{ScalarSmoothFn, SmoothError};
use crate::spaces::{ChebFn, Element, GridFn, SpaceDesc, SpaceError};
use crate::verify::{directional_deriv, sup_probe, FdConfig, ProbeConfig, VerifyError};

#[derive(Debug, Error)]
pub enum CheckError {
    #[error(transparent)]
    Smooth(#[from] SmoothError),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Kmap(#[from] KmapError),
    #[error(transparent)]
    Extend(#[from] ExtendError),
    #[error(transparent)]
    Borel(#[from] BorelError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
}

/// Scalar truncator template: identity on the core, zero past the support,
/// both bit-exact on dense deterministic grids.
pub fn truncator_template(a: f64, b: f64, samples: usize) -> Result<Vec<Check>, CheckError> {
    let h = ScalarSmoothFn::truncator(a, b)?;
    let mut core_violations = 0;
    let mut tail_violations = 0;
    for i in 0..samples {
        let t = i as f64 / (samples - 1) as f64;
        let s = a * (2.0 * t - 1.0);
        if h.eval(s).to_bits() != s.to_bits() {
            core_violations += 1;
        }
        let far = b * (1.0 + 4.0 * t);
        if h.eval(far) != 0.0 || h.eval(-far) != 0.0 {
            tail_violations += 1;
        }
    }
    Ok(vec![
        Check::count("truncator_core_identity", core_violations),
        Check::count("truncator_tail_zero", tail_violations),
    ])
}

/// K-map certificate on a sampled-function space: bit-exact identity inside
/// `r_id`, probed sup within the certified bound.
pub fn kmap_certificate(a: f64, b: f64, d: usize, seed: u64) -> Result<Vec<Check>, CheckError> {
    let k = pointwise_kmap(a, b, d)?;
    let desc = SpaceDesc::Grid { d };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut identity_violations = 0;
    for _ in 0..1000 {
        let r = rng.random_range(0.0..=k.r_id());
        let x = GridFn::random_unit(&desc, &mut rng)?.scale(r);
        if !k.evaluate(&x).bit_eq(&x) {
            identity_violations += 1;
        }
    }
    let cfg = ProbeConfig {
        trials: 10_000,
        norm_range: (1e-3, 1e3),
        seed,
    };
    let sup = sup_probe(|x: &GridFn| k.evaluate(x), &desc, &cfg)?;
    Ok(vec![
        Check::count("kmap_identity_exact", identity_violations),
        Check::against("kmap_sup", sup, b, 1e-12),
    ])
}

/// Germ extension of the integral functional: exact agreement inside the
/// ball, global totality with values in the explicit range, and the two
/// closed-form spot values.
pub fn extension_reproduction(
    d: usize,
    a: f64,
    b: f64,
    eps: f64,
    seed: u64,
) -> Result<Vec<Check>, CheckError> {
    let f = integral_local(d)?;
    let k = pointwise_kmap(a, b, d)?;
    let global = extend_germ(&f, &k, eps)?;
    let desc = SpaceDesc::Grid { d };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut agreement_violations = 0;
    let mut max_residual = 0.0_f64;
    for _ in 0..1000 {
        let r = rng.random_range(0.0..global.agreement_radius());
        let x = GridFn::random_unit(&desc, &mut rng)?.scale(r);
        let local = f.evaluate(&x)?;
        let extended = global.evaluate(&x);
        if extended.to_bits() != local.to_bits() {
            agreement_violations += 1;
        }
        max_residual = max_residual.max((extended - local).abs());
    }

    // The composed integrand's denominator stays within [1 -/+ eps], so the
    // value lives in (0, 1/(1-eps)]; eps = b reproduces the (0, 2] range of
    // the explicit truncator extension.
    let range_cap = (1.0 - eps).recip();
    let mut range_violations = 0;
    for _ in 0..10_000 {
        let r = 10f64.powf(rng.random_range(-3.0..3.0));
        let x = GridFn::random_unit(&desc, &mut rng)?.scale(r);
        let value = global.evaluate(&x);
        if !(value > 0.0 && value <= range_cap + 1e-12) {
            range_violations += 1;
        }
    }

    let quarter = GridFn::constant(0.25, d)?;
    let quarter_err = (global.evaluate(&quarter) - 4.0 / 3.0).abs();
    let ramp = GridFn::from_fn(d, |t| t / 4.0)?;
    let ramp_err = (global.evaluate(&ramp) - 4.0 * (4.0_f64 / 3.0).ln()).abs();

    Ok(vec![
        Check::count("integral_agreement_exact", agreement_violations),
        Check::against("integral_agreement", max_residual, 0.0, 1e-12),
        Check::count("extension_range", range_violations),
        Check::against("integral_quarter", quarter_err, 0.0, 1e-14),
        Check::against("integral_ramp", ramp_err, 0.0, 1e-8),
        Check::info("agreement_radius", global.agreement_radius()),
        Check::info("extension_sup_bound", global.sup_bound()),
    ])
}

/// Polynomial derivative formulas against the finite-difference oracle, plus
/// the two structural facts: the top-order derivative ignores the base point
/// and orders above the degree vanish identically.
pub fn derivative_formulas(seed: u64, triples: usize) -> Result<Vec<Check>, CheckError> {
    let d = 6;
    let desc = SpaceDesc::Grid { d };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = FdConfig::default();

    let mut max_rel = 0.0_f64;
    let mut z_independence = 0.0_f64;
    let mut above_degree = 0.0_f64;
    for trial in 0..triples {
        let degree = 1 + trial % 4;
        let jet = random_rank_one_jet::<GridFn>(&desc, &desc, degree, &mut rng)?;
        let p = &jet.polys()[degree];
        let z = GridFn::random_unit(&desc, &mut rng)?.scale(rng.random_range(0.1..2.0));
        let v = GridFn::random_unit(&desc, &mut rng)?;
        for n in 1..=3.min(degree + 1) {
            let analytic = p.deriv_at(&z, &v, n)?;
            let fd = directional_deriv(|x| p.eval(x).unwrap(), &z, &v, n, &cfg)?;
            let rel = fd.value.sub(&analytic)?.norm() / analytic.norm().max(1.0);
            max_rel = max_rel.max(rel);
        }
        // n = degree: the formula contains <phi, z>^0, so z cannot enter.
        let base = p.deriv_at(&z, &v, degree)?;
        for _ in 0..10 {
            let other = GridFn::random_unit(&desc, &mut rng)?.scale(rng.random_range(0.0..3.0));
            let gap = p.deriv_at(&other, &v, degree)?.sub(&base)?.norm();
            z_independence = z_independence.max(gap / base.norm().max(1.0));
        }
        above_degree = above_degree.max(p.deriv_at(&z, &v, degree + 1)?.norm());
    }
    Ok(vec![
        Check::against("deriv_fd_agreement", max_rel, 0.0, 1e-6),
        Check::against("deriv_top_order_z_independence", z_independence, 0.0, 1e-12),
        Check::against("deriv_above_degree_zero", above_degree, 0.0, 0.0),
    ])
}

/// Jet realization at desk scale: read the jet back out of the series and
/// probe the certified global sup bound.
#[allow(clippy::too_many_arguments)]
pub fn jet_realization(
    d: usize,
    truncation: usize,
    a: f64,
    b: f64,
    budget: f64,
    seed: u64,
    tol: f64,
    directions: usize,
    sup_probes: usize,
) -> Result<Vec<Check>, CheckError> {
    let desc = SpaceDesc::Grid { d };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let jet = random_rank_one_jet::<GridFn>(&desc, &desc, truncation, &mut rng)?;
    jet_realization_with(jet, a, b, budget, tol, directions, sup_probes, &mut rng)
}

/// The same measurement for a caller-supplied jet (say, one loaded from
/// disk). The jet's own domain fixes the grid.
#[allow(clippy::too_many_arguments)]
pub fn jet_realization_with(
    jet: Jet<GridFn>,
    a: f64,
    b: f64,
    budget: f64,
    tol: f64,
    directions: usize,
    sup_probes: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Check>, CheckError> {
    let desc = jet.domain().clone();
    let k = pointwise_kmap(a, b, desc.dim())?;
    let epsilons = choose_epsilons(&jet, &k, budget)?;
    let series = BorelSeries::new(jet, k, epsilons)?;

    let dirs: Vec<GridFn> = (0..directions)
        .map(|_| GridFn::random_unit(&desc, rng))
        .collect::<Result<_, _>>()?;
    let extraction = series.verify_jet(&dirs, tol)?;

    // Probe against the jet-intrinsic bound sum(norm_bound * eps_j^j / j!).
    // The K-map's sup certificate tightens it further, so this is the weaker
    // of the two and the safer one to gate on.
    let mut jet_bound = 0.0;
    let mut fact = 1.0;
    for (j, p) in series.jet().polys().iter().enumerate() {
        if j > 0 {
            fact *= j as f64;
        }
        jet_bound += p.norm_bound() * series.epsilons()[j].powi(j as i32) / fact;
    }
    let mut sup = 0.0_f64;
    for _ in 0..sup_probes {
        let r = 10f64.powf(rng.random_range(-3.0..3.0));
        let x = GridFn::random_unit(&desc, rng)?.scale(r);
        sup = sup.max(series.evaluate(&x).norm());
    }

    let mut checks = vec![
        Check::against("jet_residuals", extraction.max_residual, 0.0, tol),
        Check::against("series_sup", sup, jet_bound, 1e-9),
    ];
    for (i, row) in extraction.residuals.iter().enumerate() {
        for (n, residual) in row.iter().enumerate() {
            checks.push(Check::against(
                format!("jet_residual_n{n}_v{i}"),
                *residual,
                0.0,
                tol,
            ));
        }
    }
    for (j, eps) in series.epsilons().iter().enumerate() {
        checks.push(Check::info(format!("epsilon_{j}"), *eps));
    }
    Ok(checks)
}

/// The damping power law, measured: sampled sups of n-th directional
/// derivatives of one scaled term at `eps` versus `eps/2` must contract by
/// `2^{-(j-n)}` up to a 1.5 factor.
pub fn epsilon_power_law(a: f64, b: f64, seed: u64, probes: usize) -> Result<Vec<Check>, CheckError> {
    let d = 8;
    let desc = SpaceDesc::Grid { d };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let jet = random_rank_one_jet::<GridFn>(&desc, &desc, 4, &mut rng)?;
    let k = pointwise_kmap(a, b, d)?;

    let mut checks = Vec::new();
    for &(j, n) in &[(3usize, 1usize), (3, 2), (4, 2)] {
        let p = &jet.polys()[j];
        let sup_at = |eps: f64| -> Result<f64, CheckError> {
            let f = |x: &GridFn| {
                let inner = if x.norm() <= eps * k.r_id() {
                    x.clone()
                } else {
                    k.evaluate(&x.scale(eps.recip())).scale(eps)
                };
                p.eval(&inner).unwrap()
            };
            // Probe geometry and step both scale with eps so the two
            // measurements sample the same rescaled landscape.
            let cfg = FdConfig {
                base_step: 1e-2 * eps,
                levels: 4,
            };
            let mut probe_rng = ChaCha8Rng::seed_from_u64(seed ^ 0x517c);
            let mut sup = 0.0_f64;
            for _ in 0..probes {
                let r = eps * 10f64.powf(probe_rng.random_range(-1.0..0.4));
                let x = GridFn::random_unit(&desc, &mut probe_rng)?.scale(r);
                let v = GridFn::random_unit(&desc, &mut probe_rng)?;
                let est = directional_deriv(f, &x, &v, n, &cfg)?;
                sup = sup.max(est.value.norm());
            }
            Ok(sup)
        };
        let full = sup_at(0.8)?;
        let half = sup_at(0.4)?;
        let law = 2f64.powi(-((j - n) as i32));
        checks.push(Check::against(
            format!("power_law_j{j}_n{n}"),
            half / full,
            law * 1.5,
            0.0,
        ));
    }
    Ok(checks)
}

/// Ideal property of the pointwise K-map: vanishing at a sample point is
/// preserved exactly, whatever the input's norm.
pub fn ideal_property(a: f64, b: f64, d: usize, seed: u64) -> Result<Vec<Check>, CheckError> {
    let k = pointwise_kmap(a, b, d)?;
    let desc = SpaceDesc::Grid { d };
    let pin = d / 2;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0;
    for _ in 0..1000 {
        let r = 10f64.powf(rng.random_range(-3.0..3.0));
        let raw = GridFn::random_unit(&desc, &mut rng)?.scale(r);
        let mut coords = raw.coords().to_vec();
        coords[pin] = 0.0;
        let x = raw.with_coords(coords);
        if k.evaluate(&x).coords()[pin] != 0.0 {
            violations += 1;
        }
    }
    Ok(vec![Check::count("ideal_property", violations)])
}

/// The open-question probe: with inputs `(1/4)sin(Mt)` of fixed sup norm,
/// the C1 norm of the coefficientwise K-map's output grows with M — there
/// is no uniform C1 bound over a C0-bounded set. Informational only.
pub fn c1_probe(a: f64, b: f64, big_d: usize) -> Result<Vec<Check>, CheckError> {
    let k = pointwise_kmap_cheb(a, b, big_d + 1, 1)?;
    let mut checks = Vec::new();
    let mut norms = Vec::new();
    for m in [4u32, 8, 16, 32] {
        let x = ChebFn::fit(|t| 0.25 * (m as f64 * t).sin(), big_d, 1)?;
        let c1 = k.evaluate(&x).cn_norm();
        checks.push(Check::info(format!("c1_norm_M{m}"), c1));
        norms.push(c1);
    }
    let min_ratio = norms
        .windows(2)
        .map(|w| w[1] / w[0])
        .fold(f64::INFINITY, f64::min);
    checks.push(Check::info("c1_growth_min_ratio", min_ratio));
    Ok(checks)
}
