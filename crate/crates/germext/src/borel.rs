//! Realizing a prescribed jet: given polynomials `P_0..P_J` with
//! `degree(P_j) = j`, build a globally defined map whose derivative data at
//! the origin is exactly that jet.
//!
//! The construction damps each term through a scaled K-map,
//! `H_j(x) = ε_j·K(x/ε_j)`, and sums `Σ_j P_j(H_j(x))/j!`. Near the origin
//! every `H_j` is the identity, so the sum *is* the truncated Taylor
//! polynomial there — jet reproduction is exact, not asymptotic. Away from
//! the origin the `ε_j` rein in each term and all of its lower-order
//! derivatives; [`choose_epsilons`] picks them so the certified bounds decay
//! geometrically.
//!
//! The certified side of that bargain is [`term_deriv_bound`]: a chain-rule
//! majorant `ε^{j−n}·c_{j,n}` for the n-th derivative sup of one scaled
//! term. It is deliberately crude — what matters downstream is the `ε`
//! power law, which is exact (each term is `ε^j` times a fixed shape
//! evaluated at `x/ε`).

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kmaps::{KMap, KmapError};
use crate::polynomials::{HomogeneousPoly, PolyError, PolyJson, RankOneTerm};
use crate::spaces::{Element, SpaceDesc, SpaceError};
use crate::verify::{taylor_coeffs, VerifyError};

#[derive(Debug, Error)]
pub enum BorelError {
    #[error("a jet needs at least the degree-0 polynomial")]
    EmptyJet,
    #[error("jet entry {index} has degree {degree}, want {index}")]
    DegreeMismatch { index: usize, degree: usize },
    #[error("jet polynomials must share one domain")]
    MixedDomain,
    #[error("jet polynomials must share one codomain")]
    MixedCodomain,
    #[error("the K-map lives on {kmap:?} but the jet on {jet:?}")]
    SpaceMismatch { kmap: SpaceDesc, jet: SpaceDesc },
    #[error("derivative budget must be positive and finite, got {budget}")]
    BadBudget { budget: f64 },
    #[error("the K-map records no derivative bound of order {order}, needed by the scale rule")]
    MissingDerivBound { order: usize },
    #[error("need one epsilon per jet degree: got {got}, want {want}")]
    EpsilonCount { got: usize, want: usize },
    #[error("epsilon[{index}] = {value}; scales must lie in (0, 1] and be nonincreasing")]
    BadEpsilon { index: usize, value: f64 },
    #[error("direction {index} has zero norm")]
    ZeroDirection { index: usize },
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Kmap(#[from] KmapError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

/// Target derivative data at the origin: one homogeneous polynomial per
/// degree `0..=J`, all on the same domain and codomain.
#[derive(Clone, Debug)]
pub struct Jet<Y: Element> {
    polys: Vec<HomogeneousPoly<Y>>,
}

impl<Y: Element> Jet<Y> {
    pub fn new(polys: Vec<HomogeneousPoly<Y>>) -> Result<Self, BorelError> {
        if polys.is_empty() {
            return Err(BorelError::EmptyJet);
        }
        for (index, p) in polys.iter().enumerate() {
            if p.degree() != index {
                return Err(BorelError::DegreeMismatch {
                    index,
                    degree: p.degree(),
                });
            }
            if p.domain() != polys[0].domain() {
                return Err(BorelError::MixedDomain);
            }
            if p.codomain() != polys[0].codomain() {
                return Err(BorelError::MixedCodomain);
            }
        }
        Ok(Self { polys })
    }

    /// The truncation order J (the highest degree present).
    pub fn truncation(&self) -> usize {
        self.polys.len() - 1
    }

    pub fn polys(&self) -> &[HomogeneousPoly<Y>] {
        &self.polys
    }

    pub fn domain(&self) -> &SpaceDesc {
        self.polys[0].domain()
    }

    pub fn codomain(&self) -> SpaceDesc {
        self.polys[0].codomain()
    }

    pub fn to_json(&self) -> JetJson
    where
        Y: crate::spaces::WireElement,
    {
        JetJson {
            polys: self.polys.iter().map(|p| p.to_json()).collect(),
        }
    }

    pub fn from_json(
        json: &JetJson,
        domain: &SpaceDesc,
        codomain: &SpaceDesc,
    ) -> Result<Self, BorelError>
    where
        Y: crate::spaces::WireElement,
    {
        let polys = json
            .polys
            .iter()
            .map(|p| HomogeneousPoly::from_json(p, domain.clone(), codomain))
            .collect::<Result<Vec<_>, _>>()?;
        Jet::new(polys)
    }
}

/// Wire form of a jet: the polynomials in degree order.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct JetJson {
    pub polys: Vec<PolyJson>,
}

/// A seeded random jet with one rank-one term per degree, normalized so each
/// `norm_bound(P_j)` lands in `[0.5, 1.5]`. Keeping the bounds near 1 keeps
/// the scale rule and the jet read-out well conditioned, which is what the
/// verification tests need from their fixtures.
pub fn random_rank_one_jet<Y: Element>(
    domain: &SpaceDesc,
    codomain: &SpaceDesc,
    truncation: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Jet<Y>, BorelError> {
    let dim = domain.dim();
    let mut polys = Vec::with_capacity(truncation + 1);
    for j in 0..=truncation {
        let weight = rng.random_range(0.5..1.5);
        let output = Y::random_unit(codomain, rng)?;
        let functional = if j == 0 {
            Vec::new()
        } else {
            loop {
                let raw: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
                let scale = domain.dual_norm_bound(&raw);
                if scale > 1e-3 {
                    break raw.iter().map(|c| c / scale).collect();
                }
            }
        };
        polys.push(HomogeneousPoly::new(
            j,
            domain.clone(),
            vec![RankOneTerm::new(weight, functional, output)],
        )?);
    }
    Jet::new(polys)
}

/// `C(n, k)` as a float; exact for everything the majorant ever asks for.
fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k.min(n));
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Partial Bell polynomial `B_{n,m}(x_1, ..., x_{n-m+1})` by the standard
/// recurrence `B_{n,m} = Σ_i C(n-1, i-1)·x_i·B_{n-i,m-1}`.
fn partial_bell(n: usize, m: usize, x: &[f64]) -> f64 {
    let mut table = vec![vec![0.0; m + 1]; n + 1];
    table[0][0] = 1.0;
    for nn in 1..=n {
        for mm in 1..=m.min(nn) {
            let mut acc = 0.0;
            for i in 1..=(nn - mm + 1) {
                acc += binomial(nn - 1, i - 1) * x[i - 1] * table[nn - i][mm - 1];
            }
            table[nn][mm] = acc;
        }
    }
    table[n][m]
}

/// `j·(j-1)·…·(j-m+1)`.
fn falling(j: usize, m: usize) -> f64 {
    (0..m).map(|i| (j - i) as f64).product()
}

/// The ε-free factor `c_{j,n}` of the majorant: combining `||P_j^{(m)}|| <=
/// norm_bound·j!/(j-m)!·N^{j-m}` over the image ball with Bell-polynomial
/// combinations of the K-map's derivative bounds. Returns `+inf` when the
/// K-map does not record a needed order — unknown means unbounded here.
fn chain_majorant<Y: Element, X: Element>(p: &HomogeneousPoly<Y>, k: &KMap<X>, n: usize) -> f64 {
    let cj = p.norm_bound();
    if cj == 0.0 {
        return 0.0;
    }
    let j = p.degree();
    let big_n = k.bound();
    if n == 0 {
        return cj * big_n.powi(j as i32);
    }
    let bounds: Option<Vec<f64>> = (1..=n).map(|i| k.deriv_bound(i)).collect();
    let Some(bounds) = bounds else {
        return f64::INFINITY;
    };
    let mut acc = 0.0;
    for m in 1..=n.min(j) {
        acc += falling(j, m) * big_n.powi((j - m) as i32) * partial_bell(n, m, &bounds);
    }
    cj * acc
}

/// Certified sup bound for the n-th derivative of one scaled term
/// `x ↦ P_j(ε·K(x/ε))`: the term is `ε^j` times a fixed shape in `x/ε`, so
/// every derivative bound carries the exact power `ε^{j-n}`.
pub fn term_deriv_bound<Y: Element, X: Element>(
    p: &HomogeneousPoly<Y>,
    k: &KMap<X>,
    eps: f64,
    n: usize,
) -> f64 {
    let j = p.degree();
    eps.powi(j as i32 - n as i32) * chain_majorant(p, k, n)
}

/// Picks the damping scales: `ε_j = min(1, 2^{-j}·budget/(1 + ĉ_j))` with
/// `ĉ_j = max_{n<j} c_{j,n}`, then enforces the nonincreasing invariant
/// outright. The choice guarantees `term_deriv_bound(P_j, K, ε_j, n) <=
/// 2^{-j}·budget` for every `n < j`, which is what makes the summed series
/// and its lower derivatives converge geometrically.
///
/// Identically-zero polynomials put no constraint on their scale and get
/// `ε_j = 1` before the monotonicity pass.
pub fn choose_epsilons<Y: Element, X: Element>(
    jet: &Jet<Y>,
    k: &KMap<X>,
    derivative_budget: f64,
) -> Result<Vec<f64>, BorelError> {
    if !(derivative_budget.is_finite() && derivative_budget > 0.0) {
        return Err(BorelError::BadBudget {
            budget: derivative_budget,
        });
    }
    if !k.bound().is_finite() {
        return Err(BorelError::Kmap(KmapError::UnboundedSup));
    }
    let mut eps = Vec::with_capacity(jet.polys.len());
    for (j, p) in jet.polys.iter().enumerate() {
        let raw = if p.norm_bound() == 0.0 {
            1.0
        } else {
            let mut hat = 0.0_f64;
            for n in 0..j {
                hat = hat.max(chain_majorant(p, k, n));
            }
            if !hat.is_finite() {
                return Err(BorelError::MissingDerivBound {
                    order: k.deriv_order() + 1,
                });
            }
            (2f64.powi(-(j as i32)) * derivative_budget / (1.0 + hat)).min(1.0)
        };
        let prev = eps.last().copied().unwrap_or(1.0);
        eps.push(raw.min(prev));
    }
    Ok(eps)
}

/// The truncated jet-realizing series `f(x) = Σ_{j<=J} P_j(H_j(x))/j!` with
/// `H_j(x) = ε_j·K(x/ε_j)`.
#[derive(Clone)]
pub struct BorelSeries<X: Element, Y: Element> {
    jet: Jet<Y>,
    kmap: KMap<X>,
    epsilons: Vec<f64>,
    zero_y: Y,
}

impl<X: Element, Y: Element> BorelSeries<X, Y> {
    pub fn new(jet: Jet<Y>, kmap: KMap<X>, epsilons: Vec<f64>) -> Result<Self, BorelError> {
        if kmap.space() != jet.domain() {
            return Err(BorelError::SpaceMismatch {
                kmap: kmap.space().clone(),
                jet: jet.domain().clone(),
            });
        }
        if !kmap.bound().is_finite() {
            return Err(BorelError::Kmap(KmapError::UnboundedSup));
        }
        if epsilons.len() != jet.polys.len() {
            return Err(BorelError::EpsilonCount {
                got: epsilons.len(),
                want: jet.polys.len(),
            });
        }
        for (index, &value) in epsilons.iter().enumerate() {
            let fits = value > 0.0 && value <= 1.0;
            let monotone = index == 0 || value <= epsilons[index - 1];
            if !(fits && monotone) {
                return Err(BorelError::BadEpsilon { index, value });
            }
        }
        let zero_y = Y::zero_of(&jet.codomain())?;
        Ok(Self {
            jet,
            kmap,
            epsilons,
            zero_y,
        })
    }

    /// Builds the series with scales from [`choose_epsilons`].
    pub fn with_budget(
        jet: Jet<Y>,
        kmap: KMap<X>,
        derivative_budget: f64,
    ) -> Result<Self, BorelError> {
        let epsilons = choose_epsilons(&jet, &kmap, derivative_budget)?;
        Self::new(jet, kmap, epsilons)
    }

    pub fn jet(&self) -> &Jet<Y> {
        &self.jet
    }

    pub fn kmap(&self) -> &KMap<X> {
        &self.kmap
    }

    pub fn epsilons(&self) -> &[f64] {
        &self.epsilons
    }

    pub fn truncation(&self) -> usize {
        self.jet.truncation()
    }

    /// Norms up to this radius see every `H_j` as the identity, so the
    /// series is exactly the truncated Taylor polynomial there.
    pub fn identity_radius(&self) -> f64 {
        self.epsilons.last().copied().unwrap_or(1.0) * self.kmap.r_id()
    }

    /// One damped term, `P_j(H_j(x))/j!`. Inside `||x|| <= ε_j·r_id` the
    /// scaled K-map is the identity and the polynomial is applied to `x`
    /// directly — routing through the scaling would only add rounding.
    pub fn eval_term(&self, j: usize, x: &X) -> Y {
        let p = &self.jet.polys[j];
        let eps = self.epsilons[j];
        let arg;
        let value = if x.norm() <= eps * self.kmap.r_id() {
            p.eval(x)
        } else {
            arg = self.kmap.evaluate(&x.scale(eps.recip())).scale(eps);
            p.eval(&arg)
        };
        value
            .expect("domains were validated at construction")
            .scale(factorial(j).recip())
    }

    ///`Σ_j P_j(H_j(x))/j!`; total in x.
    pub fn evaluate(&self, x: &X) -> Y {
        let mut acc = self.zero_y.clone();
        for j in 0..self.jet.polys.len() {
            let term = self.eval_term(j, x);
            acc = Y::lincomb(1.0, &acc, 1.0, &term)
                .expect("codomains were validated at construction");
        }
        acc
    }

    /// Certified global sup bound: `Σ_j norm_bound(P_j)·(ε_j·N)^j/j!`, since
    /// each inner argument has norm at most `ε_j·N`.
    pub fn sup_bound(&self) -> f64 {
        let big_n = self.kmap.bound();
        self.jet
            .polys
            .iter()
            .zip(&self.epsilons)
            .enumerate()
            .map(|(j, (p, eps))| {
                let cj = p.norm_bound();
                if cj == 0.0 {
                    0.0
                } else {
                    cj * (eps * big_n).powi(j as i32) / factorial(j)
                }
            })
            .sum()
    }

    /// Reads the jet back out of the realized map: fits `s ↦ f(s·v)` on the
    /// identity region (where it is exactly polynomial) and compares each
    /// Taylor coefficient with `P_n(v)/n!`. Residuals are relative on the
    /// coefficient scale, floored at 1 so that zero coefficients are judged
    /// absolutely.
    pub fn verify_jet(&self, directions: &[X], tol: f64) -> Result<JetVerifyReport, BorelError> {
        let r_flat = self.identity_radius();
        let degree = self.truncation();
        let mut residuals = Vec::with_capacity(directions.len());
        let mut max_residual = 0.0_f64;
        for (index, v) in directions.iter().enumerate() {
            let norm = v.norm();
            if norm == 0.0 {
                return Err(BorelError::ZeroDirection { index });
            }
            // Strictly inside the exact-polynomial region; the margin keeps
            // coordinate rounding from nudging samples across the boundary.
            let radius = 0.95 * r_flat / norm;
            let fit = taylor_coeffs(|x: &X| self.evaluate(x), v, degree, radius)?;
            let mut row = Vec::with_capacity(degree + 1);
            for n in 0..=degree {
                let expected = self.jet.polys[n].eval(v)?.scale(factorial(n).recip());
                let gap = fit.coeffs[n].sub(&expected)?.norm();
                let rel = gap / expected.norm().max(1.0);
                max_residual = max_residual.max(rel);
                row.push(rel);
            }
            residuals.push(row);
        }
        Ok(JetVerifyReport {
            residuals,
            max_residual,
            tol,
            passed: max_residual <= tol,
        })
    }
}

/// Outcome of [`BorelSeries::verify_jet`].
#[derive(Clone, Debug)]
pub struct JetVerifyReport {
    /// `residuals[direction][n]`: relative error of the extracted n-th
    /// Taylor coefficient against the jet's `P_n(v)/n!`.
    pub residuals: Vec<Vec<f64>>,
    pub max_residual: f64,
    pub tol: f64,
    pub passed: bool,
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}
