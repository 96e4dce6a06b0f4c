//! Turning local maps into global ones.
//!
//! A [`LocalMap`] is only defined on an open ball and its evaluator is gated
//! accordingly — stepping outside is an error, never a silent extrapolation.
//! Two constructions lift such a germ to a [`GlobalMap`] defined on the whole
//! space:
//!
//! * [`extend_germ`] composes with a rescaled K-map: `F = f ∘ K_ε`. The image
//!   of `K_ε` lies in the ε-ball inside the germ's domain, so `F` is total,
//!   and `F = f` bit-exactly wherever `K_ε` is the identity.
//! * [`bump_extend`] multiplies by a smooth scalar bump: `F = δ·f` inside the
//!   bump's support and `0` outside (the local map is never consulted there).
//!
//! The module also carries the worked example used throughout the tests and
//! the CLI demos: the integral functional `x ↦ ∫₀¹ dt/(1 − x(t))`, defined
//! for `sup|x| < 1`, and its explicit global extension through the scalar
//! truncator, which lands in `(0, 2]` for every input.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::kmaps::{KMap, KmapError};
use crate::scalar_smooth::{ScalarSmoothFn, SmoothError, DEFAULT_THRESHOLDS};
use crate::spaces::{Element, GridFn, PVector, SpaceDesc, SpaceError};

#[derive(Debug, Error)]
pub enum ExtendError {
    #[error("input has norm {norm} but the map is only defined for norms below {radius}")]
    OutsideDomain { norm: f64, radius: f64 },
    #[error("domain radius must be positive and finite, got {radius}")]
    BadDomainRadius { radius: f64 },
    #[error("epsilon must satisfy 0 < eps < {radius} (the germ's domain radius), got {eps}")]
    BadEpsilon { eps: f64, radius: f64 },
    #[error("cutoff region radius {u_radius} must stay below the germ's domain radius {radius}")]
    CutoffTooWide { u_radius: f64, radius: f64 },
    #[error("the bump's support radius {support} exceeds the cutoff region radius {u_radius}")]
    BumpEscapesCutoff { support: f64, u_radius: f64 },
    #[error(transparent)]
    Kmap(#[from] KmapError),
    #[error(transparent)]
    Smooth(#[from] SmoothError),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

type MapFn<X, Y> = Arc<dyn Fn(&X) -> Y + Send + Sync>;

/// A map defined only for `||x|| < domain_radius`. The evaluator gate is the
/// type's whole reason to exist: every global evaluation must route through
/// one of the extension operators instead.
#[derive(Clone)]
pub struct LocalMap<X: Element, Y: Element> {
    domain_radius: f64,
    deriv_bound_claim: Option<f64>,
    eval: MapFn<X, Y>,
}

impl<X: Element, Y: Element> LocalMap<X, Y> {
    pub fn new(
        domain_radius: f64,
        eval: impl Fn(&X) -> Y + Send + Sync + 'static,
    ) -> Result<Self, ExtendError> {
        if !(domain_radius.is_finite() && domain_radius > 0.0) {
            return Err(ExtendError::BadDomainRadius {
                radius: domain_radius,
            });
        }
        Ok(Self {
            domain_radius,
            deriv_bound_claim: None,
            eval: Arc::new(eval),
        })
    }

    /// Attaches a caller-certified sup bound for the first derivative over
    /// the domain ball. Extensions built from a claiming germ report
    /// certified sup bounds instead of sampled ones.
    pub fn with_deriv_bound(mut self, bound: f64) -> Self {
        self.deriv_bound_claim = Some(bound);
        self
    }

    pub fn domain_radius(&self) -> f64 {
        self.domain_radius
    }

    pub fn deriv_bound_claim(&self) -> Option<f64> {
        self.deriv_bound_claim
    }

    pub fn evaluate(&self, x: &X) -> Result<Y, ExtendError> {
        let norm = x.norm();
        if norm >= self.domain_radius {
            return Err(ExtendError::OutsideDomain {
                norm,
                radius: self.domain_radius,
            });
        }
        Ok((self.eval)(x))
    }
}

/// How a [`GlobalMap`]'s `sup_bound` was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundKind {
    /// Derived from a bound the local map certified analytically.
    Certified,
    /// The max over seeded random samples; a floor for the true sup, not a
    /// proof.
    Empirical,
}

/// A map defined for every element of the space, remembering where it agrees
/// with the germ it came from and how large it can get.
#[derive(Clone)]
pub struct GlobalMap<X: Element, Y: Element> {
    agreement_radius: f64,
    sup_bound: f64,
    sup_bound_kind: BoundKind,
    eval: MapFn<X, Y>,
}

impl<X: Element, Y: Element> GlobalMap<X, Y> {
    /// Coincides with the originating local map bit-exactly for
    /// `||x||` up to this radius.
    pub fn agreement_radius(&self) -> f64 {
        self.agreement_radius
    }

    pub fn sup_bound(&self) -> f64 {
        self.sup_bound
    }

    pub fn sup_bound_kind(&self) -> BoundKind {
        self.sup_bound_kind
    }

    /// Total: accepts any element of the domain space, any norm.
    pub fn evaluate(&self, x: &X) -> Y {
        (self.eval)(x)
    }
}

const SUP_SAMPLES: usize = 10_000;
const SUP_SAMPLE_SEED: u64 = 17;

/// Seeded sampled sup of `||f||` over the closed `radius`-ball; every tenth
/// probe sits exactly on the boundary sphere, where maps like these peak.
fn sampled_sup_in_ball<X: Element, Y: Element>(
    f: &MapFn<X, Y>,
    space: &SpaceDesc,
    radius: f64,
) -> Result<f64, SpaceError> {
    let mut rng = ChaCha8Rng::seed_from_u64(SUP_SAMPLE_SEED);
    let mut sup = 0.0_f64;
    for i in 0..SUP_SAMPLES {
        let r = if i % 10 == 0 {
            radius
        } else {
            radius * rng.random_range(0.0..1.0)
        };
        let x = X::random_unit(space, &mut rng)?.scale(r);
        sup = sup.max(f(&x).norm());
    }
    Ok(sup)
}

/// The ε the extension operators use when the caller has no opinion: deep
/// enough inside the germ's domain to keep the closed ε-ball strictly
/// interior.
pub fn default_epsilon<X: Element, Y: Element>(f: &LocalMap<X, Y>) -> f64 {
    0.9 * f.domain_radius
}

/// Extends a germ to the whole space by composing with the K-map rescaled to
/// land in the ε-ball: `F(x) = f(K_ε(x))`.
///
/// `F` agrees with `f` bit-exactly for `||x|| <= K.r_id · ε / K.bound` (the
/// rescaled map returns its argument untouched there) and is defined for
/// every element because the composition's inner image never leaves the
/// ε-ball. The reported sup bound is `||f(0)|| + claim·ε` when the germ
/// certifies a first-derivative bound, otherwise a seeded sampled sup over
/// the ε-ball.
pub fn extend_germ<X: Element, Y: Element>(
    f: &LocalMap<X, Y>,
    k: &KMap<X>,
    eps: f64,
) -> Result<GlobalMap<X, Y>, ExtendError> {
    if !(eps > 0.0 && eps < f.domain_radius) {
        return Err(ExtendError::BadEpsilon {
            eps,
            radius: f.domain_radius,
        });
    }
    let scaled = k.rescale(eps)?;
    let agreement_radius = scaled.r_id();
    let (sup_bound, sup_bound_kind) = match f.deriv_bound_claim {
        Some(claim) => {
            let at_zero = (f.eval)(&X::zero_of(k.space())?).norm();
            (at_zero + claim * eps, BoundKind::Certified)
        }
        None => (
            sampled_sup_in_ball(&f.eval, k.space(), eps)?,
            BoundKind::Empirical,
        ),
    };
    let inner = f.eval.clone();
    let eval: MapFn<X, Y> = Arc::new(move |x: &X| inner(&scaled.evaluate(x)));
    Ok(GlobalMap {
        agreement_radius,
        sup_bound,
        sup_bound_kind,
        eval,
    })
}

/// A smooth scalar bump on l_p with even p: `δ(x) = τ(Σ xᵢᵖ)`, identically 1
/// for `||x||_p <= core_radius` and identically 0 for
/// `||x||_p >= support_radius`. This is the scalar factor of the bump K-map,
/// exposed on its own because cutoff extension multiplies by it.
#[derive(Clone, Debug)]
pub struct SpaceBump {
    space: SpaceDesc,
    core_radius: f64,
    support_radius: f64,
    p: u32,
    tau: ScalarSmoothFn,
}

impl SpaceBump {
    pub fn pvec(
        core_radius: f64,
        support_radius: f64,
        d: usize,
        p: u32,
    ) -> Result<Self, ExtendError> {
        if p == 0 {
            return Err(SpaceError::BadP { p }.into());
        }
        if p % 2 != 0 {
            return Err(KmapError::OddP { p }.into());
        }
        if d == 0 {
            return Err(SpaceError::EmptyPvec.into());
        }
        let tau = ScalarSmoothFn::bump(core_radius.powi(p as i32), support_radius.powi(p as i32))?;
        Ok(Self {
            space: SpaceDesc::Pvec { d, p },
            core_radius,
            support_radius,
            p,
            tau,
        })
    }

    pub fn space(&self) -> &SpaceDesc {
        &self.space
    }

    pub fn core_radius(&self) -> f64 {
        self.core_radius
    }

    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    pub fn eval(&self, x: &PVector) -> f64 {
        // Even p keeps the power sum polynomial in the coordinates; overflow
        // to +inf just lands in the bump's zero tail.
        let s: f64 = x.coords().iter().map(|v| v.powi(self.p as i32)).sum();
        self.tau.eval(s)
    }
}

/// Extends a germ by cutting it off: `F(x) = δ(x)·f(x)` where `δ` lives, `0`
/// outside the cutoff region. The local map is never evaluated outside the
/// region — outputs there are the precomputed zero of the codomain.
pub fn bump_extend<Y: Element>(
    f: &LocalMap<PVector, Y>,
    delta: &SpaceBump,
    u_radius: f64,
) -> Result<GlobalMap<PVector, Y>, ExtendError> {
    if !(u_radius > 0.0 && u_radius < f.domain_radius) {
        return Err(ExtendError::CutoffTooWide {
            u_radius,
            radius: f.domain_radius,
        });
    }
    if delta.support_radius > u_radius {
        return Err(ExtendError::BumpEscapesCutoff {
            support: delta.support_radius,
            u_radius,
        });
    }
    let zero_y = (f.eval)(&PVector::zero_of(delta.space())?).zero_like();
    let (sup_bound, sup_bound_kind) = match f.deriv_bound_claim {
        // sup|δ| = 1, so the germ's certified growth over the region bounds
        // the product too.
        Some(claim) => {
            let at_zero = (f.eval)(&PVector::zero_of(delta.space())?).norm();
            (at_zero + claim * u_radius, BoundKind::Certified)
        }
        None => {
            let bump = delta.clone();
            let inner = f.eval.clone();
            let gated: MapFn<PVector, Y> = Arc::new(move |x: &PVector| {
                let d = bump.eval(x);
                if d == 0.0 {
                    inner(x).zero_like()
                } else if d == 1.0 {
                    inner(x)
                } else {
                    inner(x).scale(d)
                }
            });
            (
                sampled_sup_in_ball(&gated, delta.space(), u_radius)?,
                BoundKind::Empirical,
            )
        }
    };
    let inner = f.eval.clone();
    let bump = delta.clone();
    let eval: MapFn<PVector, Y> = Arc::new(move |x: &PVector| {
        if x.norm() > u_radius {
            return zero_y.clone();
        }
        let d = bump.eval(x);
        if d == 0.0 {
            zero_y.clone()
        } else if d == 1.0 {
            inner(x)
        } else {
            inner(x).scale(d)
        }
    });
    Ok(GlobalMap {
        agreement_radius: delta.core_radius,
        sup_bound,
        sup_bound_kind,
        eval,
    })
}

/// `∫₀¹ dt / (1 − x(t))` by Simpson quadrature; only defined while the
/// integrand's pole stays away, i.e. for `sup|x| < 1`.
pub fn integral_functional(x: &GridFn) -> Result<f64, ExtendError> {
    let norm = x.sup_norm();
    if norm >= 1.0 {
        return Err(ExtendError::OutsideDomain { norm, radius: 1.0 });
    }
    Ok(x.pointwise_apply(|v| (1.0 - v).recip()).quadrature()?)
}

/// The explicit global extension of [`integral_functional`]:
/// `∫₀¹ dt / (1 − h(x(t)))` with `h` the default scalar truncator. Since
/// `|h| <= 1/2` the denominator stays in `[1/2, 3/2]`, so the value lies in
/// `(0, 2]` for every input, and for `sup|x| <= 1/3` the truncator is the
/// identity and the two functionals coincide exactly.
pub fn integral_functional_global(x: &GridFn) -> Result<f64, ExtendError> {
    let (a, b) = DEFAULT_THRESHOLDS;
    let h = ScalarSmoothFn::truncator(a, b).expect("default thresholds are valid");
    Ok(x
        .pointwise_apply(|v| (1.0 - h.eval(v)).recip())
        .quadrature()?)
}

/// [`integral_functional`] packaged as a germ on the unit ball of a d-point
/// grid. Validates up front that the grid supports Simpson quadrature (odd
/// d), so the inner evaluator cannot fail.
pub fn integral_local(d: usize) -> Result<LocalMap<GridFn, f64>, ExtendError> {
    let zero = GridFn::zero_of(&SpaceDesc::Grid { d })?;
    zero.quadrature()?;
    LocalMap::new(1.0, move |x: &GridFn| {
        x.pointwise_apply(|v| (1.0 - v).recip())
            .quadrature()
            .expect("grid parity was validated at construction")
    })
}
