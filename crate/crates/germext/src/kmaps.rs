//! K-maps: globally bounded smooth maps that coincide with the identity on a
//! ball around the origin.
//!
//! On spaces without bump functions these are the working substitute: every
//! extension in this crate pivots on one. A [`KMap`] packages the evaluator
//! with its certificate data — the identity radius `r_id`, the sup bound
//! `N`, and per-order derivative sup estimates — so downstream constructions
//! can be audited rather than trusted.

use std::sync::Arc;

use thiserror::Error;

use crate::scalar_smooth::{ScalarSmoothFn, SmoothError};
use crate::spaces::{cheb_compose, ChebFn, Element, GridFn, PVector, SpaceDesc, SpaceError};

#[derive(Debug, Error)]
pub enum KmapError {
    #[error(transparent)]
    Smooth(#[from] SmoothError),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("bump K-maps need an even exponent for smoothness, got p = {p}")]
    OddP { p: u32 },
    #[error("this K-map carries no finite sup bound, so it cannot be rescaled or recentred")]
    UnboundedSup,
    #[error("epsilon must be positive and finite, got {eps}")]
    BadEpsilon { eps: f64 },
    #[error("ball parameters need r >= 0 and margin > 0, got r = {r}, margin = {margin}")]
    BadBall { r: f64, margin: f64 },
}

type Evaluator<E> = Arc<dyn Fn(&E) -> E + Send + Sync>;

/// A global map `H` with `H(x) = x` for `||x|| <= r_id` and
/// `sup_x ||H(x)|| <= bound`.
///
/// `deriv_bounds[k-1]` estimates `sup_x ||H^(k)(x)||` for the orders the
/// construction claims; they are dense-sample estimates of scalar cutoff
/// derivatives, used as scales (budget selection), not as proofs.
#[derive(Clone)]
pub struct KMap<E: Element> {
    space: SpaceDesc,
    r_id: f64,
    bound: f64,
    deriv_bounds: Vec<f64>,
    eval: Evaluator<E>,
}

impl<E: Element> std::fmt::Debug for KMap<E> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("KMap")
            .field("space", &self.space)
            .field("r_id", &self.r_id)
            .field("bound", &self.bound)
            .field("deriv_bounds", &self.deriv_bounds)
            .finish_non_exhaustive()
    }
}

impl<E: Element> KMap<E> {
    fn from_parts(
        space: SpaceDesc,
        r_id: f64,
        bound: f64,
        deriv_bounds: Vec<f64>,
        eval: Evaluator<E>,
    ) -> Self {
        debug_assert!(r_id > 0.0 && bound >= r_id);
        Self {
            space,
            r_id,
            bound,
            deriv_bounds,
            eval,
        }
    }

    pub fn evaluate(&self, x: &E) -> E {
        (self.eval)(x)
    }

    pub fn space(&self) -> &SpaceDesc {
        &self.space
    }

    /// Identity radius: `H(x) = x` (bit-exactly, for grid/p-vector spaces)
    /// whenever `||x|| <= r_id`.
    pub fn r_id(&self) -> f64 {
        self.r_id
    }

    /// Certified sup bound `N` (infinite when the construction cannot certify
    /// one, as for C^n spectral spaces with n >= 1).
    pub fn bound(&self) -> f64 {
        self.bound
    }

    /// Highest derivative order with a recorded sup estimate.
    pub fn deriv_order(&self) -> usize {
        self.deriv_bounds.len()
    }

    /// Sup estimate for `||H^(order)||`, `order >= 1`.
    pub fn deriv_bound(&self, order: usize) -> Option<f64> {
        if order == 0 {
            return Some(self.bound);
        }
        self.deriv_bounds.get(order - 1).copied()
    }

    /// `x -> (eps/N) H((N/eps) x)`: a K-map with identity radius
    /// `r_id * eps / N` and sup bound `eps`. Inside the new identity region
    /// the evaluator returns its argument directly — the rescaled map *is*
    /// the identity there, and evaluating the composition would only add
    /// rounding. Derivative sups of order k scale by `(N/eps)^(k-1)`.
    pub fn rescale(&self, eps: f64) -> Result<KMap<E>, KmapError> {
        if !(eps.is_finite() && eps > 0.0) {
            return Err(KmapError::BadEpsilon { eps });
        }
        if !self.bound.is_finite() {
            return Err(KmapError::UnboundedSup);
        }
        let up = self.bound / eps;
        let down = eps / self.bound;
        let r_id = self.r_id * down;
        let inner = self.eval.clone();
        let eval: Evaluator<E> = Arc::new(move |x: &E| {
            if x.norm() <= r_id {
                return x.clone();
            }
            inner(&x.scale(up)).scale(down)
        });
        let deriv_bounds = self
            .deriv_bounds
            .iter()
            .enumerate()
            .map(|(i, b)| b * up.powi(i as i32))
            .collect();
        Ok(KMap::from_parts(
            self.space.clone(),
            r_id,
            eps,
            deriv_bounds,
            eval,
        ))
    }
}

/// Derivative order tabulated for the scalar truncator behind pointwise
/// K-maps; the jet-realization machinery differentiates terms up to its
/// truncation degree, so this leaves headroom over the default 6.
const POINTWISE_DERIV_ORDER: usize = 8;

/// The pointwise K-map on grid functions: `H(x)(t) = h_{a,b}(x(t))`, with
/// `h` the truncator. Identity radius `a`; sup bound `b` (certified:
/// `|h(s)| < b` everywhere).
pub fn pointwise_kmap(a: f64, b: f64, d: usize) -> Result<KMap<GridFn>, KmapError> {
    if d < 2 {
        return Err(SpaceError::GridTooShort { d }.into());
    }
    let h = ScalarSmoothFn::truncator(a, b)?.with_max_deriv_order(POINTWISE_DERIV_ORDER)?;
    let deriv_bounds = (1..=POINTWISE_DERIV_ORDER)
        .map(|k| h.deriv_sup(k).expect("order within tabulated range"))
        .collect();
    let eval_h = h.clone();
    let eval: Evaluator<GridFn> = Arc::new(move |x: &GridFn| x.pointwise_apply(|s| eval_h.eval(s)));
    Ok(KMap::from_parts(
        SpaceDesc::Grid { d },
        a,
        b,
        deriv_bounds,
        eval,
    ))
}

/// The same construction on a C^n spectral space, via oversampled
/// composition and refit.
///
/// For `n >= 1` no finite sup bound in the C^n norm is certified (or, as far
/// as this crate can measure, true — see the C1 growth probe): the bound is
/// reported as infinite, which blocks rescaling. Identity on the core holds
/// to refit accuracy rather than bitwise.
pub fn pointwise_kmap_cheb(
    a: f64,
    b: f64,
    len: usize,
    order: usize,
) -> Result<KMap<ChebFn>, KmapError> {
    if len == 0 {
        return Err(SpaceError::EmptyCheb.into());
    }
    let h = ScalarSmoothFn::truncator(a, b)?;
    let eval_h = h.clone();
    let eval: Evaluator<ChebFn> =
        Arc::new(move |x: &ChebFn| cheb_compose(|s| eval_h.eval(s), x).0);
    Ok(KMap::from_parts(
        SpaceDesc::Cheb { len, order },
        a,
        f64::INFINITY,
        Vec::new(),
        eval,
    ))
}

/// The bump K-map on l_p, p even: `H(x) = tau(sum_i x_i^p) x` with `tau` a
/// bump whose thresholds are `rho_in^p`, `rho_out^p`. Identity radius
/// `rho_in`; sup bound `rho_out`.
pub fn bump_kmap(rho_in: f64, rho_out: f64, d: usize, p: u32) -> Result<KMap<PVector>, KmapError> {
    if p == 0 {
        return Err(SpaceError::BadP { p }.into());
    }
    if p % 2 != 0 {
        return Err(KmapError::OddP { p });
    }
    if d == 0 {
        return Err(SpaceError::EmptyPvec.into());
    }
    let tau = ScalarSmoothFn::bump(rho_in.powi(p as i32), rho_out.powi(p as i32))?;
    let eval: Evaluator<PVector> = Arc::new(move |x: &PVector| {
        // For even p this is a polynomial in the coordinates, hence smooth;
        // overflow to +inf is benign (the bump vanishes there).
        let s: f64 = x.coords().iter().map(|v| v.powi(p as i32)).sum();
        let delta = tau.eval(s);
        if delta == 1.0 {
            x.clone()
        } else if delta == 0.0 {
            x.zero_like()
        } else {
            x.scale(delta)
        }
    });
    // ||H'|| <= 1 + sup|tau'| * p * rho_out^p via Hoelder on the gradient of
    // the p-th power sum; recorded at order 1 only.
    let tau1 = ScalarSmoothFn::bump(rho_in.powi(p as i32), rho_out.powi(p as i32))?
        .deriv_sup(1)
        .expect("order 1 within default range");
    let deriv_bounds = vec![1.0 + tau1 * p as f64 * rho_out.powi(p as i32)];
    Ok(KMap::from_parts(
        SpaceDesc::Pvec { d, p },
        rho_in,
        rho_out,
        deriv_bounds,
        eval,
    ))
}

/// A K-map transported to the ball `||x - center|| <= r`: the identity on an
/// enlarged ball `r + margin/2`, with image confined to a computable radius.
#[derive(Clone, Debug)]
pub struct BallMap<E: Element> {
    kmap: KMap<E>,
    center: E,
    contraction: f64,
    identity_radius: f64,
    image_radius: f64,
}

impl<E: Element> BallMap<E> {
    pub fn center(&self) -> &E {
        &self.center
    }

    /// Radius (around the center) on which the map returns `x` exactly.
    pub fn identity_radius(&self) -> f64 {
        self.identity_radius
    }

    /// Every image point lies within this radius of the center.
    pub fn image_radius(&self) -> f64 {
        self.image_radius
    }

    /// `x -> z + (1/c) K(c (x - z))`; on the enlarged ball the shortcut
    /// returns `x` itself (the composition is the identity there).
    pub fn evaluate(&self, x: &E) -> Result<E, SpaceError> {
        let diff = x.sub(&self.center)?;
        if diff.norm() <= self.identity_radius {
            return Ok(x.clone());
        }
        let mapped = self.kmap.evaluate(&diff.scale(self.contraction));
        self.center.add(&mapped.scale(self.contraction.recip()))
    }
}

/// Recentres `k` at `center` with scale `c = k.r_id / (r + margin/2)`, making
/// it the identity on `||x - center|| <= r + margin/2` (a neighbourhood of
/// the `r`-ball) and globally bounded around the center.
pub fn kmap_at_ball<E: Element>(
    k: &KMap<E>,
    center: &E,
    r: f64,
    margin: f64,
) -> Result<BallMap<E>, KmapError> {
    if !(r.is_finite() && r >= 0.0 && margin.is_finite() && margin > 0.0) {
        return Err(KmapError::BadBall { r, margin });
    }
    if !k.bound.is_finite() {
        return Err(KmapError::UnboundedSup);
    }
    let identity_radius = r + margin / 2.0;
    let contraction = k.r_id / identity_radius;
    Ok(BallMap {
        kmap: k.clone(),
        center: center.clone(),
        contraction,
        identity_radius,
        image_radius: k.bound / contraction,
    })
}
