//! Constructions for extending locally defined smooth maps of Banach spaces
//! to globally defined ones, together with the numerical evidence that the
//! constructions do what they claim.
//!
//! The building blocks, bottom up:
//!
//! * [`scalar_smooth`] — infinitely differentiable scalar cutoffs (step,
//!   bump, truncator) with exact derivatives of any order and bit-exact
//!   values on their flat regions.
//! * [`spaces`] — concrete represented spaces (grid functions under the sup
//!   norm, Chebyshev-coefficient functions under C^n norms, finite l_p
//!   vectors) behind a common [`spaces::Element`] trait.
//! * [`polynomials`] — homogeneous polynomials built from rank-one terms
//!   `c * <phi, x>^j * y`, with closed-form directional derivatives.
//! * [`kmaps`] — maps that are the identity near the origin and globally
//!   bounded, the pivot of every extension here; rescaling and recentering
//!   transport them to arbitrary balls.
//! * [`extension`] — the extension operators themselves: compose a local map
//!   with a rescaled K-map, or damp it with a space bump function.
//! * [`borel`] — realize a finite jet of homogeneous polynomials as a single
//!   smooth map whose Taylor coefficients at the origin reproduce the jet.
//! * [`verify`] — finite-difference derivative oracles, Taylor-coefficient
//!   extraction, and randomized sup/identity probes used to check all of the
//!   above without trusting it.
//! * [`report`] / [`checks`] / [`cli`] — a small check-runner binary that
//!   packages the standard demonstrations as machine-readable reports.

pub mod scalar_smooth;
pub mod spaces;

pub mod polynomials;

pub mod kmaps;

pub mod verify;

pub mod extension;

pub mod borel;

pub mod report;
pub mod checks;
pub mod cli;
