//! Continuous homogeneous polynomial maps `P: X -> Y` stored as finite sums
//! of rank-one symmetric terms `c * <phi, x>^j * y`.
//!
//! Restricting to rank-one sums is what buys exact oracles: every directional
//! derivative has the closed form below, and the norm bound is a finite sum.
//! The pairing `<phi, x> = sum_i phi_i x_i` runs over raw coordinates.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::spaces::{Element, ElementJson, SpaceDesc, SpaceError, WireElement};

#[derive(Debug, Error)]
pub enum PolyError {
    #[error("functional has {phi} entries but the domain has dimension {dim}")]
    FunctionalLength { phi: usize, dim: usize },
    #[error("degree-0 terms must carry an empty functional, got {phi} entries")]
    ConstantWithFunctional { phi: usize },
    #[error("term outputs live in different spaces")]
    MixedCodomain,
    #[error("element lives in {got:?} but the polynomial's domain is {expected:?}")]
    DomainMismatch { expected: SpaceDesc, got: SpaceDesc },
    #[error("a polynomial needs at least one term; use `zero` for the zero map")]
    NoTerms,
    #[error(transparent)]
    Space(#[from] SpaceError),
}

/// One symmetric rank-one term `c * <phi, x>^j * y`.
///
/// As a j-linear map this is `c * <phi,x_1> ... <phi,x_j> * y`, symmetric by
/// construction.
#[derive(Clone, Debug)]
pub struct RankOneTerm<Y> {
    pub weight: f64,
    pub functional: Vec<f64>,
    pub output: Y,
}

impl<Y> RankOneTerm<Y> {
    pub fn new(weight: f64, functional: Vec<f64>, output: Y) -> Self {
        Self {
            weight,
            functional,
            output,
        }
    }
}

/// A degree-j homogeneous polynomial map with domain `X` described by
/// `domain` and codomain fixed by its terms' outputs.
#[derive(Clone, Debug)]
pub struct HomogeneousPoly<Y: Element> {
    degree: usize,
    domain: SpaceDesc,
    terms: Vec<RankOneTerm<Y>>,
    zero_output: Y,
}

fn dot(phi: &[f64], coords: &[f64]) -> f64 {
    phi.iter().zip(coords).map(|(a, b)| a * b).sum()
}

impl<Y: Element> HomogeneousPoly<Y> {
    pub fn new(
        degree: usize,
        domain: SpaceDesc,
        terms: Vec<RankOneTerm<Y>>,
    ) -> Result<Self, PolyError> {
        let first = terms.first().ok_or(PolyError::NoTerms)?;
        let codomain = first.output.space();
        let zero_output = first.output.zero_like();
        for term in &terms {
            if degree == 0 {
                if !term.functional.is_empty() {
                    return Err(PolyError::ConstantWithFunctional {
                        phi: term.functional.len(),
                    });
                }
            } else if term.functional.len() != domain.dim() {
                return Err(PolyError::FunctionalLength {
                    phi: term.functional.len(),
                    dim: domain.dim(),
                });
            }
            if term.output.space() != codomain {
                return Err(PolyError::MixedCodomain);
            }
        }
        Ok(Self {
            degree,
            domain,
            terms,
            zero_output,
        })
    }

    /// The zero map of the given degree, with an explicit codomain so it can
    /// still produce output elements.
    pub fn zero(degree: usize, domain: SpaceDesc, codomain: &SpaceDesc) -> Result<Self, PolyError> {
        Ok(Self {
            degree,
            domain,
            terms: Vec::new(),
            zero_output: Y::zero_of(codomain)?,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn domain(&self) -> &SpaceDesc {
        &self.domain
    }

    pub fn codomain(&self) -> SpaceDesc {
        self.zero_output.space()
    }

    pub fn terms(&self) -> &[RankOneTerm<Y>] {
        &self.terms
    }

    fn check_domain<X: Element>(&self, x: &X) -> Result<(), PolyError> {
        if x.space() != self.domain {
            return Err(PolyError::DomainMismatch {
                expected: self.domain.clone(),
                got: x.space(),
            });
        }
        Ok(())
    }

    /// `P(x) = sum_k c_k <phi_k, x>^j y_k`.
    pub fn eval<X: Element>(&self, x: &X) -> Result<Y, PolyError> {
        self.check_domain(x)?;
        let mut out = vec![0.0; self.zero_output.dim()];
        for term in &self.terms {
            let s = term.weight * dot(&term.functional, x.coords()).powi(self.degree as i32);
            for (o, y) in out.iter_mut().zip(term.output.coords()) {
                *o += s * y;
            }
        }
        Ok(self.zero_output.with_coords(out))
    }

    /// `P^(n)(z)(v)^n = j!/(j-n)! sum_k c_k <phi_k,z>^{j-n} <phi_k,v>^n y_k`
    /// for `n <= j`; the zero element for `n > j`.
    ///
    /// For `n = j` the `z` power is `powi(0) == 1.0` exactly, so the result is
    /// bit-for-bit independent of `z`.
    pub fn deriv_at<X: Element>(&self, z: &X, v: &X, n: usize) -> Result<Y, PolyError> {
        self.check_domain(z)?;
        self.check_domain(v)?;
        if n > self.degree {
            return Ok(self.zero_output.clone());
        }
        let j = self.degree;
        let falling: f64 = (j - n + 1..=j).fold(1.0, |acc, i| acc * i as f64);
        let mut out = vec![0.0; self.zero_output.dim()];
        for term in &self.terms {
            let pz = dot(&term.functional, z.coords()).powi((j - n) as i32);
            let pv = dot(&term.functional, v.coords()).powi(n as i32);
            let s = falling * term.weight * pz * pv;
            for (o, y) in out.iter_mut().zip(term.output.coords()) {
                *o += s * y;
            }
        }
        Ok(self.zero_output.with_coords(out))
    }

    /// A constant `c_j` with `||P(x)|| <= c_j ||x||^j` for every `x`:
    /// `sum_k |c_k| (dual bound of phi_k)^j ||y_k||`. An upper bound, not the
    /// operator norm.
    pub fn norm_bound(&self) -> f64 {
        self.terms
            .iter()
            .map(|term| {
                let dual = if self.degree == 0 {
                    1.0
                } else {
                    self.domain.dual_norm_bound(&term.functional)
                };
                term.weight.abs() * dual.powi(self.degree as i32) * term.output.norm()
            })
            .sum()
    }
}

/// Wire form: `{"degree": j, "terms": [{"c": ..., "phi": [...], "y": {...}}]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PolyJson {
    pub degree: usize,
    pub terms: Vec<TermJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TermJson {
    pub c: f64,
    pub phi: Vec<f64>,
    pub y: ElementJson,
}

impl<Y: WireElement> HomogeneousPoly<Y> {
    pub fn to_json(&self) -> PolyJson {
        PolyJson {
            degree: self.degree,
            terms: self
                .terms
                .iter()
                .map(|t| TermJson {
                    c: t.weight,
                    phi: t.functional.clone(),
                    y: t.output.to_wire(),
                })
                .collect(),
        }
    }

    /// The wire form does not name the spaces, so both must be supplied; the
    /// codomain also covers the empty-terms (zero polynomial) case.
    pub fn from_json(
        json: &PolyJson,
        domain: SpaceDesc,
        codomain: &SpaceDesc,
    ) -> Result<Self, PolyError> {
        if json.terms.is_empty() {
            return Self::zero(json.degree, domain, codomain);
        }
        let terms = json
            .terms
            .iter()
            .map(|t| -> Result<RankOneTerm<Y>, PolyError> {
                let output = Y::from_wire(&t.y)?;
                if output.space() != *codomain {
                    return Err(PolyError::MixedCodomain);
                }
                Ok(RankOneTerm::new(t.c, t.phi.clone(), output))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(json.degree, domain, terms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::{GridFn, PVector};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pvec(entries: &[f64]) -> PVector {
        PVector::new(entries.to_vec(), 2).unwrap()
    }

    /// P(x) = x_1^2 on l_2(R^2), scalar-valued.
    fn first_coord_squared() -> HomogeneousPoly<f64> {
        HomogeneousPoly::new(
            2,
            SpaceDesc::Pvec { d: 2, p: 2 },
            vec![RankOneTerm::new(1.0, vec![1.0, 0.0], 1.0)],
        )
        .unwrap()
    }

    #[test]
    fn eval_examples() {
        let p = first_coord_squared();
        assert_eq!(p.eval(&pvec(&[3.0, 7.0])).unwrap(), 9.0);
        assert_eq!(p.eval(&pvec(&[0.0, 0.0])).unwrap(), 0.0);

        let cubed = HomogeneousPoly::new(
            3,
            SpaceDesc::Pvec { d: 2, p: 2 },
            vec![RankOneTerm::new(1.0, vec![1.0, 1.0], 1.0)],
        )
        .unwrap();
        assert_eq!(cubed.eval(&pvec(&[1.0, 2.0])).unwrap(), 27.0);
    }

    #[test]
    fn deriv_examples() {
        let p = first_coord_squared();
        let z = pvec(&[1.0, 0.0]);
        let v = pvec(&[1.0, 0.0]);
        // 2 * z_1 * v_1
        assert_eq!(p.deriv_at(&z, &v, 1).unwrap(), 2.0);
        // n = j: j! P(v), z-independent bitwise.
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let reference = p.deriv_at(&z, &v, 2).unwrap();
        assert_eq!(reference, 2.0 * p.eval(&v).unwrap());
        for _ in 0..10 {
            let z2 = pvec(&[rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)]);
            let d = p.deriv_at(&z2, &v, 2).unwrap();
            assert_eq!(d.to_bits(), reference.to_bits());
        }
        // n = j + 1: identically zero.
        assert_eq!(p.deriv_at(&z, &v, 3).unwrap(), 0.0);
    }

    #[test]
    fn pairing_is_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let desc = SpaceDesc::Grid { d: 12 };
        let phi: Vec<f64> = (0..12).map(|_| rng.random_range(-1.0..1.0)).collect();
        let pairing = HomogeneousPoly::new(
            1,
            desc.clone(),
            vec![RankOneTerm::new(1.0, phi, 1.0)],
        )
        .unwrap();
        for _ in 0..200 {
            let a: f64 = rng.random_range(-2.0..2.0);
            let b: f64 = rng.random_range(-2.0..2.0);
            let x = GridFn::random_unit(&desc, &mut rng).unwrap();
            let z = GridFn::random_unit(&desc, &mut rng).unwrap();
            let combo = GridFn::lincomb(a, &x, b, &z).unwrap();
            let lhs = pairing.eval(&combo).unwrap();
            let rhs = a * pairing.eval(&x).unwrap() + b * pairing.eval(&z).unwrap();
            assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1.0));
        }
    }

    fn random_poly(
        rng: &mut ChaCha8Rng,
        degree: usize,
        domain: &SpaceDesc,
        codomain: &SpaceDesc,
        terms: usize,
    ) -> HomogeneousPoly<GridFn> {
        let terms = (0..terms)
            .map(|_| {
                let phi: Vec<f64> = if degree == 0 {
                    Vec::new()
                } else {
                    (0..domain.dim()).map(|_| rng.random_range(-1.0..1.0)).collect()
                };
                let y = GridFn::random_unit(codomain, rng).unwrap();
                RankOneTerm::new(rng.random_range(-2.0..2.0), phi, y)
            })
            .collect();
        HomogeneousPoly::new(degree, domain.clone(), terms).unwrap()
    }

    #[test]
    fn taylor_expansion_is_complete() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let domain = SpaceDesc::Grid { d: 6 };
        let codomain = SpaceDesc::Grid { d: 4 };
        for degree in 0..=5 {
            let p = random_poly(&mut rng, degree, &domain, &codomain, 2);
            let z = GridFn::random_unit(&domain, &mut rng).unwrap();
            let v = GridFn::random_unit(&domain, &mut rng).unwrap();
            let direct = p.eval(&z.add(&v).unwrap()).unwrap();
            let mut series = GridFn::zero_of(&codomain).unwrap();
            let mut fact = 1.0;
            for n in 0..=degree {
                if n > 0 {
                    fact *= n as f64;
                }
                let dn = p.deriv_at(&z, &v, n).unwrap();
                series = GridFn::lincomb(1.0, &series, fact.recip(), &dn).unwrap();
            }
            let err = direct.sub(&series).unwrap().norm();
            assert!(
                err <= 1e-10 * direct.norm().max(1.0),
                "degree {degree}: residual {err}"
            );
        }
    }

    #[test]
    fn norm_bound_dominates_on_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(54);
        let domain = SpaceDesc::Grid { d: 6 };
        let codomain = SpaceDesc::Grid { d: 4 };
        let p = random_poly(&mut rng, 3, &domain, &codomain, 3);
        let c = p.norm_bound();
        for _ in 0..10_000 {
            let r: f64 = rng.random_range(-3.0..3.0);
            let x = GridFn::random_unit(&domain, &mut rng).unwrap().scale(10f64.powf(r));
            let lhs = p.eval(&x).unwrap().norm();
            let rhs = c * x.norm().powi(3);
            assert!(lhs <= rhs * (1.0 + 1e-12), "{lhs} > {rhs}");
        }
    }

    #[test]
    fn norm_bound_examples() {
        // x_1^2 under the sup-norm dual: c_2 = 1.
        let p = HomogeneousPoly::new(
            2,
            SpaceDesc::Grid { d: 2 },
            vec![RankOneTerm::new(1.0, vec![1.0, 0.0], 1.0)],
        )
        .unwrap();
        assert_eq!(p.norm_bound(), 1.0);

        let zero = HomogeneousPoly::<f64>::zero(
            2,
            SpaceDesc::Grid { d: 2 },
            &SpaceDesc::Scalar,
        )
        .unwrap();
        assert_eq!(zero.norm_bound(), 0.0);
        assert_eq!(zero.eval(&GridFn::new(vec![1.0, 2.0]).unwrap()).unwrap(), 0.0);

        // 2 <phi, x>^3 y with ||phi||_* = 1 and ||y|| = 1.
        let two = HomogeneousPoly::new(
            3,
            SpaceDesc::Grid { d: 2 },
            vec![RankOneTerm::new(2.0, vec![0.5, 0.5], 1.0)],
        )
        .unwrap();
        assert_eq!(two.norm_bound(), 2.0);
    }

    #[test]
    fn construction_and_domain_guards() {
        let bad = HomogeneousPoly::new(
            2,
            SpaceDesc::Grid { d: 3 },
            vec![RankOneTerm::new(1.0, vec![1.0], 1.0)],
        );
        assert!(matches!(bad, Err(PolyError::FunctionalLength { .. })));

        assert!(matches!(
            HomogeneousPoly::<f64>::new(2, SpaceDesc::Grid { d: 3 }, vec![]),
            Err(PolyError::NoTerms)
        ));

        let mixed = HomogeneousPoly::new(
            1,
            SpaceDesc::Grid { d: 2 },
            vec![
                RankOneTerm::new(1.0, vec![1.0, 0.0], GridFn::constant(1.0, 3).unwrap()),
                RankOneTerm::new(1.0, vec![0.0, 1.0], GridFn::constant(1.0, 4).unwrap()),
            ],
        );
        assert!(matches!(mixed, Err(PolyError::MixedCodomain)));

        let p = first_coord_squared();
        let wrong = PVector::new(vec![1.0, 2.0, 3.0], 2).unwrap();
        assert!(matches!(
            p.eval(&wrong),
            Err(PolyError::DomainMismatch { .. })
        ));
    }

    #[test]
    fn json_roundtrip_including_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let domain = SpaceDesc::Grid { d: 5 };
        let codomain = SpaceDesc::Grid { d: 3 };
        let p = random_poly(&mut rng, 2, &domain, &codomain, 2);
        let json = p.to_json();
        let text = serde_json::to_string(&json).unwrap();
        assert!(text.starts_with(r#"{"degree":2,"terms":[{"c":"#));
        let parsed: PolyJson = serde_json::from_str(&text).unwrap();
        let back = HomogeneousPoly::<GridFn>::from_json(&parsed, domain.clone(), &codomain).unwrap();
        let x = GridFn::random_unit(&domain, &mut rng).unwrap();
        assert!(back.eval(&x).unwrap().bit_eq(&p.eval(&x).unwrap()));

        let zero = HomogeneousPoly::<GridFn>::zero(3, domain.clone(), &codomain).unwrap();
        let zjson = zero.to_json();
        assert!(zjson.terms.is_empty());
        let zback = HomogeneousPoly::<GridFn>::from_json(&zjson, domain, &codomain).unwrap();
        assert_eq!(zback.degree(), 3);
        assert!(zback
            .eval(&x)
            .unwrap()
            .bit_eq(&GridFn::zero_of(&codomain).unwrap()));
    }

    proptest! {
        #[test]
        fn homogeneity(lambda in -3.0f64..3.0, seed in 0u64..500) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let domain = SpaceDesc::Grid { d: 5 };
            let codomain = SpaceDesc::Grid { d: 3 };
            let degree = (seed % 4 + 1) as usize;
            let p = random_poly(&mut rng, degree, &domain, &codomain, 2);
            let x = GridFn::random_unit(&domain, &mut rng).unwrap();
            let lhs = p.eval(&x.scale(lambda)).unwrap();
            let rhs = p.eval(&x).unwrap().scale(lambda.powi(degree as i32));
            let err = lhs.sub(&rhs).unwrap().norm();
            prop_assert!(err <= 1e-12 * rhs.norm().max(1.0));
        }
    }
}
