//! Functions on a finite uniform grid under the sup norm.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{check_finite, Element, ElementJson, ElementMeta, SpaceDesc, SpaceError, WireElement};

/// Values `x(t_i)` at the grid points `t_i = i/(d-1)`, `i = 0..d-1`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFn {
    samples: Vec<f64>,
}

impl GridFn {
    pub fn new(samples: Vec<f64>) -> Result<Self, SpaceError> {
        if samples.len() < 2 {
            return Err(SpaceError::GridTooShort { d: samples.len() });
        }
        check_finite(&samples)?;
        Ok(Self { samples })
    }

    /// Samples `f` at the grid points of a `d`-point grid.
    pub fn from_fn(d: usize, f: impl Fn(f64) -> f64) -> Result<Self, SpaceError> {
        let samples = (0..d).map(|i| f(grid_point(i, d))).collect();
        Self::new(samples)
    }

    pub fn constant(value: f64, d: usize) -> Result<Self, SpaceError> {
        Self::new(vec![value; d])
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sup_norm(&self) -> f64 {
        self.samples.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Applies a scalar map at every grid point. This is exact in the
    /// function-space model: the grid *is* the underlying compact space.
    pub fn pointwise_apply(&self, g: impl Fn(f64) -> f64) -> GridFn {
        GridFn {
            samples: self.samples.iter().map(|&s| g(s)).collect(),
        }
    }

    /// Composite Simpson approximation of the integral over `[0, 1]`,
    /// reading the samples as values of a function on the unit interval.
    /// Exact for cubics sampled on the grid; needs an odd point count.
    pub fn quadrature(&self) -> Result<f64, SpaceError> {
        let d = self.samples.len();
        if d % 2 == 0 {
            return Err(SpaceError::EvenGrid { d });
        }
        let h = 1.0 / (d - 1) as f64;
        let mut sum = KahanSum::default();
        for (i, &v) in self.samples.iter().enumerate() {
            let w = if i == 0 || i == d - 1 {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            sum.add(w * v);
        }
        Ok(sum.value() * h / 3.0)
    }
}

pub(crate) fn grid_point(i: usize, d: usize) -> f64 {
    i as f64 / (d - 1) as f64
}

/// Compensated accumulator; keeps quadrature error near one ulp so the
/// 1e-14-level agreement claims don't ride on summation order.
#[derive(Default)]
struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    fn add(&mut self, v: f64) {
        let y = v - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum
    }
}

impl Element for GridFn {
    fn space(&self) -> SpaceDesc {
        SpaceDesc::Grid {
            d: self.samples.len(),
        }
    }

    fn coords(&self) -> &[f64] {
        &self.samples
    }

    fn with_coords(&self, coords: Vec<f64>) -> Self {
        assert_eq!(coords.len(), self.samples.len(), "grid rebuild length mismatch");
        GridFn { samples: coords }
    }

    fn norm(&self) -> f64 {
        self.sup_norm()
    }

    fn zero_of(desc: &SpaceDesc) -> Result<Self, SpaceError> {
        match *desc {
            SpaceDesc::Grid { d } => GridFn::constant(0.0, d),
            ref other => Err(SpaceError::WrongSpace {
                expected: "grid",
                got: other.clone(),
            }),
        }
    }

    fn random_unit(desc: &SpaceDesc, rng: &mut ChaCha8Rng) -> Result<Self, SpaceError> {
        match *desc {
            SpaceDesc::Grid { d } => {
                let mut samples: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
                let m = samples.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
                for s in &mut samples {
                    *s /= m;
                }
                GridFn::new(samples)
            }
            ref other => Err(SpaceError::WrongSpace {
                expected: "grid",
                got: other.clone(),
            }),
        }
    }
}

impl WireElement for GridFn {
    fn to_wire(&self) -> ElementJson {
        ElementJson {
            kind: "grid".into(),
            data: self.samples.clone(),
            meta: ElementMeta::default(),
        }
    }

    fn from_wire(json: &ElementJson) -> Result<Self, SpaceError> {
        if json.kind != "grid" {
            return Err(SpaceError::Wire(format!(
                "expected kind \"grid\", got {:?}",
                json.kind
            )));
        }
        GridFn::new(json.data.clone())
    }
}
