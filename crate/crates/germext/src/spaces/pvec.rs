//! Finite l_p vectors.
//!
//! The space accepts any integer `p >= 1`; evenness matters only to the bump
//! constructions (for even `p` the map `x -> sum x_i^p` is a polynomial,
//! hence C-infinity), and those enforce it themselves.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{
    check_finite, scaled_power_norm, Element, ElementJson, ElementMeta, SpaceDesc, SpaceError,
    WireElement,
};

#[derive(Clone, Debug, PartialEq)]
pub struct PVector {
    entries: Vec<f64>,
    p: u32,
}

impl PVector {
    pub fn new(entries: Vec<f64>, p: u32) -> Result<Self, SpaceError> {
        if p == 0 {
            return Err(SpaceError::BadP { p });
        }
        if entries.is_empty() {
            return Err(SpaceError::EmptyPvec);
        }
        check_finite(&entries)?;
        Ok(Self { entries, p })
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn p_norm(&self) -> f64 {
        if self.p == 1 {
            self.entries.iter().map(|v| v.abs()).sum()
        } else {
            scaled_power_norm(&self.entries, self.p as f64)
        }
    }
}

impl Element for PVector {
    fn space(&self) -> SpaceDesc {
        SpaceDesc::Pvec {
            d: self.entries.len(),
            p: self.p,
        }
    }

    fn coords(&self) -> &[f64] {
        &self.entries
    }

    fn with_coords(&self, coords: Vec<f64>) -> Self {
        assert_eq!(coords.len(), self.entries.len(), "pvec rebuild length mismatch");
        PVector {
            entries: coords,
            p: self.p,
        }
    }

    fn norm(&self) -> f64 {
        self.p_norm()
    }

    fn zero_of(desc: &SpaceDesc) -> Result<Self, SpaceError> {
        match *desc {
            SpaceDesc::Pvec { d, p } => PVector::new(vec![0.0; d], p),
            ref other => Err(SpaceError::WrongSpace {
                expected: "pvec",
                got: other.clone(),
            }),
        }
    }

    fn random_unit(desc: &SpaceDesc, rng: &mut ChaCha8Rng) -> Result<Self, SpaceError> {
        match *desc {
            SpaceDesc::Pvec { d, p } => {
                let entries: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
                let x = PVector::new(entries, p)?;
                let norm = x.p_norm();
                Ok(x.scale(norm.recip()))
            }
            ref other => Err(SpaceError::WrongSpace {
                expected: "pvec",
                got: other.clone(),
            }),
        }
    }
}

impl WireElement for PVector {
    fn to_wire(&self) -> ElementJson {
        ElementJson {
            kind: "pvec".into(),
            data: self.entries.clone(),
            meta: ElementMeta {
                order: None,
                p: Some(self.p),
            },
        }
    }

    fn from_wire(json: &ElementJson) -> Result<Self, SpaceError> {
        if json.kind != "pvec" {
            return Err(SpaceError::Wire(format!(
                "expected kind \"pvec\", got {:?}",
                json.kind
            )));
        }
        let p = json
            .meta
            .p
            .ok_or_else(|| SpaceError::Wire("pvec element needs meta.p".into()))?;
        PVector::new(json.data.clone(), p)
    }
}
