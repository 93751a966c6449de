use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::splitting::{Branch, OrbitFrames};
use crate::dynamics::{DynamicalSystem, TorusPoint};
use crate::error::{invalid, Result};
use crate::linalg::{orthonormal_basis, to_unit};

/// A bundle sampled along an orbit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BundleField {
    /// The same subspace at every point, given by spanning vectors.
    Constant(Vec<Vec<f64>>),
    /// An estimated Oseledets direction field.
    Estimated(Branch),
}

impl BundleField {
    pub fn constant(vectors: &[&[f64]]) -> Self {
        BundleField::Constant(vectors.iter().map(|v| v.to_vec()).collect())
    }

    fn label(&self) -> String {
        match self {
            BundleField::Constant(v) => format!("span{v:?}"),
            BundleField::Estimated(b) => format!("{b:?}").to_lowercase(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DominationReport {
    pub e: String,
    pub f: String,
    pub n: u64,
    /// `max_{unit v ∈ E} ‖Df v‖ / min_{unit w ∈ F} ‖Df w‖` at each orbit point.
    pub ratios: Vec<f64>,
    pub worst_ratio: f64,
    pub dominated: bool,
}

/// Checks `‖Df(x) v_E‖ < ‖Df(x) v_F‖` on unit vectors along `x, f(x), …, fⁿ⁻¹(x)`.
pub fn dominated_splitting_check(
    sys: &DynamicalSystem,
    x: &TorusPoint,
    e: &BundleField,
    f: &BundleField,
    n: u64,
) -> Result<DominationReport> {
    if n == 0 {
        return invalid("orbit length must be at least 1");
    }
    sys.check_horizon(n as i64)?;
    let needs_frames = matches!(e, BundleField::Estimated(_)) || matches!(f, BundleField::Estimated(_));
    let frames = if needs_frames {
        Some(OrbitFrames::new(sys, x, n, super::pesin_block::FIELD_WARMUP)?)
    } else {
        None
    };
    let basis = |field: &BundleField, k: usize| -> Result<DMatrix<f64>> {
        match field {
            BundleField::Constant(vs) => {
                if vs.is_empty() {
                    return invalid("empty bundle");
                }
                let units = vs
                    .iter()
                    .map(|v| {
                        if v.len() != sys.dim() {
                            return invalid("bundle vector dimension does not match the system");
                        }
                        to_unit(v)
                    })
                    .collect::<Result<Vec<_>>>()?;
                orthonormal_basis(&units)
            }
            BundleField::Estimated(b) => {
                let fr = frames.as_ref().expect("frames built for estimated fields");
                match fr.field(*b) {
                    Some(v) => Ok(DMatrix::from_columns(&[v[fr.idx(k as i64)].clone()])),
                    None => invalid("no centre direction in dimension 2"),
                }
            }
        }
    };

    let mut y = sys.canonical(x);
    let mut ratios = Vec::with_capacity(n as usize);
    for k in 0..n as usize {
        let df = sys.differential(&y)?;
        let se = (&df * basis(e, k)?).singular_values();
        let sf = (&df * basis(f, k)?).singular_values();
        let top = se.iter().copied().fold(0.0, f64::max);
        let bottom = sf.iter().copied().fold(f64::INFINITY, f64::min);
        ratios.push(top / bottom);
        y = sys.step(&y);
    }
    let worst_ratio = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(DominationReport { e: e.label(), f: f.label(), n, ratios, worst_ratio, dominated: worst_ratio < 1.0 })
}
