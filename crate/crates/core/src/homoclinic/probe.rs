use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{PointMap, TorusPoint};
use crate::error::{invalid, Result};

pub const DEFAULT_SAMPLES_PER_SIDE: usize = 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonwanderingReport {
    pub resolution: usize,
    pub horizon: u64,
    pub samples_per_side: usize,
    pub cells: usize,
    pub nonwandering_cells: usize,
    pub fraction: f64,
    /// Largest first return time among returning cells.
    pub max_first_return: Option<u64>,
}

fn cell_of(x: &TorusPoint, res: usize) -> usize {
    x.coords().iter().fold(0, |acc, c| acc * res + ((c * res as f64) as usize).min(res - 1))
}

/// Fraction of grid cells `U` with `fⁿ(U) ∩ U ≠ ∅` for some `0 < n ≤ horizon`,
/// detected on a regular sub-grid of sample points in each cell.
///
/// A sampled detection only proves the cell recurs; a miss is evidence,
/// not proof, of wandering.
pub fn nonwandering_probe<M: PointMap>(
    map: &M,
    resolution: usize,
    horizon: u64,
    samples_per_side: usize,
) -> Result<NonwanderingReport> {
    if resolution < 8 {
        return invalid("grid resolution must be at least 8");
    }
    if horizon == 0 || samples_per_side == 0 {
        return invalid("horizon and samples per side must be positive");
    }
    let d = map.dim();
    let cells = resolution.pow(d as u32);
    let h = 1.0 / resolution as f64;
    let per_cell = samples_per_side.pow(d as u32);

    let first_returns: Vec<Option<u64>> = (0..cells)
        .into_par_iter()
        .map(|cell| {
            let mut corner = vec![0.0; d];
            let mut rest = cell;
            for c in corner.iter_mut().rev() {
                *c = (rest % resolution) as f64 * h;
                rest /= resolution;
            }
            let mut best: Option<u64> = None;
            for s in 0..per_cell {
                let mut coords = corner.clone();
                let mut rest = s;
                for c in coords.iter_mut().rev() {
                    *c += ((rest % samples_per_side) as f64 + 0.5) * h / samples_per_side as f64;
                    rest /= samples_per_side;
                }
                let mut y = TorusPoint::new(&coords).expect("cell samples are finite");
                let limit = best.map_or(horizon, |b| b - 1);
                for n in 1..=limit {
                    y = map.map_point(&y);
                    if cell_of(&y, resolution) == cell {
                        best = Some(n);
                        break;
                    }
                }
                if best == Some(1) {
                    break;
                }
            }
            best
        })
        .collect();

    let nonwandering_cells = first_returns.iter().filter(|r| r.is_some()).count();
    Ok(NonwanderingReport {
        resolution,
        horizon,
        samples_per_side,
        cells,
        nonwandering_cells,
        fraction: nonwandering_cells as f64 / cells as f64,
        max_first_return: first_returns.iter().flatten().copied().max(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{DynamicalSystem, Space};

    /// `x ↦ x/2 + 1/4` on the unit-square chart; everything drains to the
    /// centre, so only the cells touching it recur.
    struct Contraction;

    impl PointMap for Contraction {
        fn dim(&self) -> usize {
            2
        }
        fn map_point(&self, x: &TorusPoint) -> TorusPoint {
            let c: Vec<f64> = x.coords().iter().map(|v| 0.5 * v + 0.25).collect();
            TorusPoint::new(&c).unwrap()
        }
    }

    #[test]
    fn identity_returns_at_once() {
        let r = nonwandering_probe(&DynamicalSystem::identity(Space::T2), 8, 1, 2).unwrap();
        assert_eq!(r.fraction, 1.0);
        assert_eq!(r.max_first_return, Some(1));
    }

    #[test]
    fn contraction_wanders() {
        let r = nonwandering_probe(&Contraction, 32, 50, 4).unwrap();
        assert!(r.fraction < 0.1, "{r:?}");
        assert!(r.nonwandering_cells >= 1);
    }

    #[test]
    fn coarse_grid_rejected() {
        assert!(nonwandering_probe(&DynamicalSystem::cat(), 4, 10, 4).is_err());
    }
}
