use serde::{Deserialize, Serialize};

use crate::dynamics::{DynamicalSystem, Observable, TorusPoint};
use crate::error::{invalid, Result};

pub const DEFAULT_FIRST_CHECKPOINT: u64 = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Backward,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub n: u64,
    pub average: f64,
}

/// Partial averages `(1/n) Σ_{k<n} φ(f^{±k} x)` at `n₀, 2n₀, 4n₀, …` and `N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BirkhoffSeries {
    pub observable: String,
    pub direction: Direction,
    pub x: TorusPoint,
    pub checkpoints: Vec<Checkpoint>,
    pub value: f64,
}

fn checkpoints(n0: u64, n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut c = n0.max(1);
    while c < n {
        out.push(c);
        c = c.saturating_mul(2);
    }
    out.push(n);
    out
}

pub fn birkhoff_average(
    sys: &DynamicalSystem,
    phi: &Observable,
    x: &TorusPoint,
    n: u64,
    direction: Direction,
) -> Result<BirkhoffSeries> {
    birkhoff_average_with(sys, phi, x, n, direction, DEFAULT_FIRST_CHECKPOINT)
}

pub fn birkhoff_average_with(
    sys: &DynamicalSystem,
    phi: &Observable,
    x: &TorusPoint,
    n: u64,
    direction: Direction,
    first_checkpoint: u64,
) -> Result<BirkhoffSeries> {
    if n == 0 {
        return invalid("N must be at least 1");
    }
    check_observable(sys, phi)?;
    sys.check_horizon(n as i64)?;
    let marks = checkpoints(first_checkpoint, n);
    let mut out = Vec::with_capacity(marks.len());
    let mut next = 0;
    let mut y = sys.canonical(x);
    let mut sum = 0.0;
    for k in 1..=n {
        sum += phi.eval(&y);
        if k == marks[next] {
            out.push(Checkpoint { n: k, average: sum / k as f64 });
            next += 1;
        }
        if k < n {
            y = match direction {
                Direction::Forward => sys.step(&y),
                Direction::Backward => sys.step_back(&y),
            };
        }
    }
    let value = out.last().map(|c| c.average).unwrap_or(f64::NAN);
    Ok(BirkhoffSeries { observable: phi.id(), direction, x: sys.canonical(x), checkpoints: out, value })
}

/// `|φ⁺_N(x) - φ⁻_N(x)|`.
pub fn forward_backward_gap(sys: &DynamicalSystem, phi: &Observable, x: &TorusPoint, n: u64) -> Result<f64> {
    let f = birkhoff_average(sys, phi, x, n, Direction::Forward)?;
    let b = birkhoff_average(sys, phi, x, n, Direction::Backward)?;
    Ok((f.value - b.value).abs())
}

/// Integral of `φ` against the system's reference measure.
pub fn space_average(sys: &DynamicalSystem, phi: &Observable) -> Result<f64> {
    check_observable(sys, phi)?;
    Ok(phi.space_average())
}

pub(crate) fn check_observable(sys: &DynamicalSystem, phi: &Observable) -> Result<()> {
    if phi.space() != sys.space() {
        return invalid(format!("observable {} is defined on {:?}, not on {:?}", phi.id(), phi.space(), sys.space()));
    }
    Ok(())
}

/// Forward sums of every observable in `family` along one orbit, divided by `n`.
pub(crate) fn orbit_averages(sys: &DynamicalSystem, family: &[Observable], x: &TorusPoint, n: u64) -> Vec<f64> {
    let mut sums = vec![0.0; family.len()];
    let mut y = sys.canonical(x);
    for k in 0..n {
        for (s, phi) in sums.iter_mut().zip(family) {
            *s += phi.eval(&y);
        }
        if k + 1 < n {
            y = sys.step(&y);
        }
    }
    sums.iter().map(|s| s / n as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{torus_reduce, Space};

    #[test]
    fn checkpoint_layout() {
        assert_eq!(checkpoints(1000, 5000), vec![1000, 2000, 4000, 5000]);
        assert_eq!(checkpoints(1000, 4000), vec![1000, 2000, 4000]);
        assert_eq!(checkpoints(1000, 10), vec![10]);
    }

    #[test]
    fn constant_observable_averages_to_one() {
        let cat = DynamicalSystem::cat();
        let one = Observable::cosine(&[0, 0], Space::T2).unwrap();
        let s = birkhoff_average(&cat, &one, &torus_reduce(&[0.3, 0.4]).unwrap(), 5000, Direction::Forward).unwrap();
        assert!(s.checkpoints.iter().all(|c| c.average == 1.0));
    }

    #[test]
    fn invariant_coordinate_on_product() {
        let s = DynamicalSystem::cat_x_id();
        let phi = Observable::cosine(&[0, 0, 1], Space::T3).unwrap();
        let x = torus_reduce(&[0.3, 0.4, 0.0]).unwrap();
        let b = birkhoff_average(&s, &phi, &x, 3000, Direction::Backward).unwrap();
        assert!(b.checkpoints.iter().all(|c| c.average == 1.0));
    }

    #[test]
    fn fixed_point_gap_is_zero() {
        let cat = DynamicalSystem::cat();
        let phi = Observable::sine(&[1, 1], Space::T2).unwrap();
        assert_eq!(forward_backward_gap(&cat, &phi, &TorusPoint::origin(2), 100).unwrap(), 0.0);
    }

    #[test]
    fn space_average_rejects_foreign_observable() {
        let cat = DynamicalSystem::cat();
        assert!(space_average(&cat, &Observable::cosine(&[1, 0, 0], Space::T3).unwrap()).is_err());
        let s2 = DynamicalSystem::sphere_quotient();
        assert_eq!(space_average(&s2, &Observable::cosine(&[1, 1], Space::S2).unwrap()).unwrap(), 0.0);
    }
}
