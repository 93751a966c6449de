use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{DynamicalSystem, Space, TorusPoint};
use crate::error::{invalid, Result};
use crate::rng::member_rng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReturnRecord {
    pub start: TorusPoint,
    pub return_times: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceReport {
    pub center: TorusPoint,
    pub radius: f64,
    pub horizon: u64,
    pub records: Vec<ReturnRecord>,
    pub returned_fraction: f64,
    /// Mean first return time over the starts that returned.
    pub mean_first_return: Option<f64>,
    /// Kac's prediction `1/m(ball)`, when the ball measure has a closed form.
    pub kac_prediction: Option<f64>,
}

/// Reference measure of the ball, where it has an elementary closed form.
pub fn ball_measure(sys: &DynamicalSystem, center: &TorusPoint, r: f64) -> Option<f64> {
    if r > 0.5 {
        return None;
    }
    match sys.space() {
        Space::T2 => Some(PI * r * r),
        Space::T3 => Some(4.0 / 3.0 * PI * r * r * r),
        Space::S2 => {
            // the preimage is the union of the discs at c and -c
            let c = sys.canonical(center);
            let sep = c.distance(&c.negated());
            if sep == 0.0 {
                Some(PI * r * r)
            } else if sep >= 2.0 * r {
                Some(2.0 * PI * r * r)
            } else {
                None
            }
        }
    }
}

/// Samples starts uniformly in the ball and records every return to it up
/// to `horizon`.
pub fn recurrence_statistics(
    sys: &DynamicalSystem,
    center: &TorusPoint,
    radius: f64,
    ensemble: usize,
    horizon: u64,
    seed: u64,
) -> Result<RecurrenceReport> {
    if !(radius > 0.0 && radius.is_finite()) {
        return invalid("ball radius must be positive");
    }
    if ensemble == 0 {
        return invalid("ensemble must be nonempty");
    }
    if center.dim() != sys.dim() {
        return invalid("ball centre dimension does not match the system");
    }
    sys.check_horizon(horizon as i64)?;
    let c = sys.canonical(center);
    let d = sys.dim();
    let r = radius.min(0.5 * (d as f64).sqrt());
    let records: Vec<ReturnRecord> = (0..ensemble as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = member_rng(seed, i);
            // rejection sampling from the bounding cube of the lift at c
            let start = loop {
                let offset: Vec<f64> = (0..d).map(|_| rng.random_range(-r..r)).collect();
                if offset.iter().map(|o| o * o).sum::<f64>() < r * r {
                    break sys.canonical(&c.translated(&offset));
                }
            };
            let mut y = start;
            let mut return_times = Vec::new();
            for k in 1..=horizon {
                y = sys.step(&y);
                if sys.distance(&y, &c) < radius {
                    return_times.push(k);
                }
            }
            ReturnRecord { start, return_times }
        })
        .collect();
    let firsts: Vec<u64> = records.iter().filter_map(|r| r.return_times.first().copied()).collect();
    let returned_fraction = firsts.len() as f64 / ensemble as f64;
    let mean_first_return = (!firsts.is_empty()).then(|| firsts.iter().sum::<u64>() as f64 / firsts.len() as f64);
    Ok(RecurrenceReport {
        center: c,
        radius,
        horizon,
        records,
        returned_fraction,
        mean_first_return,
        kac_prediction: ball_measure(sys, &c, radius).map(|m| 1.0 / m),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_returns_immediately() {
        let id = DynamicalSystem::identity(Space::T2);
        let r = recurrence_statistics(&id, &TorusPoint::new(&[0.3, 0.3]).unwrap(), 0.05, 20, 3, 1).unwrap();
        assert_eq!(r.returned_fraction, 1.0);
        assert!(r.records.iter().all(|rec| rec.return_times == vec![1, 2, 3]));
    }

    #[test]
    fn ball_measures() {
        let cat = DynamicalSystem::cat();
        let o = TorusPoint::origin(2);
        assert!((1.0 / ball_measure(&cat, &o, 0.1).unwrap() - 31.830988618).abs() < 1e-8);
        let s2 = DynamicalSystem::sphere_quotient();
        assert!((ball_measure(&s2, &o, 0.1).unwrap() - PI * 0.01).abs() < 1e-15);
        let p = TorusPoint::new(&[0.25, 0.1]).unwrap();
        assert!((ball_measure(&s2, &p, 0.1).unwrap() - 2.0 * PI * 0.01).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_radius() {
        let cat = DynamicalSystem::cat();
        assert!(recurrence_statistics(&cat, &TorusPoint::origin(2), 0.0, 10, 10, 0).is_err());
    }
}
