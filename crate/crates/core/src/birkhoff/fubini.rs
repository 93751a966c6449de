use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{DynamicalSystem, Space};
use crate::error::{invalid, LabError, Result};
use crate::rng::member_rng;

/// Samples are drawn in this many fixed blocks, one RNG stream each, and the
/// block sums are folded in order.
const BLOCKS: u64 = 64;

/// A measurable partition of T².
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PartitionDescriptor {
    /// Atoms `{x₁} × T`.
    VerticalCircles,
    /// Inside the box `corner + [0, size]²` each chord of the unstable
    /// foliation is cut into consecutive segments of the given arclength,
    /// starting where the chord enters the box; outside the box atoms are
    /// points.
    UnstableSegments { corner: [f64; 2], size: f64, length: f64 },
}

impl PartitionDescriptor {
    pub fn validate(&self) -> Result<()> {
        if let PartitionDescriptor::UnstableSegments { corner, size, length } = self {
            if !(*length > 0.0 && length.is_finite()) || !(*size > 0.0) {
                return Err(LabError::DegenerateSegment(format!("segment length {length}, box size {size}")));
            }
            if corner.iter().any(|c| *c < 0.0 || c + size > 1.0) {
                return invalid("box must lie inside the unit square");
            }
        }
        Ok(())
    }
}

/// A test set given in the fundamental domain `[0, 1]²`, not wrapping.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case")]
pub enum TestSet {
    Rectangle { lo: [f64; 2], hi: [f64; 2] },
    Disc { center: [f64; 2], radius: f64 },
}

impl TestSet {
    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            TestSet::Rectangle { lo, hi } => (0..2).all(|i| 0.0 <= lo[i] && lo[i] < hi[i] && hi[i] <= 1.0),
            TestSet::Disc { center, radius } => {
                *radius > 0.0 && center.iter().all(|c| c - radius >= 0.0 && c + radius <= 1.0)
            }
        };
        if !ok {
            return invalid("test set must be a nonempty rectangle or disc inside [0,1]^2");
        }
        Ok(())
    }

    fn contains(&self, p: [f64; 2]) -> bool {
        match self {
            TestSet::Rectangle { lo, hi } => (0..2).all(|i| lo[i] <= p[i] && p[i] < hi[i]),
            TestSet::Disc { center, radius } => (p[0] - center[0]).hypot(p[1] - center[1]) < *radius,
        }
    }

    /// Length of `{t ∈ [a, b] : p + t u ∈ B}` for a unit `u`.
    fn chord_length(&self, p: [f64; 2], u: [f64; 2], a: f64, b: f64) -> f64 {
        let (lo, hi) = match self {
            TestSet::Rectangle { lo, hi } => match clip(p, u, *lo, *hi) {
                Some(t) => t,
                None => return 0.0,
            },
            TestSet::Disc { center, radius } => {
                let w = [p[0] - center[0], p[1] - center[1]];
                let wu = w[0] * u[0] + w[1] * u[1];
                let disc = wu * wu - (w[0] * w[0] + w[1] * w[1] - radius * radius);
                if disc <= 0.0 {
                    return 0.0;
                }
                (-wu - disc.sqrt(), -wu + disc.sqrt())
            }
        };
        (hi.min(b) - lo.max(a)).max(0.0)
    }
}

/// Parameter interval of `p + t u` inside the rectangle `[lo, hi]`.
fn clip(p: [f64; 2], u: [f64; 2], lo: [f64; 2], hi: [f64; 2]) -> Option<(f64, f64)> {
    let (mut t0, mut t1) = (f64::NEG_INFINITY, f64::INFINITY);
    for i in 0..2 {
        if u[i] == 0.0 {
            if p[i] < lo[i] || p[i] > hi[i] {
                return None;
            }
        } else {
            let a = (lo[i] - p[i]) / u[i];
            let b = (hi[i] - p[i]) / u[i];
            t0 = t0.max(a.min(b));
            t1 = t1.min(a.max(b));
        }
    }
    (t0 < t1).then_some((t0, t1))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FubiniReport {
    pub partition: PartitionDescriptor,
    pub test_set: TestSet,
    pub samples: u64,
    pub seed: u64,
    /// Monte-Carlo `m(B)`.
    pub lhs: f64,
    /// Monte-Carlo `∫ m^ξ_x(B ∩ ξ(x)) dm(x)`.
    pub rhs: f64,
    pub gap: f64,
    /// Three-sigma errors; the gap error uses the paired differences.
    pub lhs_error: f64,
    pub rhs_error: f64,
    pub gap_error: f64,
    pub consistent: bool,
}

#[derive(Clone, Copy, Default)]
struct Moments {
    lhs: f64,
    lhs2: f64,
    rhs: f64,
    rhs2: f64,
    diff: f64,
    diff2: f64,
}

/// Both sides of `m(B) = ∫ m^ξ_x(B ∩ ξ(x)) dm(x)` from the same samples.
pub fn conditional_fubini_check(
    sys: &DynamicalSystem,
    partition: &PartitionDescriptor,
    test_set: &TestSet,
    samples: u64,
    seed: u64,
) -> Result<FubiniReport> {
    partition.validate()?;
    test_set.validate()?;
    if samples < 2 {
        return invalid("need at least two samples");
    }
    if sys.space() != Space::T2 {
        return invalid("partitions are defined on T^2");
    }
    let unstable = match partition {
        PartitionDescriptor::VerticalCircles => [0.0, 1.0],
        PartitionDescriptor::UnstableSegments { .. } => sys
            .hyperbolic_matrix()
            .and_then(|m| m.hyperbolic_eigen())
            .ok_or_else(|| LabError::NonHyperbolic(sys.name().to_string()))?
            .unit_unstable(),
    };
    let conditional = |p: [f64; 2]| -> f64 {
        match partition {
            PartitionDescriptor::VerticalCircles => test_set.chord_length(p, unstable, -p[1], 1.0 - p[1]),
            PartitionDescriptor::UnstableSegments { corner, size, length } => {
                let hi = [corner[0] + size, corner[1] + size];
                let inside = (0..2).all(|i| corner[i] <= p[i] && p[i] < hi[i]);
                let atom = inside.then(|| clip(p, unstable, *corner, hi)).flatten().and_then(|(t_in, t_out)| {
                    let a = t_in + ((-t_in) / length).floor() * length;
                    let b = (a + length).min(t_out);
                    (b > a).then_some((a, b))
                });
                match atom {
                    Some((a, b)) => test_set.chord_length(p, unstable, a, b) / (b - a),
                    None => f64::from(u8::from(test_set.contains(p))),
                }
            }
        }
    };

    let blocks: Vec<Moments> = (0..BLOCKS)
        .into_par_iter()
        .map(|b| {
            let count = samples / BLOCKS + u64::from(b < samples % BLOCKS);
            let mut rng = member_rng(seed, b);
            let mut m = Moments::default();
            for _ in 0..count {
                let p = [rng.random::<f64>(), rng.random::<f64>()];
                let l = f64::from(u8::from(test_set.contains(p)));
                let r = conditional(p);
                m.lhs += l;
                m.lhs2 += l * l;
                m.rhs += r;
                m.rhs2 += r * r;
                m.diff += l - r;
                m.diff2 += (l - r) * (l - r);
            }
            m
        })
        .collect();
    let total = blocks.iter().fold(Moments::default(), |a, m| Moments {
        lhs: a.lhs + m.lhs,
        lhs2: a.lhs2 + m.lhs2,
        rhs: a.rhs + m.rhs,
        rhs2: a.rhs2 + m.rhs2,
        diff: a.diff + m.diff,
        diff2: a.diff2 + m.diff2,
    });
    let s = samples as f64;
    let three_sigma = |sum: f64, sum2: f64| {
        let mean = sum / s;
        let var = ((sum2 / s - mean * mean) * s / (s - 1.0)).max(0.0);
        3.0 * (var / s).sqrt()
    };
    let lhs = total.lhs / s;
    let rhs = total.rhs / s;
    let gap = (lhs - rhs).abs();
    let gap_error = three_sigma(total.diff, total.diff2);
    Ok(FubiniReport {
        partition: partition.clone(),
        test_set: test_set.clone(),
        samples,
        seed,
        lhs,
        rhs,
        gap,
        lhs_error: three_sigma(total.lhs, total.lhs2),
        rhs_error: three_sigma(total.rhs, total.rhs2),
        gap_error,
        consistent: gap <= gap_error + 1e-15,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quarter() -> TestSet {
        TestSet::Rectangle { lo: [0.0, 0.0], hi: [0.5, 0.5] }
    }

    #[test]
    fn full_torus_is_exact() {
        let cat = DynamicalSystem::cat();
        let full = TestSet::Rectangle { lo: [0.0, 0.0], hi: [1.0, 1.0] };
        let r = conditional_fubini_check(&cat, &PartitionDescriptor::VerticalCircles, &full, 1000, 1).unwrap();
        assert_eq!(r.lhs, 1.0);
        assert!((r.rhs - 1.0).abs() < 1e-12);
    }

    #[test]
    fn vertical_circles_on_a_quarter() {
        let cat = DynamicalSystem::cat();
        let r = conditional_fubini_check(&cat, &PartitionDescriptor::VerticalCircles, &quarter(), 100_000, 7).unwrap();
        assert!((r.lhs - 0.25).abs() < r.lhs_error);
        assert!((r.rhs - 0.25).abs() < r.rhs_error);
        assert!(r.consistent);
    }

    #[test]
    fn zero_length_atoms_rejected() {
        let cat = DynamicalSystem::cat();
        let p = PartitionDescriptor::UnstableSegments { corner: [0.3, 0.3], size: 0.3, length: 0.0 };
        let err = conditional_fubini_check(&cat, &p, &quarter(), 100, 1).unwrap_err();
        assert!(matches!(err, LabError::DegenerateSegment(_)));
    }

    #[test]
    fn chord_lengths() {
        let d = TestSet::Disc { center: [0.5, 0.5], radius: 0.1 };
        assert!((d.chord_length([0.5, 0.2], [0.0, 1.0], -1.0, 1.0) - 0.2).abs() < 1e-12);
        assert!((d.chord_length([0.5, 0.2], [0.0, 1.0], 0.0, 0.35) - 0.15).abs() < 1e-12);
        assert_eq!(d.chord_length([0.2, 0.2], [0.0, 1.0], -1.0, 1.0), 0.0);
    }

    #[test]
    fn deterministic_given_seed() {
        let cat = DynamicalSystem::cat();
        let p = PartitionDescriptor::UnstableSegments { corner: [0.3, 0.3], size: 0.3, length: 0.1 };
        let d = TestSet::Disc { center: [0.45, 0.45], radius: 0.1 };
        let a = conditional_fubini_check(&cat, &p, &d, 20_000, 3).unwrap();
        let b = conditional_fubini_check(&cat, &p, &d, 20_000, 3).unwrap();
        assert_eq!(a, b);
        assert!(a.consistent, "{a:?}");
    }
}
