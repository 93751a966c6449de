use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::exponent::visit_growth;
use super::splitting::{oseledets_directions, Branch, OrbitFrames, SplittingEstimate};
use crate::dynamics::{DynamicalSystem, TorusPoint};
use crate::error::{invalid, Result};
use crate::linalg::line_angle;

/// A supplied direction closer than this to the estimated splitting at `x`
/// is treated as that splitting direction and followed covariantly.
pub const SNAP_TOLERANCE: f64 = 1e-9;
/// Warm-up steps for the covariant direction fields.
pub const FIELD_WARMUP: u64 = 100;
/// Window used to re-estimate the splitting along an orbit for tempering.
pub const TEMPERING_SPLITTING_WINDOW: u64 = 64;
/// Rounding slack, in log space, for block-membership comparisons.
pub const LOG_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionConstant {
    pub exponent: f64,
    /// `max_{|n| ≤ N} |log ‖Dfⁿ v‖ - λn| - ε|n|`, clamped at 0.
    pub log_c: f64,
    /// The `n` attaining the maximum.
    pub worst_n: i64,
    /// Whether the direction was followed along the covariant field.
    pub covariant: bool,
}

/// Finite-window estimate of the Oseledets comparison constant `C_ε(x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PesinBlockEstimate {
    pub x: TorusPoint,
    pub eps: f64,
    pub window: u64,
    /// May be `inf` when the window is long and a direction is off the
    /// splitting; `log_c_emp` stays finite.
    pub c_emp: f64,
    pub log_c_emp: f64,
    pub block_bound: f64,
    pub member: bool,
    pub min_angle: f64,
    pub directions: Vec<DirectionConstant>,
}

/// Smallest `C ≥ 1` with
/// `C⁻¹ e^{λn - ε|n|} ≤ ‖Dfⁿ(x) v‖ ≤ C e^{λn + ε|n|}` for `|n| ≤ N` and every
/// direction of `split`, and with `∠(E_λ, E_λ') ≥ C⁻¹`.
pub fn empirical_pesin_constant(
    sys: &DynamicalSystem,
    x: &TorusPoint,
    eps: f64,
    window: u64,
    split: &SplittingEstimate,
    block_bound: f64,
) -> Result<PesinBlockEstimate> {
    if !(eps >= 0.0 && eps.is_finite()) {
        return invalid("ε must be a finite nonnegative number");
    }
    if window == 0 {
        return invalid("window N must be at least 1");
    }
    if !(block_bound > 0.0) {
        return invalid("block bound L must be positive");
    }
    if split.directions.is_empty() {
        return invalid("missing Oseledets directions");
    }
    if split.directions.iter().any(|d| d.vector.len() != sys.dim()) {
        return invalid("direction dimension does not match the system");
    }
    let x = sys.canonical(x);
    // fields are only needed when something snaps; they fail on cone points
    let frames = OrbitFrames::new(sys, &x, window, FIELD_WARMUP).ok();

    let mut directions = Vec::with_capacity(split.directions.len());
    for d in &split.directions {
        let v = d.unit();
        let branch = frames.as_ref().and_then(|f| snap(f, &v));
        let mut worst = (0.0f64, 0i64);
        let mut track = |n: i64, g: f64| {
            let excess = (g - d.exponent * n as f64).abs() - eps * n.unsigned_abs() as f64;
            if excess > worst.0 {
                worst = (excess, n);
            }
        };
        match (branch, &frames) {
            (Some(b), Some(f)) => covariant_growth(sys, f, b, window, &mut track)?,
            _ => {
                let w = window as i64;
                visit_growth(sys, &x, v.as_slice(), w, |k, g| track(k as i64, g))?;
                visit_growth(sys, &x, v.as_slice(), -w, |k, g| track(-(k as i64), g))?;
            }
        }
        directions.push(DirectionConstant {
            exponent: d.exponent,
            log_c: worst.0,
            worst_n: worst.1,
            covariant: branch.is_some(),
        });
    }

    let min_angle = split.min_angle();
    let angle_log_c = if min_angle > 0.0 { (-min_angle.ln()).max(0.0) } else { f64::INFINITY };
    let log_c_emp = directions.iter().map(|d| d.log_c).fold(angle_log_c, f64::max);
    let c_emp = log_c_emp.exp();
    Ok(PesinBlockEstimate {
        x,
        eps,
        window,
        c_emp,
        log_c_emp,
        block_bound,
        member: log_c_emp <= block_bound.ln() + LOG_SLACK,
        min_angle,
        directions,
    })
}

fn snap(frames: &OrbitFrames, v: &DVector<f64>) -> Option<Branch> {
    let i = frames.idx(0);
    [Branch::Unstable, Branch::Stable, Branch::Center]
        .into_iter()
        .find(|&b| frames.field(b).is_some_and(|f| line_angle(&f[i], v) < SNAP_TOLERANCE))
}

/// Growth of a splitting direction as a sum of one-step stretches of the
/// covariant field; avoids pushing a vector through the direction in which
/// it is numerically unstable.
fn covariant_growth<F: FnMut(i64, f64)>(
    sys: &DynamicalSystem,
    frames: &OrbitFrames,
    branch: Branch,
    window: u64,
    track: &mut F,
) -> Result<()> {
    let field = frames.field(branch).expect("snapped branch exists");
    let w = window as i64;
    let mut g = 0.0;
    for k in 0..w {
        let i = frames.idx(k);
        g += (sys.differential(&frames.points[i])? * &field[i]).norm().ln();
        track(k + 1, g);
    }
    let mut g = 0.0;
    for k in 0..w {
        let i = frames.idx(-k);
        g += (sys.inverse_differential(&frames.points[i])? * &field[i]).norm().ln();
        track(-(k + 1), g);
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TemperingRatio {
    pub t: u64,
    pub ratio: f64,
    pub inside: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TemperingReport {
    pub eps: f64,
    pub window: u64,
    pub band: (f64, f64),
    /// `C_emp(fᵗx)` for `t = 0..=T`.
    pub constants: Vec<f64>,
    pub ratios: Vec<TemperingRatio>,
    pub block_bound: f64,
    /// For each `t` with `fᵗx ∈ PB(ε, L)`: whether `fᵗ⁺¹x ∈ PB(ε, e^ε L)`.
    pub block_image_ok: bool,
}

/// Ratios `C_emp(fᵗ⁺¹x)/C_emp(fᵗx)` labelled against `[e^{-ε}, e^{ε}]`.
/// Violations are reported, not raised.
pub fn tempering_report(
    sys: &DynamicalSystem,
    x: &TorusPoint,
    eps: f64,
    window: u64,
    steps: u64,
    block_bound: f64,
) -> Result<TemperingReport> {
    if steps == 0 {
        return invalid("T must be at least 1");
    }
    sys.check_horizon(steps as i64)?;
    let mut y = sys.canonical(x);
    let mut logs = Vec::with_capacity(steps as usize + 1);
    for t in 0..=steps {
        if t > 0 {
            y = sys.step(&y);
        }
        let split = oseledets_directions(sys, &y, TEMPERING_SPLITTING_WINDOW)?;
        logs.push(empirical_pesin_constant(sys, &y, eps, window, &split, block_bound)?.log_c_emp);
    }
    let ratios: Vec<TemperingRatio> = logs
        .windows(2)
        .enumerate()
        .map(|(t, w)| {
            let log_ratio = w[1] - w[0];
            TemperingRatio { t: t as u64, ratio: log_ratio.exp(), inside: log_ratio.abs() <= eps + LOG_SLACK }
        })
        .collect();
    let log_l = block_bound.ln();
    let block_image_ok = logs.windows(2).all(|w| w[0] > log_l + LOG_SLACK || w[1] <= log_l + eps + LOG_SLACK);
    Ok(TemperingReport {
        eps,
        window,
        band: ((-eps).exp(), eps.exp()),
        constants: logs.iter().map(|l| l.exp()).collect(),
        ratios,
        block_bound,
        block_image_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycle::splitting::OseledetsDirection;
    use crate::dynamics::torus_reduce;

    const LOG_MU: f64 = 0.9624236501192069;

    fn exact(x: TorusPoint) -> SplittingEstimate {
        let dirs = vec![
            OseledetsDirection { vector: vec![1.0, 0.6180339887498949], exponent: LOG_MU },
            OseledetsDirection { vector: vec![1.0, -1.618033988749895], exponent: -LOG_MU },
        ];
        SplittingEstimate::from_directions(x, 0, dirs, 0.05).unwrap()
    }

    #[test]
    fn exact_eigendirections_give_unit_constant() {
        let cat = DynamicalSystem::cat();
        let x = torus_reduce(&[0.2, 0.7]).unwrap();
        for (eps, n) in [(0.0, 10), (0.1, 100), (0.1, 1000)] {
            let e = empirical_pesin_constant(&cat, &x, eps, n, &exact(x), 2.0).unwrap();
            assert!((e.c_emp - 1.0).abs() < 1e-12, "{e:?}");
            assert!(e.member);
            assert!(e.directions.iter().all(|d| d.covariant));
        }
    }

    #[test]
    fn perturbed_direction_has_large_constant() {
        let cat = DynamicalSystem::cat();
        let x = torus_reduce(&[0.2, 0.7]).unwrap();
        let mut s = exact(x);
        s.directions[1].vector = vec![1.0, -1.6];
        let e = empirical_pesin_constant(&cat, &x, 0.1, 100, &s, 2.0).unwrap();
        assert!(e.log_c_emp > 10.0);
        assert!(!e.member);
        assert!(!e.directions[1].covariant);
    }

    #[test]
    fn tempering_on_the_cat_map() {
        let cat = DynamicalSystem::cat();
        let x = torus_reduce(&[0.2, 0.7]).unwrap();
        let r = tempering_report(&cat, &x, 0.1, 50, 5, 1.0).unwrap();
        assert_eq!(r.ratios.len(), 5);
        assert!(r.ratios.iter().all(|t| (t.ratio - 1.0).abs() < 1e-12 && t.inside));
        assert!((r.band.0 - 0.9048374180).abs() < 1e-9 && (r.band.1 - 1.1051709181).abs() < 1e-9);
        assert!(r.block_image_ok);
    }

    #[test]
    fn rejects_bad_parameters() {
        let cat = DynamicalSystem::cat();
        let x = torus_reduce(&[0.2, 0.7]).unwrap();
        assert!(empirical_pesin_constant(&cat, &x, -0.1, 10, &exact(x), 2.0).is_err());
        assert!(empirical_pesin_constant(&cat, &x, 0.1, 0, &exact(x), 2.0).is_err());
    }
}
