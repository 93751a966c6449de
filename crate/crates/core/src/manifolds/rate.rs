use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dynamics::{wrap_half, DynamicalSystem, Space, TorusPoint};
use crate::error::{invalid, LabError, Result};

/// Distances at or above this are treated as saturated.
pub const SATURATION: f64 = 0.1;
/// Distances below this are not resolvable in double precision.
pub const RESOLVABLE: f64 = 1e-14;
/// Rates below this count as exponential approach.
pub const MEMBER_RATE: f64 = -0.1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    /// Least-squares slope of `log d(fⁿx, fⁿy)` in `n`.
    pub rate: f64,
    pub member: bool,
    /// Steps `0..=fitted_steps` entered the fit.
    pub fitted_steps: u64,
    pub log_distances: Vec<f64>,
    pub stopped_by: StopReason,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    Window,
    Saturated,
    Unresolvable,
}

/// Finite-`N` test of `limsup (1/n) log d(fⁿx, fⁿy) < 0`, i.e. whether `y`
/// lies on the Pesin stable manifold of `x`.
///
/// The separation is carried as a lift displacement rather than as the
/// difference of two rounded orbits. Rounding of the inputs still matters:
/// a distance counts as resolvable only while it exceeds both `1e-14` and
/// the input rounding error amplified by `‖Dfⁿ‖`.
pub fn pesin_rate_membership(sys: &DynamicalSystem, x: &TorusPoint, y: &TorusPoint, n: u64) -> Result<RateEstimate> {
    if n == 0 {
        return invalid("N must be at least 1");
    }
    if x.dim() != sys.dim() || y.dim() != sys.dim() {
        return invalid("point dimension does not match the system");
    }
    sys.check_horizon(n as i64)?;
    let lift = sys.lift_system();
    let mut base = sys.canonical(x);
    // pick the lift of y closest to x
    let mut delta = base.displacement_to(y);
    if sys.space() == Space::S2 {
        let other = base.displacement_to(&y.negated());
        if norm(&other) < norm(&delta) {
            delta = other;
        }
    }
    let distance = |base: &TorusPoint, delta: &[f64]| -> f64 {
        let direct = norm(delta);
        if sys.space() == Space::S2 {
            // distance from base to -(base + delta)
            let mirrored: Vec<f64> = base.coords().iter().zip(delta).map(|(b, d)| wrap_half(-2.0 * b - d)).collect();
            direct.min(norm(&mirrored))
        } else {
            direct
        }
    };
    let d0 = distance(&base, &delta);
    if !(d0 >= RESOLVABLE) {
        return Err(LabError::NotResolvable(format!("initial distance {d0:e}")));
    }
    if d0 >= SATURATION {
        return Err(LabError::NotResolvable(format!("initial distance {d0} is already saturated")));
    }
    let mut logs = vec![d0.ln()];
    let mut stopped_by = StopReason::Window;
    let mut power = DMatrix::<f64>::identity(sys.dim(), sys.dim());
    for _ in 0..n {
        power = lift.differential(&base)? * power;
        delta = lift.displacement_step(&base, &delta, false);
        base = lift.step(&base);
        let d = distance(&base, &delta);
        if d < f64::EPSILON * power.norm() {
            stopped_by = StopReason::Unresolvable;
            break;
        }
        if d >= SATURATION {
            stopped_by = StopReason::Saturated;
            break;
        }
        if d < RESOLVABLE {
            stopped_by = StopReason::Unresolvable;
            break;
        }
        logs.push(d.ln());
    }
    if logs.len() < 2 {
        return Err(LabError::NotResolvable("distance saturated after one step".into()));
    }
    let rate = slope(&logs);
    Ok(RateEstimate {
        rate,
        member: rate < MEMBER_RATE,
        fitted_steps: logs.len() as u64 - 1,
        log_distances: logs,
        stopped_by,
    })
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

/// Least-squares slope of `ys` against `0, 1, 2, …`.
fn slope(ys: &[f64]) -> f64 {
    let n = ys.len() as f64;
    let mx = (n - 1.0) / 2.0;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, y) in ys.iter().enumerate() {
        let dx = i as f64 - mx;
        sxy += dx * (y - my);
        sxx += dx * dx;
    }
    sxy / sxx
}
