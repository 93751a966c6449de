use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::dynamics::{DynamicalSystem, TorusPoint};
use crate::error::{invalid, Result};

const RENORM_HIGH: f64 = 1e150;
const RENORM_LOW: f64 = 1e-150;

/// `log ‖Df^n(x) v‖` for `n ≥ 0`, or `log ‖Df^{-|n|}(x) v‖` for `n < 0`.
///
/// The vector is not normalised first. The running vector is rescaled
/// whenever its norm leaves `[1e-150, 1e150]` and the scale is accumulated
/// in log space.
pub fn log_growth(sys: &DynamicalSystem, x: &TorusPoint, v: &[f64], n: i64) -> Result<f64> {
    let mut acc = 0.0;
    visit_growth(sys, x, v, n, |_, log_norm| acc = log_norm)?;
    Ok(acc)
}

/// Walks `k = 1..=|n|` calling `visit(k, log ‖Df^{±k}(x) v‖)`.
pub(crate) fn visit_growth<F: FnMut(u64, f64)>(
    sys: &DynamicalSystem,
    x: &TorusPoint,
    v: &[f64],
    n: i64,
    mut visit: F,
) -> Result<()> {
    if v.len() != sys.dim() {
        return invalid(format!("tangent vector of length {} on a {}-dimensional system", v.len(), sys.dim()));
    }
    let mut w = DVector::from_column_slice(v);
    let n0 = w.norm();
    if !(n0 > 0.0 && n0.is_finite()) {
        return invalid("tangent vector must be nonzero and finite");
    }
    sys.check_horizon(n)?;
    let backward = n < 0;
    let mut y = sys.canonical(x);
    let mut scale = 0.0;
    for k in 1..=n.unsigned_abs() {
        if backward {
            w = sys.inverse_differential(&y)? * w;
            y = sys.step_back(&y);
        } else {
            w = sys.differential(&y)? * w;
            y = sys.step(&y);
        }
        let norm = w.norm();
        visit(k, scale + norm.ln());
        if !(RENORM_LOW..=RENORM_HIGH).contains(&norm) {
            scale += norm.ln();
            w /= norm;
        }
    }
    Ok(())
}

/// Finite-time Lyapunov exponent `(1/n) log ‖Df^n(x) v̂‖` with `v̂ = v/‖v‖`.
pub fn finite_time_exponent(sys: &DynamicalSystem, x: &TorusPoint, v: &[f64], n: u64) -> Result<f64> {
    if n == 0 {
        return invalid("window n must be at least 1");
    }
    let unit = crate::linalg::to_unit(v)?;
    Ok(log_growth(sys, x, unit.as_slice(), n as i64)? / n as f64)
}

/// A finite-time exponent together with the Cauchy gap `|LE_{2n} - LE_n|`,
/// the empirical convergence certificate used in place of the lim sup.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteTimeExponent {
    pub n: u64,
    pub value: f64,
    pub value_2n: f64,
    pub cauchy_gap: f64,
}

pub fn exponent_with_gap(sys: &DynamicalSystem, x: &TorusPoint, v: &[f64], n: u64) -> Result<FiniteTimeExponent> {
    if n == 0 {
        return invalid("window n must be at least 1");
    }
    let unit = crate::linalg::to_unit(v)?;
    let mut at_n = f64::NAN;
    let mut at_2n = f64::NAN;
    visit_growth(sys, x, unit.as_slice(), 2 * n as i64, |k, g| {
        if k == n {
            at_n = g / n as f64;
        }
        if k == 2 * n {
            at_2n = g / (2 * n) as f64;
        }
    })?;
    Ok(FiniteTimeExponent { n, value: at_n, value_2n: at_2n, cauchy_gap: (at_2n - at_n).abs() })
}

/// Finite-n residuals of the algebraic properties of Lyapunov exponents.
///
/// Here `LE_n(x, w) = (1/n) log ‖Df^n(x) w‖` on the raw, unnormalised vector,
/// which is the form in which the scaling law holds exactly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeAlgebraRecord {
    pub n: u64,
    pub alpha: f64,
    pub le_u: f64,
    pub le_v: f64,
    pub le_sum: f64,
    /// `LE_n(αv) - LE_n(v) - log|α|/n`, zero up to rounding.
    pub scaling_residual: f64,
    /// `LE_n(f(x), Df v/‖Df v‖) - (1/n)[log ‖Df^{n+1} v‖ - log ‖Df v‖]`.
    pub invariance_residual: f64,
    /// `LE_n(u+v) - max(LE_n(u), LE_n(v)) - log 2/n`, never positive.
    pub subadditivity_excess: f64,
    /// `|LE_n(u+v) - max(LE_n(u), LE_n(v))|`, small when the maximum is strict.
    pub strict_max_gap: f64,
}

impl LeAlgebraRecord {
    pub fn subadditive(&self) -> bool {
        self.subadditivity_excess <= 1e-12
    }
}

pub fn le_algebra_check(
    sys: &DynamicalSystem,
    x: &TorusPoint,
    u: &[f64],
    v: &[f64],
    alpha: f64,
    n: u64,
) -> Result<LeAlgebraRecord> {
    if n == 0 {
        return invalid("window n must be at least 1");
    }
    if alpha == 0.0 || !alpha.is_finite() {
        return invalid("scaling factor must be nonzero and finite");
    }
    if u.len() != v.len() {
        return invalid("u and v must have the same dimension");
    }
    let nf = n as f64;
    let ni = n as i64;
    let le = |w: &[f64]| -> Result<f64> { Ok(log_growth(sys, x, w, ni)? / nf) };

    let sum: Vec<f64> = u.iter().zip(v).map(|(a, b)| a + b).collect();
    let scaled: Vec<f64> = v.iter().map(|c| alpha * c).collect();
    let le_u = le(u)?;
    let le_v = le(v)?;
    let le_sum = le(&sum)?;
    let le_scaled = le(&scaled)?;

    let dfv = sys.differential(x)? * DVector::from_column_slice(v);
    let dfv_norm = dfv.norm();
    let fx = sys.step(x);
    let pushed = dfv / dfv_norm;
    let lhs = log_growth(sys, &fx, pushed.as_slice(), ni)? / nf;
    let rhs = (log_growth(sys, x, v, ni + 1)? - dfv_norm.ln()) / nf;

    let max = le_u.max(le_v);
    Ok(LeAlgebraRecord {
        n,
        alpha,
        le_u,
        le_v,
        le_sum,
        scaling_residual: le_scaled - le_v - alpha.abs().ln() / nf,
        invariance_residual: lhs - rhs,
        subadditivity_excess: le_sum - max - std::f64::consts::LN_2 / nf,
        strict_max_gap: (le_sum - max).abs(),
    })
}
