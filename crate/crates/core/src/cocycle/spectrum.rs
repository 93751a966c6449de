use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dynamics::{DynamicalSystem, TorusPoint};
use crate::error::{invalid, LabError, Result};

pub const DEFAULT_MERGE_TOLERANCE: f64 = 1e-3;
pub const DEFAULT_TRANSIENT: u64 = 100;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumOptions {
    pub renorm_every: u64,
    /// Steps used to align the frame before `x`; the frame is pushed from
    /// `f^{-transient}(x)` to `x` without accumulating stretch factors.
    pub transient: u64,
    pub merge_tolerance: f64,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions { renorm_every: 1, transient: DEFAULT_TRANSIENT, merge_tolerance: DEFAULT_MERGE_TOLERANCE }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LyapunovSpectrum {
    pub x: TorusPoint,
    pub n: u64,
    pub renorm_every: u64,
    pub transient: u64,
    /// One value per frame direction, descending.
    pub per_direction: Vec<f64>,
    /// Distinct exponents after merging, descending.
    pub exponents: Vec<f64>,
    pub multiplicities: Vec<usize>,
    pub merge_tolerance: f64,
    /// `Σ λ_i · mult_i`, the accumulated log-determinant rate.
    pub exponent_sum: f64,
}

pub fn lyapunov_spectrum(sys: &DynamicalSystem, x: &TorusPoint, n: u64, renorm_every: u64) -> Result<LyapunovSpectrum> {
    lyapunov_spectrum_with(sys, x, n, &SpectrumOptions { renorm_every, ..SpectrumOptions::default() })
}

/// Orthonormal-frame (QR) accumulation of the Lyapunov spectrum.
pub fn lyapunov_spectrum_with(
    sys: &DynamicalSystem,
    x: &TorusPoint,
    n: u64,
    opts: &SpectrumOptions,
) -> Result<LyapunovSpectrum> {
    let every = opts.renorm_every;
    if every == 0 || n < every {
        return invalid(format!("need n >= renorm_every >= 1, got n = {n}, renorm_every = {every}"));
    }
    sys.check_horizon(n as i64)?;
    sys.check_horizon(opts.transient as i64)?;
    let d = sys.dim();
    let x = sys.canonical(x);

    // backward orbit, so the warm-up ends exactly on x
    let mut warm = Vec::with_capacity(opts.transient as usize);
    let mut y = x;
    for _ in 0..opts.transient {
        y = sys.step_back(&y);
        warm.push(y);
    }
    let mut frame = DMatrix::<f64>::identity(d, d);
    for p in warm.iter().rev() {
        frame = sys.differential(p)? * frame;
        frame = frame.qr().q();
    }

    let mut sums = vec![0.0; d];
    let mut y = x;
    for k in 1..=n {
        frame = sys.differential(&y)? * frame;
        y = sys.step(&y);
        if k % every == 0 || k == n {
            let qr = frame.qr();
            let r = qr.r();
            for (i, s) in sums.iter_mut().enumerate() {
                let factor = r[(i, i)].abs();
                if !(factor > 1e-300 && factor.is_finite()) {
                    return Err(LabError::DegenerateFrame { step: k, factor });
                }
                *s += factor.ln();
            }
            frame = qr.q();
        }
    }

    let mut per_direction: Vec<f64> = sums.iter().map(|s| s / n as f64).collect();
    per_direction.sort_by(|a, b| b.total_cmp(a));
    let (exponents, multiplicities) = merge(&per_direction, opts.merge_tolerance);
    let exponent_sum = exponents.iter().zip(&multiplicities).map(|(l, m)| l * *m as f64).sum();
    Ok(LyapunovSpectrum {
        x,
        n,
        renorm_every: every,
        transient: opts.transient,
        per_direction,
        exponents,
        multiplicities,
        merge_tolerance: opts.merge_tolerance,
        exponent_sum,
    })
}

/// Groups a descending list into runs whose consecutive gaps are within
/// `tol`; each run is replaced by its mean.
pub fn merge(sorted_desc: &[f64], tol: f64) -> (Vec<f64>, Vec<usize>) {
    let mut groups: Vec<Vec<f64>> = Vec::new();
    for &l in sorted_desc {
        match groups.last_mut() {
            Some(g) if (g.last().copied().unwrap_or(l) - l).abs() <= tol => g.push(l),
            _ => groups.push(vec![l]),
        }
    }
    let values = groups.iter().map(|g| g.iter().sum::<f64>() / g.len() as f64).collect();
    let mults = groups.iter().map(|g| g.len()).collect();
    (values, mults)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{torus_reduce, Space};

    #[test]
    fn merge_groups_close_values() {
        let (v, m) = merge(&[0.9624, 0.0004, 0.0, -0.9624], 1e-3);
        assert_eq!(m, vec![1, 2, 1]);
        assert!((v[1] - 0.0002).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_cadence() {
        let cat = DynamicalSystem::cat();
        let x = torus_reduce(&[0.1, 0.2]).unwrap();
        assert!(lyapunov_spectrum(&cat, &x, 10, 0).is_err());
        assert!(lyapunov_spectrum(&cat, &x, 10, 11).is_err());
    }

    #[test]
    fn identity_has_a_double_zero_exponent() {
        let id = DynamicalSystem::identity(Space::T2);
        let s = lyapunov_spectrum(&id, &torus_reduce(&[0.1, 0.2]).unwrap(), 100, 1).unwrap();
        assert_eq!(s.exponents, vec![0.0]);
        assert_eq!(s.multiplicities, vec![2]);
    }

    #[test]
    fn overflowing_cadence_reports_degenerate_frame() {
        let cat = DynamicalSystem::cat();
        let x = torus_reduce(&[0.1, 0.2]).unwrap();
        let err = lyapunov_spectrum(&cat, &x, 2000, 1000).unwrap_err();
        assert!(matches!(err, LabError::DegenerateFrame { .. }), "{err:?}");
    }
}
