use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::exponent::log_growth;
use crate::dynamics::{DynamicalSystem, TorusPoint};
use crate::error::{invalid, LabError, Result};
use crate::linalg::{cross_unit, line_angle};

pub const DEFAULT_ZERO_TOLERANCE: f64 = 0.05;
pub const DEFAULT_CONVERGENCE_TOLERANCE: f64 = 1e-8;

/// Fixed vector used to seed direction estimates. Its entries are rationally
/// independent so it has a component along every Oseledets direction of the
/// catalogue.
const GENERIC: [f64; 3] = [1.0, 0.5772156649015329, 0.3183098861837907];

/// Dimensions of `E⁻ ⊕ E⁰ ⊕ E⁺`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZippedDims {
    pub stable: usize,
    pub center: usize,
    pub unstable: usize,
}

impl ZippedDims {
    pub fn as_tuple(&self) -> (usize, usize, usize) {
        (self.stable, self.center, self.unstable)
    }

    pub fn total(&self) -> usize {
        self.stable + self.center + self.unstable
    }

    /// No zero exponent: the point is nonuniformly hyperbolic.
    pub fn is_hyperbolic(&self) -> bool {
        self.center == 0
    }
}

/// Sign classification of exponents with an explicit zero band.
pub fn zipped_classification<I: IntoIterator<Item = f64>>(exponents: I, tol: f64) -> Result<ZippedDims> {
    if !(tol > 0.0) {
        return invalid("zero-band tolerance must be positive");
    }
    let mut dims = ZippedDims { stable: 0, center: 0, unstable: 0 };
    for l in exponents {
        if l < -tol {
            dims.stable += 1;
        } else if l > tol {
            dims.unstable += 1;
        } else {
            dims.center += 1;
        }
    }
    Ok(dims)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OseledetsDirection {
    pub vector: Vec<f64>,
    pub exponent: f64,
}

impl OseledetsDirection {
    pub fn unit(&self) -> DVector<f64> {
        let v = DVector::from_column_slice(&self.vector);
        let n = v.norm();
        v / n
    }
}

/// Estimated Oseledets directions at a point, sorted by descending exponent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplittingEstimate {
    pub x: TorusPoint,
    pub n: u64,
    pub directions: Vec<OseledetsDirection>,
    pub dims: ZippedDims,
    pub zero_tolerance: f64,
    /// Angle between the estimates at `n` and `2n`, maximised over directions.
    pub convergence_angle: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl SplittingEstimate {
    /// Wraps externally supplied directions (for example exact eigenvectors).
    pub fn from_directions(x: TorusPoint, n: u64, mut directions: Vec<OseledetsDirection>, zero_tolerance: f64) -> Result<Self> {
        if directions.is_empty() {
            return invalid("a splitting needs at least one direction");
        }
        if directions.iter().any(|d| d.vector.len() != x.dim()) {
            return invalid("direction dimension does not match the point");
        }
        for d in &directions {
            crate::linalg::to_unit(&d.vector)?;
        }
        directions.sort_by(|a, b| b.exponent.total_cmp(&a.exponent));
        let dims = zipped_classification(directions.iter().map(|d| d.exponent), zero_tolerance)?;
        Ok(SplittingEstimate { x, n, directions, dims, zero_tolerance, convergence_angle: 0.0, warnings: vec![] })
    }

    pub fn unstable(&self) -> Option<&OseledetsDirection> {
        self.directions.first().filter(|d| d.exponent > self.zero_tolerance)
    }

    pub fn stable(&self) -> Option<&OseledetsDirection> {
        self.directions.last().filter(|d| d.exponent < -self.zero_tolerance)
    }

    /// Smallest angle between directions carrying different exponents.
    pub fn min_angle(&self) -> f64 {
        let mut best = std::f64::consts::FRAC_PI_2;
        for (i, a) in self.directions.iter().enumerate() {
            for b in &self.directions[i + 1..] {
                if (a.exponent - b.exponent).abs() > super::spectrum::DEFAULT_MERGE_TOLERANCE {
                    best = best.min(line_angle(&a.unit(), &b.unit()));
                }
            }
        }
        best
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OseledetsOptions {
    pub convergence_tolerance: f64,
    pub zero_tolerance: f64,
}

impl Default for OseledetsOptions {
    fn default() -> Self {
        OseledetsOptions { convergence_tolerance: DEFAULT_CONVERGENCE_TOLERANCE, zero_tolerance: DEFAULT_ZERO_TOLERANCE }
    }
}

/// `E⁺(x)`: a generic vector pushed forward from `f^{-n}(x)` along the
/// stored backward orbit, so the push ends exactly on `x`.
pub fn unstable_direction(sys: &DynamicalSystem, x: &TorusPoint, n: u64) -> Result<DVector<f64>> {
    let mut back = Vec::with_capacity(n as usize);
    let mut y = sys.canonical(x);
    for _ in 0..n {
        y = sys.step_back(&y);
        back.push(y);
    }
    let mut w = DVector::from_column_slice(&GENERIC[..sys.dim()]);
    for p in back.iter().rev() {
        w = sys.differential(p)? * w;
        w /= w.norm();
    }
    Ok(w)
}

/// `E⁻(x)`: a generic vector pulled back from `f^n(x)` along the stored
/// forward orbit.
pub fn stable_direction(sys: &DynamicalSystem, x: &TorusPoint, n: u64) -> Result<DVector<f64>> {
    let mut fwd = Vec::with_capacity(n as usize);
    let mut y = sys.canonical(x);
    for _ in 0..n {
        y = sys.step(&y);
        fwd.push(y);
    }
    let mut w = DVector::from_column_slice(&GENERIC[..sys.dim()]);
    for p in fwd.iter().rev() {
        w = sys.inverse_differential(p)? * w;
        w /= w.norm();
    }
    Ok(w)
}

pub fn oseledets_directions(sys: &DynamicalSystem, x: &TorusPoint, n: u64) -> Result<SplittingEstimate> {
    oseledets_directions_with(sys, x, n, &OseledetsOptions::default())
}

pub fn oseledets_directions_with(
    sys: &DynamicalSystem,
    x: &TorusPoint,
    n: u64,
    opts: &OseledetsOptions,
) -> Result<SplittingEstimate> {
    if n == 0 {
        return invalid("window n must be at least 1");
    }
    sys.check_horizon(2 * n as i64)?;
    let x = sys.canonical(x);
    let up = unstable_direction(sys, &x, n)?;
    let down = stable_direction(sys, &x, n)?;
    let drift = line_angle(&up, &unstable_direction(sys, &x, 2 * n)?)
        .max(line_angle(&down, &stable_direction(sys, &x, 2 * n)?));
    if drift > opts.convergence_tolerance {
        return Err(LabError::NoConvergence { angle: drift, tolerance: opts.convergence_tolerance });
    }
    if line_angle(&up, &down) < 1e-6 {
        return Err(LabError::NoConvergence { angle: line_angle(&up, &down), tolerance: 1e-6 });
    }

    let ni = n as i64;
    let lambda_up = log_growth(sys, &x, up.as_slice(), ni)? / n as f64;
    let lambda_down = -log_growth(sys, &x, down.as_slice(), -ni)? / n as f64;
    let mut directions = vec![OseledetsDirection { vector: up.as_slice().to_vec(), exponent: lambda_up }];
    if sys.dim() == 3 {
        let mid = cross_unit(&up, &down);
        let lambda_mid = log_growth(sys, &x, mid.as_slice(), ni)? / n as f64;
        directions.push(OseledetsDirection { vector: mid.as_slice().to_vec(), exponent: lambda_mid });
    }
    directions.push(OseledetsDirection { vector: down.as_slice().to_vec(), exponent: lambda_down });

    let mut warnings = Vec::new();
    let stretch = (lambda_up - lambda_down) * n as f64;
    if stretch < 1e6f64.ln() {
        warnings.push(format!("relative stretch e^{stretch:.2} below 1e6; increase n"));
    }
    let mut est = SplittingEstimate::from_directions(x, n, directions, opts.zero_tolerance)?;
    est.convergence_angle = drift;
    est.warnings = warnings;
    Ok(est)
}

/// Which part of the zipped splitting a direction field follows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Unstable,
    Center,
    Stable,
}

/// Covariant unit direction fields along the orbit window `f^k(x)`,
/// `-window ≤ k ≤ window`, each estimated in its numerically stable time
/// direction with `convergence` warm-up steps.
pub(crate) struct OrbitFrames {
    pub window: usize,
    pub points: Vec<TorusPoint>,
    pub unstable: Vec<DVector<f64>>,
    pub stable: Vec<DVector<f64>>,
    pub center: Option<Vec<DVector<f64>>>,
}

impl OrbitFrames {
    pub fn new(sys: &DynamicalSystem, x: &TorusPoint, window: u64, convergence: u64) -> Result<Self> {
        let w = window as usize;
        let m = convergence as usize;
        let x = sys.canonical(x);
        sys.check_horizon((window + convergence) as i64)?;
        // orbit indices -(w+m) ..= w+m stored at offset w+m
        let reach = w + m;
        let mut orbit = vec![x; 2 * reach + 1];
        for k in 1..=reach {
            orbit[reach + k] = sys.step(&orbit[reach + k - 1]);
            orbit[reach - k] = sys.step_back(&orbit[reach - k + 1]);
        }
        let mut unstable = Vec::with_capacity(2 * w + 1);
        let mut v = DVector::from_column_slice(&GENERIC[..sys.dim()]);
        for (i, p) in orbit.iter().enumerate().take(reach + w) {
            v = sys.differential(p)? * v;
            v /= v.norm();
            // v now lives at orbit[i + 1]
            if i + 1 >= m {
                unstable.push(v.clone());
            }
        }
        let mut stable = Vec::with_capacity(2 * w + 1);
        let mut v = DVector::from_column_slice(&GENERIC[..sys.dim()]);
        for i in (m..orbit.len()).rev() {
            v = sys.inverse_differential(&orbit[i])? * v;
            v /= v.norm();
            // v now lives at orbit[i - 1]
            if i - 1 <= reach + w && i > m {
                stable.push(v.clone());
            }
        }
        stable.reverse();
        let center = (sys.dim() == 3)
            .then(|| unstable.iter().zip(&stable).map(|(u, s)| cross_unit(u, s)).collect());
        let points = orbit[m..=reach + w].to_vec();
        debug_assert_eq!(unstable.len(), 2 * w + 1);
        debug_assert_eq!(stable.len(), 2 * w + 1);
        Ok(OrbitFrames { window: w, points, unstable, stable, center })
    }

    pub fn field(&self, branch: Branch) -> Option<&[DVector<f64>]> {
        match branch {
            Branch::Unstable => Some(&self.unstable),
            Branch::Stable => Some(&self.stable),
            Branch::Center => self.center.as_deref(),
        }
    }

    /// Index of `f^k(x)` in the stored vectors.
    pub fn idx(&self, k: i64) -> usize {
        (self.window as i64 + k) as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::torus_reduce;

    #[test]
    fn classification_examples() {
        let d = zipped_classification([0.962, -0.962], 0.1).unwrap();
        assert_eq!(d.as_tuple(), (1, 0, 1));
        let d = zipped_classification([0.962, 0.00003, -0.962], 0.01).unwrap();
        assert_eq!(d.as_tuple(), (1, 1, 1));
        let d = zipped_classification([0.962, 0.00003, -0.962], 1.0).unwrap();
        assert_eq!(d.as_tuple(), (0, 3, 0));
        assert!(zipped_classification([0.1], 0.0).is_err());
    }

    #[test]
    fn frames_match_pointwise_estimates() {
        let cat = DynamicalSystem::cat();
        let x = torus_reduce(&[0.31, 0.72]).unwrap();
        let frames = OrbitFrames::new(&cat, &x, 5, 60).unwrap();
        assert_eq!(frames.points[frames.idx(0)], x);
        assert_eq!(frames.points[frames.idx(3)], cat.apply(&x, 3).unwrap());
        let up = unstable_direction(&cat, &x, 60).unwrap();
        let down = stable_direction(&cat, &x, 60).unwrap();
        assert!(line_angle(&up, &frames.unstable[frames.idx(0)]) < 1e-12);
        assert!(line_angle(&down, &frames.stable[frames.idx(0)]) < 1e-12);
        assert!(line_angle(&up, &frames.unstable[frames.idx(-5)]) < 1e-12);
        assert!(line_angle(&down, &frames.stable[frames.idx(5)]) < 1e-12);
    }

    #[test]
    fn identity_has_no_splitting() {
        let id = DynamicalSystem::identity(crate::dynamics::Space::T2);
        let x = torus_reduce(&[0.31, 0.72]).unwrap();
        assert!(matches!(oseledets_directions(&id, &x, 50), Err(LabError::NoConvergence { .. })));
    }
}
