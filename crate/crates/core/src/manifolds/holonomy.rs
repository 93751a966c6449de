use serde::{Deserialize, Serialize};

use super::local::Sign;
use crate::dynamics::DynamicalSystem;
use crate::error::{invalid, LabError, Result};

/// Minimum angle between a transversal and the leaves it crosses.
pub const MIN_TRANSVERSALITY: f64 = 0.1;
/// How far along a leaf the holonomy may travel.
pub const DEFAULT_LEAF_RADIUS: f64 = 0.1;
pub const DEFAULT_DENSITY_BOUND: f64 = 10.0;
pub const MIN_DOMAIN_SAMPLES: usize = 100;

/// A straight transversal `base + r·direction`, `|r| ≤ half_length`, in lift
/// coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transversal {
    pub base: [f64; 2],
    pub direction: [f64; 2],
    pub half_length: f64,
    pub resolution: f64,
}

impl Transversal {
    /// Rejects transversals within `MIN_TRANSVERSALITY` of the `sign` leaves.
    pub fn new(
        sys: &DynamicalSystem,
        base: [f64; 2],
        direction: [f64; 2],
        half_length: f64,
        resolution: f64,
        sign: Sign,
    ) -> Result<Self> {
        let n = direction[0].hypot(direction[1]);
        if !(n > 0.0 && n.is_finite()) {
            return invalid("transversal direction must be nonzero");
        }
        if !(half_length > 0.0 && resolution > 0.0) {
            return invalid("half-length and resolution must be positive");
        }
        let direction = [direction[0] / n, direction[1] / n];
        let angle = sin_angle(direction, leaf(sys, sign)?).asin();
        if angle < MIN_TRANSVERSALITY {
            return invalid(format!("transversal makes angle {angle:.4} rad with the leaves (< {MIN_TRANSVERSALITY})"));
        }
        Ok(Transversal { base, direction, half_length, resolution })
    }

    pub fn point(&self, r: f64) -> [f64; 2] {
        [self.base[0] + r * self.direction[0], self.base[1] + r * self.direction[1]]
    }

    /// Signed arclength of the foot of `x` and its distance from the line.
    fn locate(&self, x: [f64; 2]) -> (f64, f64) {
        let d = [x[0] - self.base[0], x[1] - self.base[1]];
        let r = d[0] * self.direction[0] + d[1] * self.direction[1];
        let off = (d[0] * self.direction[1] - d[1] * self.direction[0]).abs();
        (r, off)
    }
}

fn sin_angle(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] * b[1] - a[1] * b[0]).abs() / (a[0].hypot(a[1]) * b[0].hypot(b[1]))
}

/// Unit leaf direction of a linear hyperbolic system (constant in space).
fn leaf(sys: &DynamicalSystem, sign: Sign) -> Result<[f64; 2]> {
    let e = sys
        .hyperbolic_matrix()
        .and_then(|m| m.hyperbolic_eigen())
        .ok_or_else(|| LabError::NonHyperbolic(format!("{} has no 1-dimensional leaves", sys.name())))?;
    Ok(match sign {
        Sign::Plus => e.unit_unstable(),
        Sign::Minus => e.unit_stable(),
    })
}

/// `h(x) = W^±_loc(x) ∩ T'`.
pub fn holonomy_map(sys: &DynamicalSystem, from: &Transversal, to: &Transversal, x: [f64; 2], sign: Sign) -> Result<[f64; 2]> {
    holonomy_map_within(sys, from, to, x, sign, DEFAULT_LEAF_RADIUS)
}

pub fn holonomy_map_within(
    sys: &DynamicalSystem,
    from: &Transversal,
    to: &Transversal,
    x: [f64; 2],
    sign: Sign,
    leaf_radius: f64,
) -> Result<[f64; 2]> {
    let (r, off) = from.locate(x);
    if off > 1e-9 || r.abs() > from.half_length + 1e-12 {
        return invalid("x does not lie on the source transversal");
    }
    Ok(to.point(target_param(sys, to, x, sign, leaf_radius)?))
}

/// Arclength parameter on `to` of the leaf through `x`.
fn target_param(sys: &DynamicalSystem, to: &Transversal, x: [f64; 2], sign: Sign, leaf_radius: f64) -> Result<f64> {
    let u = leaf(sys, sign)?;
    // x + s u = base + r d
    let d = to.direction;
    let det = u[0] * (-d[1]) - (-d[0]) * u[1];
    let rhs = [to.base[0] - x[0], to.base[1] - x[1]];
    let s = (rhs[0] * (-d[1]) - (-d[0]) * rhs[1]) / det;
    let r = (u[0] * rhs[1] - u[1] * rhs[0]) / det;
    if s.abs() > leaf_radius {
        return Err(LabError::OutOfDomain(format!("leaf would travel {:.4} > {leaf_radius}", s.abs())));
    }
    if r.abs() > to.half_length {
        return Err(LabError::OutOfDomain(format!("leaf meets the target line at {r:.4}, outside its half-length")));
    }
    Ok(r)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityPiece {
    pub source: (f64, f64),
    pub target: (f64, f64),
    /// `d(h_* m_T)/dm_{T'}` on the piece: source length over target length.
    pub density: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolonomyResult {
    pub sign: Sign,
    /// `(source arclength, target arclength)` for every sample in the domain.
    pub pairs: Vec<(f64, f64)>,
    pub density: Vec<DensityPiece>,
    pub density_min: f64,
    pub density_max: f64,
    pub bound: f64,
    /// Share of the target support on which the density lies in `[1/K, K]`.
    pub fraction_within_bounds: f64,
    pub injective: bool,
    pub absolutely_continuous: bool,
}

/// Samples `T` at `samples` evenly spaced arclengths, pairs each with its
/// image on `T'`, and reports the piecewise-constant density of the pushed
/// arclength measure against arclength on `T'`.
pub fn holonomy_jacobian(
    sys: &DynamicalSystem,
    from: &Transversal,
    to: &Transversal,
    sign: Sign,
    samples: usize,
    bound: f64,
) -> Result<HolonomyResult> {
    if !(bound > 1.0) {
        return invalid("density bound K must exceed 1");
    }
    if samples < 2 {
        return invalid("need at least two samples");
    }
    let mut pairs = Vec::new();
    for i in 0..samples {
        let a = -from.half_length + 2.0 * from.half_length * i as f64 / (samples - 1) as f64;
        match target_param(sys, to, from.point(a), sign, DEFAULT_LEAF_RADIUS) {
            Ok(b) => pairs.push((a, b)),
            Err(LabError::OutOfDomain(_)) => {}
            Err(e) => return Err(e),
        }
    }
    if pairs.len() < MIN_DOMAIN_SAMPLES {
        return invalid(format!("only {} samples fall in the holonomy domain (need {MIN_DOMAIN_SAMPLES})", pairs.len()));
    }
    let mut density = Vec::with_capacity(pairs.len() - 1);
    let mut injective = true;
    let increasing = pairs[1].1 > pairs[0].1;
    for w in pairs.windows(2) {
        let (ds, dt) = (w[1].0 - w[0].0, w[1].1 - w[0].1);
        if dt == 0.0 || (dt > 0.0) != increasing {
            injective = false;
            continue;
        }
        density.push(DensityPiece { source: (w[0].0, w[1].0), target: (w[0].1, w[1].1), density: ds / dt.abs() });
    }
    let support: f64 = density.iter().map(|p| (p.target.1 - p.target.0).abs()).sum();
    let good: f64 = density
        .iter()
        .filter(|p| p.density >= 1.0 / bound && p.density <= bound)
        .map(|p| (p.target.1 - p.target.0).abs())
        .sum();
    let fraction = if support > 0.0 { good / support } else { 0.0 };
    let density_min = density.iter().map(|p| p.density).fold(f64::INFINITY, f64::min);
    let density_max = density.iter().map(|p| p.density).fold(0.0, f64::max);
    Ok(HolonomyResult {
        sign,
        pairs,
        density,
        density_min,
        density_max,
        bound,
        fraction_within_bounds: fraction,
        injective,
        absolutely_continuous: injective && fraction >= 0.99,
    })
}
