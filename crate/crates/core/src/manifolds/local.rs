use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::cocycle::{stable_direction, unstable_direction};
use crate::dynamics::{DynamicalSystem, IntMatrix, TorusPoint};
use crate::error::{invalid, LabError, Result};
use crate::linalg::line_angle;

/// Arclength spacing of manifold polylines.
pub const RESOLUTION: f64 = 1e-4;
/// Longest period searched when certifying that an anchor is periodic.
pub const MAX_PERIOD: u64 = 24;
pub const PERIOD_TOLERANCE: f64 = 1e-6;
/// Window used for the direction estimates at the anchor.
const DIRECTION_WINDOW: u64 = 64;

/// `+` for unstable, `-` for stable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub fn reversed(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    fn backward(self) -> bool {
        self == Sign::Minus
    }
}

impl std::str::FromStr for Sign {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Sign> {
        match s {
            "+" | "plus" | "unstable" => Ok(Sign::Plus),
            "-" | "minus" | "stable" => Ok(Sign::Minus),
            other => invalid(format!("unknown sign '{other}' (expected + or -)")),
        }
    }
}

/// A piece of a 1-dimensional leaf, stored as a polyline in lift
/// coordinates (not reduced modulo Z²).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifoldSegment {
    pub anchor: [f64; 2],
    pub sign: Sign,
    pub points: Vec<[f64; 2]>,
    pub arclength: Vec<f64>,
    /// Index of the anchor in `points`, when it lies on this piece.
    pub anchor_index: Option<usize>,
}

impl ManifoldSegment {
    pub(crate) fn new(anchor: [f64; 2], sign: Sign, points: Vec<[f64; 2]>, anchor_index: Option<usize>) -> Self {
        let mut arclength = Vec::with_capacity(points.len());
        let mut s = 0.0;
        for (i, p) in points.iter().enumerate() {
            if i > 0 {
                s += dist(&points[i - 1], p);
            }
            arclength.push(s);
        }
        ManifoldSegment { anchor, sign, points, arclength, anchor_index }
    }

    pub fn length(&self) -> f64 {
        self.arclength.last().copied().unwrap_or(0.0)
    }

    /// Unit chord direction from the first to the last point.
    pub fn direction(&self) -> [f64; 2] {
        let (a, b) = (self.points[0], self.points[self.points.len() - 1]);
        let d = [b[0] - a[0], b[1] - a[1]];
        let n = d[0].hypot(d[1]);
        [d[0] / n, d[1] / n]
    }

    /// The polyline reduced into `[0, 1)²`.
    pub fn reduced_points(&self) -> Vec<TorusPoint> {
        self.points.iter().map(|p| TorusPoint::new(p).expect("finite")).collect()
    }

    pub fn max_step(&self) -> f64 {
        self.points.windows(2).map(|w| dist(&w[0], &w[1])).fold(0.0, f64::max)
    }
}

pub(crate) fn dist(a: &[f64; 2], b: &[f64; 2]) -> f64 {
    (b[0] - a[0]).hypot(b[1] - a[1])
}

/// Smallest `q ≤ MAX_PERIOD` with `f^q(p) = p`, within `PERIOD_TOLERANCE`.
pub fn find_period(sys: &DynamicalSystem, p: &TorusPoint) -> Option<u64> {
    let lift = sys.lift_system();
    let p = sys.canonical(p);
    let mut y = p;
    for q in 1..=MAX_PERIOD {
        y = lift.step(&y);
        if sys.distance(&y, &p) < PERIOD_TOLERANCE {
            return Some(q);
        }
    }
    None
}

/// Period and hyperbolic power `A^q` of an anchor.
pub(crate) fn hyperbolic_anchor(sys: &DynamicalSystem, p: &TorusPoint) -> Result<(u64, IntMatrix)> {
    if sys.dim() != 2 {
        return Err(LabError::NonHyperbolic(format!("{} has no 1-dimensional hyperbolic leaves", sys.name())));
    }
    let q = find_period(sys, p)
        .ok_or_else(|| LabError::InvalidInput(format!("{:?} is not periodic with period <= {MAX_PERIOD}", p.coords())))?;
    let aq = sys.matrix().checked_pow(q as u32)?;
    if !aq.is_hyperbolic() {
        return Err(LabError::NonHyperbolic(format!("{:?} (period {q})", p.coords())));
    }
    Ok((q, aq))
}

/// Estimated `E^±(p)` on the covering torus.
pub fn leaf_direction(sys: &DynamicalSystem, p: &TorusPoint, sign: Sign) -> Result<[f64; 2]> {
    let lift = sys.lift_system();
    let v = match sign {
        Sign::Plus => unstable_direction(&lift, p, DIRECTION_WINDOW)?,
        Sign::Minus => stable_direction(&lift, p, DIRECTION_WINDOW)?,
    };
    if v.len() != 2 {
        return invalid("leaf directions are only available in dimension 2");
    }
    Ok([v[0], v[1]])
}

/// Apply `M` (or its inverse) `times` times to a displacement.
fn push(sys: &DynamicalSystem, d: [f64; 2], sign: Sign, times: u64) -> [f64; 2] {
    let mut v = d.to_vec();
    for _ in 0..times {
        v = sys.displacement_step(&TorusPoint::origin(2), &v, sign.backward());
    }
    [v[0], v[1]]
}

/// Local leaf `W^±_ε(p)` of a hyperbolic periodic point: a seed segment of
/// half-length `δ` along the estimated direction is pushed by `f^{±q}`
/// `steps` times, trimmed to radius `ε` and resampled after each push.
pub fn local_manifold(
    sys: &DynamicalSystem,
    p: &TorusPoint,
    sign: Sign,
    delta: f64,
    eps: f64,
    steps: u64,
) -> Result<ManifoldSegment> {
    if !(delta > 0.0 && eps > 0.0 && delta <= eps) {
        return invalid("need 0 < δ <= ε");
    }
    let p = sys.canonical(p);
    let (q, _) = hyperbolic_anchor(sys, &p)?;
    let e = leaf_direction(sys, &p, sign)?;
    let anchor = [p.coord(0), p.coord(1)];

    // displacements from the anchor, ordered along the leaf
    let mut side_pos = resample_ray(&[[0.0, 0.0], [delta * e[0], delta * e[1]]], delta);
    let mut side_neg = resample_ray(&[[0.0, 0.0], [-delta * e[0], -delta * e[1]]], delta);
    for _ in 0..steps {
        for side in [&mut side_pos, &mut side_neg] {
            let mapped: Vec<[f64; 2]> = side.iter().map(|d| push(sys, *d, sign, q)).collect();
            let trimmed = trim(&mapped, eps);
            if trimmed.len() < 2 {
                return Err(LabError::DegenerateSegment(format!("leaf at {anchor:?} shrank below resolution")));
            }
            let len = trimmed.windows(2).map(|w| dist(&w[0], &w[1])).sum::<f64>();
            *side = resample_ray(&trimmed, len);
        }
    }
    let mut points: Vec<[f64; 2]> = side_neg.iter().rev().map(|d| [anchor[0] + d[0], anchor[1] + d[1]]).collect();
    let anchor_index = points.len() - 1;
    points.extend(side_pos.iter().skip(1).map(|d| [anchor[0] + d[0], anchor[1] + d[1]]));
    Ok(ManifoldSegment::new(anchor, sign, points, Some(anchor_index)))
}

/// Keeps the initial part of a ray-like polyline (starting at the origin)
/// inside the closed ball of radius `eps`, ending exactly on the sphere
/// when it leaves.
fn trim(ray: &[[f64; 2]], eps: f64) -> Vec<[f64; 2]> {
    let mut out = vec![ray[0]];
    for w in ray.windows(2) {
        let (a, b) = (w[0], w[1]);
        let nb = b[0].hypot(b[1]);
        if nb <= eps {
            out.push(b);
            continue;
        }
        // solve |a + t(b - a)| = eps for t in [0, 1]
        let d = [b[0] - a[0], b[1] - a[1]];
        let dd = d[0] * d[0] + d[1] * d[1];
        let ad = a[0] * d[0] + a[1] * d[1];
        let aa = a[0] * a[0] + a[1] * a[1];
        let disc = (ad * ad - dd * (aa - eps * eps)).max(0.0);
        let t = ((-ad + disc.sqrt()) / dd).clamp(0.0, 1.0);
        if t > 0.0 {
            out.push([a[0] + t * d[0], a[1] + t * d[1]]);
        }
        break;
    }
    out
}

/// Resamples a polyline from its first point at spacing `RESOLUTION`,
/// keeping its last point.
fn resample_ray(poly: &[[f64; 2]], total: f64) -> Vec<[f64; 2]> {
    let count = (total / RESOLUTION).ceil().max(1.0) as usize;
    let h = total / count as f64;
    let mut out = Vec::with_capacity(count + 1);
    out.push(poly[0]);
    let mut seg = 0;
    let mut seg_start = 0.0;
    for i in 1..count {
        let s = i as f64 * h;
        while seg + 1 < poly.len() - 1 && seg_start + dist(&poly[seg], &poly[seg + 1]) < s {
            seg_start += dist(&poly[seg], &poly[seg + 1]);
            seg += 1;
        }
        let len = dist(&poly[seg], &poly[seg + 1]);
        let t = if len > 0.0 { ((s - seg_start) / len).clamp(0.0, 1.0) } else { 0.0 };
        let (a, b) = (poly[seg], poly[seg + 1]);
        out.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
    }
    out.push(poly[poly.len() - 1]);
    out
}

/// Hausdorff-type defect of `f^{±q}(W) ⊇ W`: the largest distance from a
/// point of the segment to the image polyline.
pub fn invariance_defect(sys: &DynamicalSystem, seg: &ManifoldSegment) -> Result<f64> {
    let p = TorusPoint::new(&seg.anchor)?;
    let (q, _) = hyperbolic_anchor(sys, &p)?;
    // the anchor orbit closes up to an integer translate, which the lift absorbs
    let image: Vec<[f64; 2]> = seg
        .points
        .iter()
        .map(|x| {
            let d = push(sys, [x[0] - seg.anchor[0], x[1] - seg.anchor[1]], seg.sign, q);
            [seg.anchor[0] + d[0], seg.anchor[1] + d[1]]
        })
        .collect();
    Ok(seg.points.iter().map(|x| point_to_polyline(x, &image)).fold(0.0, f64::max))
}

pub(crate) fn point_to_polyline(x: &[f64; 2], poly: &[[f64; 2]]) -> f64 {
    poly.windows(2)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            let d = [b[0] - a[0], b[1] - a[1]];
            let dd = d[0] * d[0] + d[1] * d[1];
            let t = if dd > 0.0 { (((x[0] - a[0]) * d[0] + (x[1] - a[1]) * d[1]) / dd).clamp(0.0, 1.0) } else { 0.0 };
            dist(x, &[a[0] + t * d[0], a[1] + t * d[1]])
        })
        .fold(f64::INFINITY, f64::min)
}

/// Angle between the segment's tangent at the anchor and `E^±(anchor)`.
pub fn tangency_angle(sys: &DynamicalSystem, seg: &ManifoldSegment) -> Result<f64> {
    let p = TorusPoint::new(&seg.anchor)?;
    let e = leaf_direction(sys, &p, seg.sign)?;
    let i = seg.anchor_index.ok_or_else(|| LabError::InvalidInput("anchor not on segment".into()))?;
    let j = if i + 1 < seg.points.len() { i + 1 } else { i - 1 };
    let t = [seg.points[j][0] - seg.points[i][0], seg.points[j][1] - seg.points[i][1]];
    Ok(line_angle(&DVector::from_column_slice(&t), &DVector::from_column_slice(&e)))
}
