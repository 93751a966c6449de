use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::periodic::PeriodicPointRecord;
use crate::cocycle::{oseledets_directions, ZippedDims};
use crate::dynamics::{DynamicalSystem, Eigen2, IntMatrix, TorusPoint};
use crate::error::{invalid, LabError, Result};
use crate::linalg::line_angle;

pub const DEFAULT_TRANSLATE_WINDOW: i64 = 20;
pub const MAX_TRANSLATE_WINDOW: i64 = 160;
pub const MIN_TRANSVERSAL_ANGLE: f64 = 0.1;
/// Window for the Oseledets estimates at query points.
pub const EHC_SPLITTING_WINDOW: u64 = 64;
/// Half-length of the local leaf grown into the windowed global manifold.
pub const EHC_LOCAL_RADIUS: f64 = 0.1;

/// `p + t·v₊ = q + s·v₋ + k` in the lift, with `v±` scaled to first
/// component 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomoclinicWitness {
    pub p: TorusPoint,
    pub q: TorusPoint,
    pub translate: [i64; 2],
    pub point: TorusPoint,
    pub t: f64,
    pub s: f64,
    pub residual: f64,
    pub angle: f64,
}

impl HomoclinicWitness {
    pub fn is_trivial(&self) -> bool {
        self.t.abs() < 1e-12 && self.s.abs() < 1e-12
    }
}

fn eigen(a: &IntMatrix) -> Result<Eigen2> {
    a.hyperbolic_eigen().ok_or_else(|| LabError::NonHyperbolic("matrix has no hyperbolic splitting".into()))
}

fn solve(u: [f64; 2], w: [f64; 2], rhs: [f64; 2]) -> (f64, f64) {
    // t·u - s·w = rhs
    let det = u[0] * (-w[1]) - (-w[0]) * u[1];
    let t = (rhs[0] * (-w[1]) - (-w[0]) * rhs[1]) / det;
    let s = (u[0] * rhs[1] - u[1] * rhs[0]) / det;
    (t, s)
}

/// Intersection of `W^u(p)` with the translate `k` of `W^s(q)`.
pub fn homoclinic_witness_at(a: &IntMatrix, p: &TorusPoint, q: &TorusPoint, translate: [i64; 2]) -> Result<HomoclinicWitness> {
    if p.dim() != 2 || q.dim() != 2 {
        return invalid("homoclinic witnesses live on T^2");
    }
    let e = eigen(a)?;
    let (u, w) = (e.unstable, e.stable);
    let rhs = [
        q.coord(0) - p.coord(0) + translate[0] as f64,
        q.coord(1) - p.coord(1) + translate[1] as f64,
    ];
    let (t, s) = solve(u, w, rhs);
    let lhs = [p.coord(0) + t * u[0], p.coord(1) + t * u[1]];
    let other = [
        q.coord(0) + s * w[0] + translate[0] as f64,
        q.coord(1) + s * w[1] + translate[1] as f64,
    ];
    let residual = (lhs[0] - other[0]).hypot(lhs[1] - other[1]);
    let angle = line_angle(&DVector::from_column_slice(&u), &DVector::from_column_slice(&w));
    Ok(HomoclinicWitness { p: *p, q: *q, translate, point: TorusPoint::new(&lhs)?, t, s, residual, angle })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomoclinicRelation {
    /// `W^u(p) ⋔ W^s(q)`.
    pub forward: HomoclinicWitness,
    /// `W^u(q) ⋔ W^s(p)`.
    pub backward: HomoclinicWitness,
    pub window: i64,
    pub related: bool,
}

/// Minimal-`|t|` nontrivial witness over translates `|kᵢ| ≤ window`; the
/// window doubles (up to `max_window`) while only the trivial solution is found.
pub fn minimal_witness(a: &IntMatrix, p: &TorusPoint, q: &TorusPoint, window: i64, max_window: i64) -> Result<(HomoclinicWitness, i64)> {
    if window < 0 || max_window < window {
        return invalid("need 0 <= window <= max_window");
    }
    let mut w = window;
    loop {
        let mut best: Option<HomoclinicWitness> = None;
        for k0 in -w..=w {
            for k1 in -w..=w {
                let cand = homoclinic_witness_at(a, p, q, [k0, k1])?;
                if cand.is_trivial() {
                    continue;
                }
                if best.as_ref().is_none_or(|b| cand.t.abs() < b.t.abs() - 1e-15) {
                    best = Some(cand);
                }
            }
        }
        if let Some(b) = best {
            return Ok((b, w));
        }
        if w >= max_window {
            return Err(LabError::TrivialWitness { window: w });
        }
        w = (2 * w).max(1).min(max_window);
    }
}

pub fn homoclinic_relation(a: &IntMatrix, p: &TorusPoint, q: &TorusPoint, window: i64) -> Result<HomoclinicRelation> {
    let (forward, w1) = minimal_witness(a, p, q, window, MAX_TRANSLATE_WINDOW)?;
    let (backward, w2) = minimal_witness(a, q, p, window, MAX_TRANSLATE_WINDOW)?;
    let ok = |w: &HomoclinicWitness| w.residual < 1e-9 && w.angle >= MIN_TRANSVERSAL_ANGLE;
    let related = ok(&forward) && ok(&backward);
    Ok(HomoclinicRelation { forward, backward, window: w1.max(w2), related })
}

/// Where a Pesin leaf of `x` meets a leaf of the anchor orbit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeafIntersection {
    pub point: TorusPoint,
    /// Index in the anchor orbit.
    pub orbit_index: usize,
    pub translate: [i64; 2],
    /// Signed arclength along the leaf of `x`.
    pub s: f64,
    /// Signed arclength along the anchor's leaf.
    pub t: f64,
    pub angle: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EhcMembership {
    pub anchor: PeriodicPointRecord,
    pub x: TorusPoint,
    /// `W⁻(x) ⋔ W^u(o(p))`.
    pub minus: Option<LeafIntersection>,
    /// `W⁺(x) ⋔ W^s(o(p))`.
    pub plus: Option<LeafIntersection>,
    pub in_minus: bool,
    pub in_plus: bool,
    pub in_ehc: bool,
    pub dims: ZippedDims,
    /// Arclength of the anchor leaves searched: `ε·|μ|^{n·q}`.
    pub leaf_reach: f64,
}

/// Ergodic-homoclinic-class membership of `x` for the anchor orbit `o(p)`.
///
/// The anchor's invariant manifolds are the windowed global leaves after
/// `n` pushes of a local leaf of radius `EHC_LOCAL_RADIUS`; translates
/// `|kᵢ| ≤ window` are searched and the intersection closest to `x` along
/// its own leaf is kept.
pub fn ehc_membership(
    sys: &DynamicalSystem,
    anchor: &PeriodicPointRecord,
    x: &TorusPoint,
    window: i64,
    n: u64,
) -> Result<EhcMembership> {
    if window < 0 {
        return invalid("translate window must be nonnegative");
    }
    if !anchor.hyperbolic {
        return Err(LabError::NonHyperbolic("anchor is not a hyperbolic periodic point".into()));
    }
    let lift = sys.lift_system();
    if lift.space() != crate::dynamics::Space::T2 {
        return Err(LabError::NonHyperbolic(format!("{} has no hyperbolic periodic points", sys.name())));
    }
    let e = eigen(sys.matrix())?;
    let x = sys.canonical(x);
    let split = oseledets_directions(&lift, &x, EHC_SPLITTING_WINDOW)?;
    let reach = EHC_LOCAL_RADIUS * e.mu.abs().powf((n * anchor.period) as f64);
    let mut orbit = anchor.orbit_points();
    if sys.space() == crate::dynamics::Space::S2 {
        // both lifts of the quotient orbit
        let mirrored: Vec<TorusPoint> = orbit.iter().map(|o| o.negated()).collect();
        orbit.extend(mirrored);
    }

    let unit = |v: &[f64]| {
        let n = v[0].hypot(v[1]);
        [v[0] / n, v[1] / n]
    };
    let meet = |own: [f64; 2], theirs: [f64; 2]| -> Option<LeafIntersection> {
        let angle = line_angle(&DVector::from_column_slice(&own), &DVector::from_column_slice(&theirs));
        let mut best: Option<LeafIntersection> = None;
        for (i, o) in orbit.iter().enumerate() {
            for k0 in -window..=window {
                for k1 in -window..=window {
                    // x + s·own = o + t·theirs + k
                    let rhs = [o.coord(0) + k0 as f64 - x.coord(0), o.coord(1) + k1 as f64 - x.coord(1)];
                    let (s, t) = solve(own, theirs, rhs);
                    if t.abs() > reach {
                        continue;
                    }
                    if best.as_ref().is_none_or(|b| s.abs() < b.s.abs() - 1e-15) {
                        let point = TorusPoint::new(&[x.coord(0) + s * own[0], x.coord(1) + s * own[1]]).ok()?;
                        best = Some(LeafIntersection { point, orbit_index: i, translate: [k0, k1], s, t, angle });
                    }
                }
            }
        }
        best
    };
    let (e_minus, e_plus) = match (split.stable(), split.unstable()) {
        (Some(m), Some(p)) => (unit(&m.vector), unit(&p.vector)),
        _ => {
            return Ok(EhcMembership {
                anchor: anchor.clone(),
                x,
                minus: None,
                plus: None,
                in_minus: false,
                in_plus: false,
                in_ehc: false,
                dims: split.dims,
                leaf_reach: reach,
            })
        }
    };
    let minus = meet(e_minus, e.unit_unstable());
    let plus = meet(e_plus, e.unit_stable());
    let transverse = |w: &Option<LeafIntersection>| w.as_ref().is_some_and(|w| w.angle >= MIN_TRANSVERSAL_ANGLE);
    let in_minus = transverse(&minus);
    let in_plus = transverse(&plus);
    Ok(EhcMembership {
        anchor: anchor.clone(),
        x,
        minus,
        plus,
        in_minus,
        in_plus,
        in_ehc: in_minus && in_plus,
        dims: split.dims,
        leaf_reach: reach,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homoclinic::periodic::periodic_points;

    #[test]
    fn witness_for_translate_one_zero() {
        let o = TorusPoint::origin(2);
        let w = homoclinic_witness_at(&IntMatrix::cat(), &o, &o, [1, 0]).unwrap();
        assert!((w.point.coord(0) - 0.7236067977499790).abs() < 1e-12);
        assert!((w.point.coord(1) - 1.0 / 5f64.sqrt()).abs() < 1e-12);
        assert!((w.t - 0.7236067977499790).abs() < 1e-12);
        assert!((w.s + 0.2763932022500210).abs() < 1e-12);
        assert!(w.residual < 1e-12);
        assert!((w.angle - std::f64::consts::FRAC_PI_2).abs() < 1e-10);
    }

    #[test]
    fn zero_window_at_the_same_point_is_trivial() {
        let o = TorusPoint::origin(2);
        let err = minimal_witness(&IntMatrix::cat(), &o, &o, 0, 0).unwrap_err();
        assert!(matches!(err, LabError::TrivialWitness { window: 0 }));
        let (w, used) = minimal_witness(&IntMatrix::cat(), &o, &o, 0, 4).unwrap();
        assert_eq!(used, 1);
        assert!(!w.is_trivial());
    }

    #[test]
    fn fixed_point_is_related_to_a_period_two_orbit() {
        let cat = IntMatrix::cat();
        let q = periodic_points(&cat, 2).unwrap().into_iter().find(|r| r.period == 2).unwrap();
        let r = homoclinic_relation(&cat, &TorusPoint::origin(2), &q.to_point(), DEFAULT_TRANSLATE_WINDOW).unwrap();
        assert!(r.related);
    }

    #[test]
    fn anchor_belongs_to_its_own_class() {
        let cat = DynamicalSystem::cat();
        let p = periodic_points(cat.matrix(), 1).unwrap().remove(0);
        let m = ehc_membership(&cat, &p, &TorusPoint::origin(2), 2, 10).unwrap();
        assert!(m.in_ehc);
        assert!(m.minus.unwrap().s.abs() < 1e-12);
        assert_eq!(m.dims.as_tuple(), (1, 0, 1));
    }
}
