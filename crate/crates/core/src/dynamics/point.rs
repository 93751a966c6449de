use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, LabError, Result};

pub const MAX_DIM: usize = 3;

/// Reduces a real number into `[0, 1)`.
///
/// `rem_euclid` can round tiny negative inputs up to exactly `1.0`; those are
/// folded back to `0.0`, as is negative zero.
#[inline]
pub fn reduce_unit(v: f64) -> f64 {
    let r = v.rem_euclid(1.0);
    if r >= 1.0 || r == 0.0 {
        0.0
    } else {
        r
    }
}

/// A point of the flat torus `T^d = R^d / Z^d` for `d` in `{2, 3}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "Vec<f64>", try_from = "Vec<f64>")]
pub struct TorusPoint {
    coords: [f64; MAX_DIM],
    dim: usize,
}

impl TorusPoint {
    /// Builds a point from raw coordinates, reducing each modulo 1.
    pub fn new(raw: &[f64]) -> Result<Self> {
        torus_reduce(raw)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords[..self.dim]
    }

    pub fn coord(&self, i: usize) -> f64 {
        self.coords()[i]
    }

    pub fn origin(dim: usize) -> Self {
        TorusPoint { coords: [0.0; MAX_DIM], dim }
    }

    /// `-x mod Z^d`.
    pub fn negated(&self) -> Self {
        let mut out = *self;
        for c in out.coords[..self.dim].iter_mut() {
            *c = reduce_unit(-*c);
        }
        out
    }

    /// Translate by a real vector and reduce.
    pub fn translated(&self, offset: &[f64]) -> Self {
        debug_assert_eq!(offset.len(), self.dim);
        let mut out = *self;
        for (c, o) in out.coords[..self.dim].iter_mut().zip(offset) {
            *c = reduce_unit(*c + o);
        }
        out
    }

    /// Shortest displacement `y - x` in the lift, each component in `[-1/2, 1/2)`.
    pub fn displacement_to(&self, other: &TorusPoint) -> Vec<f64> {
        self.coords()
            .iter()
            .zip(other.coords())
            .map(|(a, b)| wrap_half(b - a))
            .collect()
    }

    /// Flat torus distance.
    pub fn distance(&self, other: &TorusPoint) -> f64 {
        self.displacement_to(other).iter().map(|d| d * d).sum::<f64>().sqrt()
    }

    pub(crate) fn from_reduced(coords: [f64; MAX_DIM], dim: usize) -> Self {
        TorusPoint { coords, dim }
    }

    fn lex_cmp(&self, other: &TorusPoint) -> Ordering {
        for (a, b) in self.coords().iter().zip(other.coords()) {
            match a.partial_cmp(b).unwrap_or(Ordering::Equal) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        Ordering::Equal
    }
}

/// Wraps a displacement into `[-1/2, 1/2)`.
#[inline]
pub fn wrap_half(d: f64) -> f64 {
    d - (d + 0.5).floor()
}

impl From<TorusPoint> for Vec<f64> {
    fn from(p: TorusPoint) -> Self {
        p.coords().to_vec()
    }
}

impl TryFrom<Vec<f64>> for TorusPoint {
    type Error = LabError;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        torus_reduce(&v)
    }
}

/// Reduces raw coordinates modulo `Z^d`.
pub fn torus_reduce(raw: &[f64]) -> Result<TorusPoint> {
    if !(2..=MAX_DIM).contains(&raw.len()) {
        return invalid(format!("torus points have 2 or 3 coordinates, got {}", raw.len()));
    }
    if let Some(bad) = raw.iter().find(|c| !c.is_finite()) {
        return invalid(format!("non-finite coordinate {bad}"));
    }
    let mut coords = [0.0; MAX_DIM];
    for (c, r) in coords.iter_mut().zip(raw) {
        *c = reduce_unit(*r);
    }
    Ok(TorusPoint { coords, dim: raw.len() })
}

/// A point of the sphere `S^2 = T^2 / (x ~ -x)`.
///
/// `rep` is the lexicographically smaller of the two reduced lifts `x`, `-x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpherePoint {
    pub rep: TorusPoint,
    pub singular: bool,
}

impl SpherePoint {
    /// The two lifts `{x, -x}`.
    pub fn lifts(&self) -> [TorusPoint; 2] {
        [self.rep, self.rep.negated()]
    }
}

/// Projection `T^2 -> S^2`.
pub fn sphere_project(x: &TorusPoint) -> SpherePoint {
    debug_assert_eq!(x.dim(), 2, "the sphere quotient is defined on T^2");
    let neg = x.negated();
    let singular = neg == *x;
    let rep = if neg.lex_cmp(x) == Ordering::Less { neg } else { *x };
    SpherePoint { rep, singular }
}

/// Quotient metric: minimum of the flat distance over representatives.
///
/// Since `d(-a, -b) = d(a, b)`, comparing `b` against both lifts of `a` covers
/// all four representative pairs.
pub fn sphere_distance(a: &SpherePoint, b: &SpherePoint) -> f64 {
    let [a0, a1] = a.lifts();
    a0.distance(&b.rep).min(a1.distance(&b.rep))
}

/// The four cone points of the sphere quotient.
pub fn singular_points() -> [TorusPoint; 4] {
    let p = |x: f64, y: f64| TorusPoint::from_reduced([x, y, 0.0], 2);
    [p(0.0, 0.0), p(0.5, 0.0), p(0.0, 0.5), p(0.5, 0.5)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pt(c: &[f64]) -> TorusPoint {
        torus_reduce(c).unwrap()
    }

    #[test]
    fn reduce_examples() {
        assert_eq!(pt(&[2.25, -0.5]).coords(), &[0.25, 0.5]);
        assert_eq!(pt(&[0.0, 0.0]).coords(), &[0.0, 0.0]);
        assert_eq!(pt(&[0.999, 0.3]).coords(), &[0.999, 0.3]);
    }

    #[test]
    fn reduce_rejects_non_finite_and_bad_dims() {
        assert!(torus_reduce(&[f64::NAN, 0.0]).is_err());
        assert!(torus_reduce(&[f64::INFINITY, 0.0]).is_err());
        assert!(torus_reduce(&[0.1]).is_err());
        assert!(torus_reduce(&[0.1; 4]).is_err());
    }

    #[test]
    fn tiny_negative_does_not_reduce_to_one() {
        let p = pt(&[-1e-18, -0.0]);
        assert!(p.coords().iter().all(|c| (0.0..1.0).contains(c)));
        assert_eq!(p.coord(1).to_bits(), 0.0f64.to_bits());
    }

    #[test]
    fn projection_examples() {
        let s = sphere_project(&pt(&[0.7, 0.6]));
        assert!(!s.singular);
        assert!((s.rep.coord(0) - 0.3).abs() < 1e-15 && (s.rep.coord(1) - 0.4).abs() < 1e-15);

        let s = sphere_project(&pt(&[0.5, 0.0]));
        assert!(s.singular);
        assert_eq!(s.rep.coords(), &[0.5, 0.0]);

        let a = sphere_project(&pt(&[0.25, 0.375]));
        let b = sphere_project(&pt(&[0.75, 0.625]));
        assert_eq!(a, b);
    }

    #[test]
    fn exactly_four_singular_points_on_a_fine_grid() {
        let mut count = 0;
        for i in 0..64 {
            for j in 0..64 {
                let p = pt(&[i as f64 / 64.0, j as f64 / 64.0]);
                if sphere_project(&p).singular {
                    count += 1;
                    assert!(singular_points().contains(&p));
                }
            }
        }
        assert_eq!(count, 4);
    }

    #[test]
    fn distance_examples() {
        let a = sphere_project(&pt(&[0.1, 0.0]));
        assert_eq!(sphere_distance(&a, &a), 0.0);
        let b = sphere_project(&pt(&[0.2, 0.0]));
        assert!((sphere_distance(&a, &b) - 0.1).abs() < 1e-15);
        // (0.95, 0) is -(0.05, 0): the same point of the quotient
        let c = sphere_project(&pt(&[0.05, 0.0]));
        let d = sphere_project(&pt(&[0.95, 0.0]));
        assert!(sphere_distance(&c, &d) < 1e-15);
        // -(0.85, 0.8) = (0.15, 0.2) sits 0.1 away from (0.05, 0.2)
        let e = sphere_project(&pt(&[0.05, 0.2]));
        let f = sphere_project(&pt(&[0.85, 0.8]));
        assert!((sphere_distance(&e, &f) - 0.1).abs() < 1e-12);
        assert!(pt(&[0.05, 0.2]).distance(&pt(&[0.85, 0.8])) > 0.4);
    }

    proptest! {
        #[test]
        fn reduction_is_idempotent(a in -1e6..1e6f64, b in -1e6..1e6f64, c in -1e6..1e6f64) {
            let once = pt(&[a, b, c]);
            let twice = torus_reduce(once.coords()).unwrap();
            prop_assert_eq!(once, twice);
            prop_assert!(once.coords().iter().all(|c| (0.0..1.0).contains(c)));
        }

        #[test]
        fn sphere_metric_axioms(p in proptest::array::uniform6(0.0..1.0f64)) {
            let a = sphere_project(&pt(&p[0..2]));
            let b = sphere_project(&pt(&p[2..4]));
            let c = sphere_project(&pt(&p[4..6]));
            let ab = sphere_distance(&a, &b);
            prop_assert!((ab - sphere_distance(&b, &a)).abs() < 1e-15);
            prop_assert!(ab <= sphere_distance(&a, &c) + sphere_distance(&c, &b) + 1e-12);
            prop_assert_eq!(sphere_distance(&a, &a), 0.0);
        }

        #[test]
        fn projection_ignores_the_lift(x in 0.0..1.0f64, y in 0.0..1.0f64) {
            let p = pt(&[x, y]);
            let a = sphere_project(&p);
            let b = sphere_project(&p.negated());
            prop_assert!(sphere_distance(&a, &b) < 1e-15);
        }
    }
}
