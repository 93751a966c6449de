use std::f64::consts::TAU;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::point::{reduce_unit, sphere_project, TorusPoint};
use super::system::Space;
use crate::error::{invalid, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Cosine,
    Sine,
}

/// A trigonometric observable `cos(2π k·x)` or `sin(2π k·x)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Observable {
    freq: Vec<i64>,
    kind: Kind,
    space: Space,
}

impl Observable {
    /// Only cosines are constructible on the sphere quotient, since they are
    /// the ones invariant under `x -> -x`.
    pub fn new(freq: Vec<i64>, kind: Kind, space: Space) -> Result<Self> {
        if freq.len() != space.dim() {
            return invalid(format!(
                "frequency of length {} on a space of dimension {}",
                freq.len(),
                space.dim()
            ));
        }
        if space == Space::S2 && kind == Kind::Sine {
            return invalid("sine observables are odd and do not descend to the sphere quotient");
        }
        Ok(Observable { freq, kind, space })
    }

    pub fn cosine(freq: &[i64], space: Space) -> Result<Self> {
        Self::new(freq.to_vec(), Kind::Cosine, space)
    }

    pub fn sine(freq: &[i64], space: Space) -> Result<Self> {
        Self::new(freq.to_vec(), Kind::Sine, space)
    }

    pub fn freq(&self) -> &[i64] {
        &self.freq
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn is_constant(&self) -> bool {
        self.freq.iter().all(|&k| k == 0)
    }

    /// Short identifier such as `cos(1,0)`.
    pub fn id(&self) -> String {
        self.to_string()
    }

    #[inline]
    pub fn eval(&self, x: &TorusPoint) -> f64 {
        if self.space == Space::S2 {
            return self.eval_lift(&sphere_project(x).rep);
        }
        self.eval_lift(x)
    }

    #[inline]
    fn eval_lift(&self, x: &TorusPoint) -> f64 {
        // reduce the phase first so large frequencies keep full precision
        let phase = reduce_unit(self.freq.iter().zip(x.coords()).map(|(&k, c)| k as f64 * c).sum());
        match self.kind {
            Kind::Cosine => (TAU * phase).cos(),
            Kind::Sine => (TAU * phase).sin(),
        }
    }

    /// Integral against the reference measure. Every nonconstant character
    /// integrates to zero on T^d, hence also on S² by pushforward.
    pub fn space_average(&self) -> f64 {
        match (self.kind, self.is_constant()) {
            (Kind::Cosine, true) => 1.0,
            _ => 0.0,
        }
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k: Vec<String> = self.freq.iter().map(|k| k.to_string()).collect();
        let name = match self.kind {
            Kind::Cosine => "cos",
            Kind::Sine => "sin",
        };
        write!(f, "{name}({})", k.join(","))
    }
}

/// The default family: one frequency from each `±k` pair with `‖k‖∞ ≤ 1`,
/// `k ≠ 0`, paired with cosine and sine (cosine only on S²).
pub fn default_family(space: Space) -> Vec<Observable> {
    let d = space.dim();
    let mut freqs: Vec<Vec<i64>> = Vec::new();
    let total = 3usize.pow(d as u32);
    for code in 0..total {
        let mut k = Vec::with_capacity(d);
        let mut c = code;
        for _ in 0..d {
            k.push((c % 3) as i64 - 1);
            c /= 3;
        }
        k.reverse();
        // keep the representative whose first nonzero entry is positive
        if k.iter().find(|&&v| v != 0).is_some_and(|&v| v > 0) {
            freqs.push(k);
        }
    }
    let mut family = Vec::new();
    for k in freqs {
        family.push(Observable::new(k.clone(), Kind::Cosine, space).expect("valid"));
        if space != Space::S2 {
            family.push(Observable::new(k, Kind::Sine, space).expect("valid"));
        }
    }
    family
}

/// Cosines of every nonzero `k` with `‖k‖∞ ≤ 1`, both signs included
/// (8 observables on T² and S², 26 on T³). Positive entries come first, so
/// `k` precedes `-k`.
pub fn cosine_family(space: Space) -> Vec<Observable> {
    let d = space.dim();
    let mut family = Vec::new();
    for code in 1..3usize.pow(d as u32) {
        let mut k = vec![0i64; d];
        let mut c = code;
        for slot in k.iter_mut().rev() {
            *slot = [0, 1, -1][c % 3];
            c /= 3;
        }
        family.push(Observable::new(k, Kind::Cosine, space).expect("valid"));
    }
    family
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::point::torus_reduce;
    use crate::rng::member_rng;
    use rand::Rng;

    #[test]
    fn eval_examples() {
        let one = Observable::cosine(&[0, 0], Space::T2).unwrap();
        assert_eq!(one.eval(&torus_reduce(&[0.37, 0.11]).unwrap()), 1.0);
        let c = Observable::cosine(&[1, 0], Space::T2).unwrap();
        assert!(c.eval(&torus_reduce(&[0.25, 0.7]).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn cosine_is_even_on_the_sphere() {
        let c = Observable::cosine(&[1, 1], Space::S2).unwrap();
        let mut rng = member_rng(5, 0);
        for _ in 0..100 {
            let x = torus_reduce(&[rng.random(), rng.random()]).unwrap();
            assert!((c.eval(&x) - c.eval(&x.negated())).abs() < 1e-15);
        }
    }

    #[test]
    fn sine_rejected_on_sphere() {
        assert!(Observable::sine(&[1, 0], Space::S2).is_err());
        assert!(Observable::cosine(&[1, 0, 0], Space::T2).is_err());
    }

    #[test]
    fn space_averages() {
        assert_eq!(Observable::cosine(&[1, 0], Space::T2).unwrap().space_average(), 0.0);
        assert_eq!(Observable::cosine(&[0, 0], Space::T2).unwrap().space_average(), 1.0);
        assert_eq!(Observable::cosine(&[1, 1], Space::S2).unwrap().space_average(), 0.0);
    }

    #[test]
    fn default_family_sizes() {
        assert_eq!(default_family(Space::T2).len(), 8);
        assert_eq!(default_family(Space::S2).len(), 4);
        let t3 = default_family(Space::T3);
        assert_eq!(t3.len(), 26);
        assert!(t3.iter().any(|o| o.freq() == [0, 0, 1]));
        assert_eq!(cosine_family(Space::T2).len(), 8);
        assert_eq!(cosine_family(Space::S2).len(), 8);
        let c3 = cosine_family(Space::T3);
        assert_eq!(c3.len(), 26);
        assert_eq!(c3[0].freq(), [0, 0, 1]);
        assert_eq!(c3[1].freq(), [0, 0, -1]);
    }
}
