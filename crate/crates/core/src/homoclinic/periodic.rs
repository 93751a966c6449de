use std::fmt;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedMul};
use serde::{Deserialize, Serialize};

use crate::dynamics::{IntMatrix, TorusPoint};
use crate::error::{invalid, LabError, Result};

type Q = Ratio<i128>;

/// An exact fraction `num/den`, `den > 0`, in lowest terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Fraction {
    pub num: i128,
    pub den: i128,
}

impl Fraction {
    fn from_ratio(r: Q) -> Self {
        Fraction { num: *r.numer(), den: *r.denom() }
    }

    fn to_ratio(self) -> Q {
        Q::new(self.num, self.den)
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

// by value; fractions are kept in lowest terms so this agrees with `Eq`
impl Ord for Fraction {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.to_ratio().cmp(&other.to_ratio())
    }
}

impl PartialOrd for Fraction {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodicPointRecord {
    pub point: [Fraction; 2],
    /// Minimal period under the torus map.
    pub period: u64,
    pub orbit: Vec<[Fraction; 2]>,
    /// Eigenvalue moduli of `A^period`, descending.
    pub moduli: Vec<f64>,
    pub hyperbolic: bool,
}

impl PeriodicPointRecord {
    pub fn to_point(&self) -> TorusPoint {
        TorusPoint::new(&[self.point[0].to_f64(), self.point[1].to_f64()]).expect("finite")
    }

    pub fn orbit_points(&self) -> Vec<TorusPoint> {
        self.orbit
            .iter()
            .map(|p| TorusPoint::new(&[p[0].to_f64(), p[1].to_f64()]).expect("finite"))
            .collect()
    }
}

fn overflow(what: &str) -> LabError {
    LabError::Overflow(what.to_string())
}

fn wide(m: &IntMatrix) -> [[i128; 2]; 2] {
    [[m.get(0, 0) as i128, m.get(0, 1) as i128], [m.get(1, 0) as i128, m.get(1, 1) as i128]]
}

fn mul(a: &[[i128; 2]; 2], b: &[[i128; 2]; 2]) -> Result<[[i128; 2]; 2]> {
    let mut out = [[0i128; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let x = a[i][0].checked_mul(b[0][j]).ok_or_else(|| overflow("matrix power"))?;
            let y = a[i][1].checked_mul(b[1][j]).ok_or_else(|| overflow("matrix power"))?;
            out[i][j] = x.checked_add(y).ok_or_else(|| overflow("matrix power"))?;
        }
    }
    Ok(out)
}

fn power(a: &[[i128; 2]; 2], n: u64) -> Result<[[i128; 2]; 2]> {
    let mut out = [[1, 0], [0, 1]];
    for _ in 0..n {
        out = mul(&out, a)?;
    }
    Ok(out)
}

/// Unimodular `V` and a diagonal `D = U B V` (with some unimodular `U`).
/// A gcd step strictly shrinks `|b00|` unless it already divides the
/// off-diagonal entry, in which case plain elimination clears it.
fn diagonalize(mut b: [[i128; 2]; 2]) -> ([[i128; 2]; 2], [i128; 2]) {
    let mut v = [[1i128, 0], [0, 1]];
    while b[0][1] != 0 || b[1][0] != 0 {
        if b[0][1] != 0 {
            let c = if b[0][0] != 0 && b[0][1] % b[0][0] == 0 {
                [[1, -b[0][1] / b[0][0]], [0, 1]]
            } else {
                // column operation sending (b00, b01) to (g, 0)
                let e = b[0][0].extended_gcd(&b[0][1]);
                let (p, q) = (b[0][0] / e.gcd, b[0][1] / e.gcd);
                [[e.x, -q], [e.y, p]]
            };
            b = mul(&b, &c).expect("entries shrink");
            v = mul(&v, &c).expect("2x2 unimodular factors stay small");
        }
        if b[1][0] != 0 {
            let r = if b[0][0] != 0 && b[1][0] % b[0][0] == 0 {
                [[1, 0], [-b[1][0] / b[0][0], 1]]
            } else {
                let e = b[0][0].extended_gcd(&b[1][0]);
                let (p, q) = (b[0][0] / e.gcd, b[1][0] / e.gcd);
                [[e.x, e.y], [-q, p]]
            };
            b = mul(&r, &b).expect("entries shrink");
        }
    }
    (v, [b[0][0], b[1][1]])
}

fn reduce(r: Q) -> Q {
    r - r.floor()
}

fn apply(a: &[[i128; 2]; 2], x: &[Q; 2]) -> Result<[Q; 2]> {
    let mut out = [Q::from_integer(0); 2];
    for (i, o) in out.iter_mut().enumerate() {
        let t0 = x[0].checked_mul(&Q::from_integer(a[i][0])).ok_or_else(|| overflow("orbit"))?;
        let t1 = x[1].checked_mul(&Q::from_integer(a[i][1])).ok_or_else(|| overflow("orbit"))?;
        *o = reduce(t0.checked_add(&t1).ok_or_else(|| overflow("orbit"))?);
    }
    Ok(out)
}

/// All `x ∈ T²` with `Aⁿx ≡ x`, exactly. The solutions form the group
/// `(Aⁿ - I)⁻¹ Z² / Z²` of order `|det(Aⁿ - I)|`, enumerated from a
/// diagonal form of `Aⁿ - I`.
pub fn periodic_points(a: &IntMatrix, n: u64) -> Result<Vec<PeriodicPointRecord>> {
    if a.dim() != 2 {
        return invalid("periodic points are enumerated for 2x2 matrices");
    }
    if n == 0 {
        return invalid("period must be at least 1");
    }
    let aw = wide(a);
    let an = power(&aw, n)?;
    let b = [[an[0][0] - 1, an[0][1]], [an[1][0], an[1][1] - 1]];
    let det = b[0][0].checked_mul(b[1][1]).zip(b[0][1].checked_mul(b[1][0])).ok_or_else(|| overflow("det"))?;
    if det.0 == det.1 {
        return Err(LabError::NonHyperbolic(format!("A^{n} - I is singular")));
    }
    let (v, d) = diagonalize(b);
    let (d1, d2) = (d[0].abs(), d[1].abs());
    let mut points = Vec::with_capacity((d1 * d2) as usize);
    for i in 0..d1 {
        for j in 0..d2 {
            let y = [Q::new(i, d1), Q::new(j, d2)];
            let x = [
                reduce(y[0] * Q::from_integer(v[0][0]) + y[1] * Q::from_integer(v[0][1])),
                reduce(y[0] * Q::from_integer(v[1][0]) + y[1] * Q::from_integer(v[1][1])),
            ];
            points.push(x);
        }
    }
    points.sort();
    points
        .into_iter()
        .map(|x| {
            // exact orbit; the minimal period divides n
            let mut orbit = vec![x];
            let mut y = apply(&aw, &x)?;
            while y != x {
                if orbit.len() as u64 >= n {
                    return Err(LabError::InvalidInput("enumerated point failed exact verification".into()));
                }
                orbit.push(y);
                y = apply(&aw, &y)?;
            }
            let record = PeriodicPointRecord {
                point: x.map(Fraction::from_ratio),
                period: orbit.len() as u64,
                orbit: orbit.iter().map(|p| p.map(Fraction::from_ratio)).collect(),
                moduli: vec![],
                hyperbolic: false,
            };
            orbit_hyperbolicity(a, record)
        })
        .collect()
}

/// Fills in the eigenvalue moduli of `A^period` and the hyperbolic flag.
pub fn orbit_hyperbolicity(a: &IntMatrix, mut record: PeriodicPointRecord) -> Result<PeriodicPointRecord> {
    let ap = a.checked_pow(record.period as u32)?;
    record.moduli = ap.eigenvalue_moduli();
    record.hyperbolic = record.moduli.iter().all(|m| (m - 1.0).abs() > 1e-12);
    Ok(record)
}

/// Exact check that `A^period` fixes the record's point modulo Z².
pub fn verify_periodic(a: &IntMatrix, record: &PeriodicPointRecord) -> Result<bool> {
    let aw = wide(a);
    let x = record.point.map(Fraction::to_ratio);
    let mut y = x;
    for _ in 0..record.period {
        y = apply(&aw, &y)?;
    }
    Ok(y == x)
}

/// `|det(Aⁿ - I)|` in exact arithmetic.
pub fn periodic_count(a: &IntMatrix, n: u64) -> Result<i128> {
    let an = power(&wide(a), n)?;
    let b = [[an[0][0] - 1, an[0][1]], [an[1][0], an[1][1] - 1]];
    let p = b[0][0].checked_mul(b[1][1]).ok_or_else(|| overflow("det"))?;
    let q = b[0][1].checked_mul(b[1][0]).ok_or_else(|| overflow("det"))?;
    Ok((p - q).abs())
}
