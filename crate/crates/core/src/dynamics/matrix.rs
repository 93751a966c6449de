use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, LabError, Result};

/// Square integer matrix of size 2 or 3, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntMatrix {
    dim: usize,
    entries: Vec<i64>,
}

impl IntMatrix {
    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let dim = rows.len();
        if !(2..=3).contains(&dim) || rows.iter().any(|r| r.len() != dim) {
            return invalid("integer matrices must be square of size 2 or 3");
        }
        Ok(IntMatrix { dim, entries: rows.iter().flatten().copied().collect() })
    }

    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![0; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = 1;
        }
        IntMatrix { dim, entries }
    }

    pub fn cat() -> Self {
        IntMatrix { dim: 2, entries: vec![2, 1, 1, 1] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.entries[i * self.dim + j]
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        self.entries.chunks(self.dim).map(|r| r.to_vec()).collect()
    }

    pub fn determinant(&self) -> i64 {
        let a = |i, j| self.get(i, j);
        match self.dim {
            2 => a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0),
            _ => {
                a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1))
                    - a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0))
                    + a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0))
            }
        }
    }

    /// Inverse of a unimodular matrix, exact.
    pub fn inverse(&self) -> Result<Self> {
        let det = self.determinant();
        if det.abs() != 1 {
            return invalid(format!("matrix has determinant {det}, expected +-1"));
        }
        let d = self.dim;
        let a = |i: usize, j: usize| self.get(i, j);
        let mut inv = vec![0; d * d];
        if d == 2 {
            inv = vec![a(1, 1), -a(0, 1), -a(1, 0), a(0, 0)];
        } else {
            for i in 0..3 {
                for j in 0..3 {
                    // adjugate entry (i, j) = cofactor (j, i)
                    let (r0, r1) = others(j);
                    let (c0, c1) = others(i);
                    let minor = a(r0, c0) * a(r1, c1) - a(r0, c1) * a(r1, c0);
                    let sign = if (i + j) % 2 == 0 { 1 } else { -1 };
                    inv[i * 3 + j] = sign * minor;
                }
            }
        }
        for v in inv.iter_mut() {
            *v *= det;
        }
        Ok(IntMatrix { dim: d, entries: inv })
    }

    pub fn checked_mul(&self, other: &IntMatrix) -> Result<IntMatrix> {
        let d = self.dim;
        let mut out = vec![0i64; d * d];
        for i in 0..d {
            for j in 0..d {
                let mut acc = 0i64;
                for k in 0..d {
                    acc = self
                        .get(i, k)
                        .checked_mul(other.get(k, j))
                        .and_then(|p| acc.checked_add(p))
                        .ok_or_else(|| LabError::Overflow("integer matrix product".into()))?;
                }
                out[i * d + j] = acc;
            }
        }
        Ok(IntMatrix { dim: d, entries: out })
    }

    pub fn checked_pow(&self, n: u32) -> Result<IntMatrix> {
        let mut out = IntMatrix::identity(self.dim);
        for _ in 0..n {
            out = out.checked_mul(self)?;
        }
        Ok(out)
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| self.get(i, j) as f64)
    }

    /// Block-diagonal `self ⊕ [1]`.
    pub fn with_identity_block(&self) -> IntMatrix {
        let d = self.dim + 1;
        let mut entries = vec![0; d * d];
        for i in 0..self.dim {
            for j in 0..self.dim {
                entries[i * d + j] = self.get(i, j);
            }
        }
        entries[d * d - 1] = 1;
        IntMatrix { dim: d, entries }
    }

    /// Moduli of the complex eigenvalues, descending.
    pub fn eigenvalue_moduli(&self) -> Vec<f64> {
        let mut m: Vec<f64> = self
            .to_dmatrix()
            .complex_eigenvalues()
            .iter()
            .map(|z| z.norm())
            .collect();
        m.sort_by(|a, b| b.total_cmp(a));
        m
    }

    /// True when no eigenvalue lies on the unit circle.
    pub fn is_hyperbolic(&self) -> bool {
        self.eigenvalue_moduli().iter().all(|m| (m - 1.0).abs() > 1e-12)
    }

    /// Closed-form eigenstructure of a hyperbolic 2x2 matrix.
    pub fn hyperbolic_eigen(&self) -> Option<Eigen2> {
        if self.dim != 2 || !self.is_hyperbolic() {
            return None;
        }
        let (a, b, c, d) = (self.get(0, 0) as f64, self.get(0, 1) as f64, self.get(1, 0) as f64, self.get(1, 1) as f64);
        let tr = a + d;
        let det = self.determinant() as f64;
        let disc = (tr * tr - 4.0 * det).sqrt();
        // larger root without cancellation, smaller one from the product
        let big = (tr + tr.signum() * disc) / 2.0;
        let small = det / big;
        let vec_for = |l: f64| -> [f64; 2] {
            // (a - l) v1 + b v2 = 0 and c v1 + (d - l) v2 = 0; use the better row
            let v = if b.abs() + (a - l).abs() >= c.abs() + (d - l).abs() { [b, l - a] } else { [l - d, c] };
            if v[0].abs() > 1e-300 {
                [1.0, v[1] / v[0]]
            } else {
                [0.0, 1.0]
            }
        };
        Some(Eigen2 { mu: big, mu_inv: small, unstable: vec_for(big), stable: vec_for(small) })
    }
}

/// Eigenvalues and eigenvectors of a hyperbolic 2x2 matrix, each eigenvector
/// scaled so its first component is 1 (or `(0, 1)` when vertical).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Eigen2 {
    /// Eigenvalue of largest modulus (may be negative).
    pub mu: f64,
    pub mu_inv: f64,
    pub unstable: [f64; 2],
    pub stable: [f64; 2],
}

impl Eigen2 {
    pub fn log_mu(&self) -> f64 {
        self.mu.abs().ln()
    }

    pub fn unit_unstable(&self) -> [f64; 2] {
        unit(self.unstable)
    }

    pub fn unit_stable(&self) -> [f64; 2] {
        unit(self.stable)
    }
}

fn unit(v: [f64; 2]) -> [f64; 2] {
    let n = v[0].hypot(v[1]);
    [v[0] / n, v[1] / n]
}

fn others(i: usize) -> (usize, usize) {
    match i {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cat_eigenstructure() {
        let e = IntMatrix::cat().hyperbolic_eigen().unwrap();
        assert!((e.mu - 2.618033988749895).abs() < 1e-15);
        assert!((e.mu_inv - 0.3819660112501051).abs() < 1e-15);
        assert!((e.unstable[1] - 0.6180339887498949).abs() < 1e-15);
        assert!((e.stable[1] + 1.618033988749895).abs() < 1e-15);
        assert!((e.log_mu() - 0.9624236501192069).abs() < 1e-15);
        assert!(IntMatrix::identity(2).hyperbolic_eigen().is_none());
    }

    #[test]
    fn cat_square_is_5_3_3_2() {
        let a2 = IntMatrix::cat().checked_pow(2).unwrap();
        assert_eq!(a2.rows(), vec![vec![5, 3], vec![3, 2]]);
    }

    #[test]
    fn inverse_round_trip() {
        let a = IntMatrix::from_rows(&[vec![2, 1, 0], vec![1, 1, 1], vec![0, 1, 2]]).unwrap();
        // det = 2*(2-1) - 1*(2-0) + 0 = 0 -> not unimodular
        assert!(a.inverse().is_err());
        let b = IntMatrix::cat().with_identity_block();
        let c = IntMatrix::from_rows(&[vec![1, 1, 0], vec![0, 1, 1], vec![0, 0, 1]]).unwrap();
        for m in [b, c, IntMatrix::cat()] {
            let inv = m.inverse().unwrap();
            assert_eq!(m.checked_mul(&inv).unwrap(), IntMatrix::identity(m.dim()));
        }
    }

    #[test]
    fn hyperbolicity() {
        assert!(IntMatrix::cat().is_hyperbolic());
        assert!(!IntMatrix::cat().with_identity_block().is_hyperbolic());
        assert!(!IntMatrix::identity(2).is_hyperbolic());
        let m = IntMatrix::cat().eigenvalue_moduli();
        assert!((m[0] - 2.618033988749895).abs() < 1e-12);
        assert!((m[1] - 0.3819660112501051).abs() < 1e-12);
    }
}
