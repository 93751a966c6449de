//! Small dense helpers shared by the estimators.

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Result};

pub fn to_unit(v: &[f64]) -> Result<DVector<f64>> {
    let v = DVector::from_column_slice(v);
    let n = v.norm();
    if !(n > 0.0 && n.is_finite()) {
        return invalid("direction must be a nonzero finite vector");
    }
    Ok(v / n)
}

/// Angle in `[0, π/2]` between the lines spanned by `a` and `b`.
///
/// Uses `2·atan2(|â - sb̂|, |â + sb̂|)` with `s = sign(â·b̂)`, which keeps full
/// relative precision for nearly parallel lines.
pub fn line_angle(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let a = a / a.norm();
    let b = b / b.norm();
    let s = if a.dot(&b) < 0.0 { -1.0 } else { 1.0 };
    2.0 * (&a - &b * s).norm().atan2((&a + &b * s).norm())
}

/// Orthonormal basis of the span of the given vectors (modified Gram-Schmidt).
pub fn orthonormal_basis(vectors: &[DVector<f64>]) -> Result<DMatrix<f64>> {
    if vectors.is_empty() {
        return invalid("empty bundle");
    }
    let mut cols: Vec<DVector<f64>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for q in &cols {
            w -= q * q.dot(&w);
        }
        let n = w.norm();
        if !(n > 1e-12 * v.norm().max(1e-300)) {
            return invalid("bundle vectors are zero or linearly dependent");
        }
        cols.push(w / n);
    }
    Ok(DMatrix::from_columns(&cols))
}

/// Unit vector orthogonal to two vectors of R³.
pub fn cross_unit(a: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
    let c = DVector::from_column_slice(&[
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]);
    let n = c.norm();
    c / n
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angle_precision() {
        let a = DVector::from_column_slice(&[1.0, 0.0]);
        let b = DVector::from_column_slice(&[1.0, 1e-12]);
        assert!((line_angle(&a, &b) - 1e-12).abs() < 1e-24);
        let c = DVector::from_column_slice(&[-1.0, 1e-12]);
        assert!((line_angle(&a, &c) - 1e-12).abs() < 1e-24);
        let d = DVector::from_column_slice(&[0.0, 3.0]);
        assert!((line_angle(&a, &d) - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn basis_rejects_dependent_vectors() {
        let a = DVector::from_column_slice(&[1.0, 2.0, 0.0]);
        assert!(orthonormal_basis(&[a.clone(), a.clone() * 2.0]).is_err());
        assert!(orthonormal_basis(&[DVector::zeros(3)]).is_err());
        let q = orthonormal_basis(&[a, DVector::from_column_slice(&[0.0, 0.0, 1.0])]).unwrap();
        assert_eq!(q.shape(), (3, 2));
    }
}
