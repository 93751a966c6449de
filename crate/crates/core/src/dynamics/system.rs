use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::matrix::IntMatrix;
use super::point::{reduce_unit, sphere_project, TorusPoint, MAX_DIM};
use crate::error::{invalid, LabError, Result};

pub const DEFAULT_HORIZON: u64 = 50_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Space {
    /// Flat 2-torus.
    T2,
    /// Flat 3-torus.
    T3,
    /// Sphere quotient of T² by `x ~ -x`, handled through canonical lifts.
    S2,
}

impl Space {
    /// Dimension of the (lifted) coordinate space.
    pub fn dim(self) -> usize {
        match self {
            Space::T2 | Space::S2 => 2,
            Space::T3 => 3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReferenceMeasure {
    Lebesgue,
    /// Pushforward of Lebesgue measure under the projection T² -> S².
    SpherePushforward,
}

/// An invertible, volume-preserving linear map of a torus or of its sphere
/// quotient.
///
/// Points on the sphere quotient are carried by their canonical torus lift;
/// `apply` always returns canonical lifts for that space.
#[derive(Clone, Debug, PartialEq)]
pub struct DynamicalSystem {
    name: String,
    space: Space,
    matrix: IntMatrix,
    inverse: IntMatrix,
    horizon: u64,
}

/// Structured description of a system, as found in run configurations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemDescriptor {
    pub system: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<i64>>>,
}

impl SystemDescriptor {
    pub fn named(system: &str) -> Self {
        SystemDescriptor { system: system.to_string(), matrix: None }
    }

    /// Validates the descriptor and builds the system. A matrix override must
    /// be a 2x2 integer matrix with determinant ±1 and no eigenvalue on the
    /// unit circle.
    pub fn build(&self) -> Result<DynamicalSystem> {
        let block = match &self.matrix {
            None => IntMatrix::cat(),
            Some(rows) => {
                let m = IntMatrix::from_rows(rows)?;
                if m.dim() != 2 {
                    return invalid("matrix override must be 2x2");
                }
                if m.determinant().abs() != 1 {
                    return invalid(format!(
                        "matrix override has determinant {}, expected +-1",
                        m.determinant()
                    ));
                }
                if !m.is_hyperbolic() {
                    return invalid("matrix override has an eigenvalue on the unit circle");
                }
                m
            }
        };
        match self.system.as_str() {
            "cat" => DynamicalSystem::linear("cat", Space::T2, block),
            "cat_x_id" => DynamicalSystem::linear("cat_x_id", Space::T3, block.with_identity_block()),
            "sphere_quotient" => DynamicalSystem::linear("sphere_quotient", Space::S2, block),
            other => invalid(format!(
                "unknown system '{other}' (expected cat, cat_x_id or sphere_quotient)"
            )),
        }
    }
}

impl DynamicalSystem {
    /// Arnold's cat map `x -> A x mod Z²` with `A = [[2,1],[1,1]]`.
    pub fn cat() -> Self {
        Self::linear("cat", Space::T2, IntMatrix::cat()).expect("cat matrix is unimodular")
    }

    /// The partially hyperbolic product `A × id` on T³.
    pub fn cat_x_id() -> Self {
        Self::linear("cat_x_id", Space::T3, IntMatrix::cat().with_identity_block())
            .expect("block matrix is unimodular")
    }

    /// The map induced by the cat map on `S² = T²/(x ~ -x)`.
    pub fn sphere_quotient() -> Self {
        Self::linear("sphere_quotient", Space::S2, IntMatrix::cat()).expect("cat matrix is unimodular")
    }

    /// Any unimodular integer matrix acting on the given space. Hyperbolicity
    /// is not required, which admits fixtures such as the identity.
    pub fn linear(name: &str, space: Space, matrix: IntMatrix) -> Result<Self> {
        if matrix.dim() != space.dim() {
            return invalid(format!(
                "matrix of size {} does not act on a space of dimension {}",
                matrix.dim(),
                space.dim()
            ));
        }
        let inverse = matrix.inverse()?;
        Ok(DynamicalSystem { name: name.to_string(), space, matrix, inverse, horizon: DEFAULT_HORIZON })
    }

    pub fn identity(space: Space) -> Self {
        Self::linear("identity", space, IntMatrix::identity(space.dim())).expect("identity is unimodular")
    }

    pub fn with_horizon(mut self, horizon: u64) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.matrix
    }

    pub fn reference_measure(&self) -> ReferenceMeasure {
        match self.space {
            Space::S2 => ReferenceMeasure::SpherePushforward,
            _ => ReferenceMeasure::Lebesgue,
        }
    }

    /// The system generated by the inverse map.
    pub fn inverse_system(&self) -> Self {
        DynamicalSystem {
            name: format!("{}^-1", self.name),
            space: self.space,
            matrix: self.inverse.clone(),
            inverse: self.matrix.clone(),
            horizon: self.horizon,
        }
    }

    /// The torus system covering this one (itself unless on the sphere quotient).
    pub fn lift_system(&self) -> Self {
        match self.space {
            Space::S2 => DynamicalSystem { space: Space::T2, ..self.clone() },
            _ => self.clone(),
        }
    }

    /// The 2x2 hyperbolic block when the whole system is a hyperbolic
    /// automorphism of T² (or its quotient).
    pub fn hyperbolic_matrix(&self) -> Option<&IntMatrix> {
        (self.matrix.dim() == 2 && self.matrix.is_hyperbolic()).then_some(&self.matrix)
    }

    /// Brings an arbitrary torus point into this system's space (canonical
    /// lift on the sphere quotient).
    pub fn canonical(&self, x: &TorusPoint) -> TorusPoint {
        match self.space {
            Space::S2 => sphere_project(x).rep,
            _ => *x,
        }
    }

    pub fn is_singular(&self, x: &TorusPoint) -> bool {
        self.space == Space::S2 && sphere_project(x).singular
    }

    fn check_point(&self, x: &TorusPoint) -> Result<()> {
        if x.dim() != self.dim() {
            return invalid(format!(
                "point of dimension {} given to a system of dimension {}",
                x.dim(),
                self.dim()
            ));
        }
        Ok(())
    }

    #[inline]
    fn mul_reduce(&self, m: &IntMatrix, x: &TorusPoint) -> TorusPoint {
        let d = m.dim();
        let c = x.coords();
        let mut out = [0.0; MAX_DIM];
        for (i, o) in out.iter_mut().enumerate().take(d) {
            let mut acc = 0.0;
            for (j, cj) in c.iter().enumerate() {
                acc += m.get(i, j) as f64 * cj;
            }
            *o = reduce_unit(acc);
        }
        let y = TorusPoint::from_reduced(out, d);
        self.canonical(&y)
    }

    /// One forward step, no horizon bookkeeping.
    #[inline]
    pub fn step(&self, x: &TorusPoint) -> TorusPoint {
        self.mul_reduce(&self.matrix, x)
    }

    /// One backward step.
    #[inline]
    pub fn step_back(&self, x: &TorusPoint) -> TorusPoint {
        self.mul_reduce(&self.inverse, x)
    }

    /// `f^steps(x)`, reducing after every step.
    pub fn apply(&self, x: &TorusPoint, steps: i64) -> Result<TorusPoint> {
        self.check_point(x)?;
        self.check_horizon(steps)?;
        let mut y = self.canonical(x);
        if steps >= 0 {
            for _ in 0..steps {
                y = self.step(&y);
            }
        } else {
            for _ in 0..steps.unsigned_abs() {
                y = self.step_back(&y);
            }
        }
        Ok(y)
    }

    pub fn check_horizon(&self, steps: i64) -> Result<()> {
        if steps.unsigned_abs() > self.horizon {
            return Err(LabError::HorizonExceeded { steps, horizon: self.horizon });
        }
        Ok(())
    }

    /// `Df(x)`. On the sphere quotient the chart is the torus lift itself, so
    /// the differential is `A` at every regular point.
    pub fn differential(&self, x: &TorusPoint) -> Result<DMatrix<f64>> {
        self.check_point(x)?;
        if self.is_singular(x) {
            return Err(LabError::SingularPoint(x.coords().to_vec()));
        }
        Ok(self.matrix.to_dmatrix())
    }

    /// `Df^{-1}(x) = (Df(f^{-1}x))^{-1}`.
    pub fn inverse_differential(&self, x: &TorusPoint) -> Result<DMatrix<f64>> {
        self.check_point(x)?;
        if self.is_singular(x) {
            return Err(LabError::SingularPoint(x.coords().to_vec()));
        }
        Ok(self.inverse.to_dmatrix())
    }

    /// Lift-level displacement map: `F(x + δ) - F(x)` for the linear lift `F`.
    /// Exact for every system in the catalogue since their lifts are linear.
    pub fn displacement_step(&self, _x: &TorusPoint, delta: &[f64], backward: bool) -> Vec<f64> {
        let m = if backward { &self.inverse } else { &self.matrix };
        (0..m.dim())
            .map(|i| delta.iter().enumerate().map(|(j, d)| m.get(i, j) as f64 * d).sum())
            .collect()
    }

    /// Uniform sample from the reference measure.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> TorusPoint {
        let mut c = [0.0; MAX_DIM];
        for v in c.iter_mut().take(self.dim()) {
            *v = rng.random::<f64>();
        }
        self.canonical(&TorusPoint::from_reduced(c, self.dim()))
    }

    /// Distance in this system's space (quotient metric on S²).
    pub fn distance(&self, a: &TorusPoint, b: &TorusPoint) -> f64 {
        match self.space {
            Space::S2 => super::point::sphere_distance(&sphere_project(a), &sphere_project(b)),
            _ => a.distance(b),
        }
    }
}

/// Anything that maps points of a unit-cube chart to itself; used by the
/// nonwandering probe, which also accepts non-invertible fixtures.
pub trait PointMap: Sync {
    fn dim(&self) -> usize;
    fn map_point(&self, x: &TorusPoint) -> TorusPoint;
}

impl PointMap for DynamicalSystem {
    fn dim(&self) -> usize {
        DynamicalSystem::dim(self)
    }

    fn map_point(&self, x: &TorusPoint) -> TorusPoint {
        self.step(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::point::{singular_points, sphere_distance, torus_reduce};
    use crate::rng::member_rng;

    fn pt(c: &[f64]) -> TorusPoint {
        torus_reduce(c).unwrap()
    }

    fn close(a: &TorusPoint, b: &[f64], tol: f64) -> bool {
        a.distance(&pt(b)) < tol
    }

    #[test]
    fn apply_examples() {
        let cat = DynamicalSystem::cat();
        assert_eq!(cat.apply(&pt(&[0.0, 0.0]), 1).unwrap().coords(), &[0.0, 0.0]);
        assert!(close(&cat.apply(&pt(&[0.2, 0.4]), 1).unwrap(), &[0.8, 0.6], 1e-12));
        assert!(close(&cat.apply(&pt(&[0.5, 0.5]), 1).unwrap(), &[0.5, 0.0], 1e-12));
    }

    #[test]
    fn horizon_is_enforced() {
        let cat = DynamicalSystem::cat().with_horizon(10);
        assert!(cat.apply(&pt(&[0.1, 0.2]), 10).is_ok());
        assert!(matches!(cat.apply(&pt(&[0.1, 0.2]), -11), Err(LabError::HorizonExceeded { .. })));
    }

    #[test]
    fn differential_examples() {
        let cat = DynamicalSystem::cat();
        let d = cat.differential(&pt(&[0.3, 0.1])).unwrap();
        assert_eq!(d, DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 1.0]));
        let x = pt(&[0.3, 0.1]);
        let d2 = cat.differential(&cat.step(&x)).unwrap() * d;
        assert_eq!(d2, DMatrix::from_row_slice(2, 2, &[5.0, 3.0, 3.0, 2.0]));

        let s2 = DynamicalSystem::sphere_quotient();
        let d = s2.differential(&pt(&[0.3, 0.1])).unwrap();
        assert_eq!(d, DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 1.0]));
        for p in singular_points() {
            assert!(matches!(s2.differential(&p), Err(LabError::SingularPoint(_))));
        }
    }

    #[test]
    fn product_differential_is_block_diagonal() {
        let sys = DynamicalSystem::cat_x_id();
        let d = sys.differential(&pt(&[0.1, 0.2, 0.3])).unwrap();
        assert_eq!(
            d,
            DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0])
        );
        let y = sys.apply(&pt(&[0.1, 0.2, 0.3]), 7).unwrap();
        assert_eq!(y.coord(2), 0.3);
    }

    #[test]
    fn volume_preservation_and_inverse() {
        let mut rng = member_rng(3, 0);
        for sys in [DynamicalSystem::cat(), DynamicalSystem::cat_x_id(), DynamicalSystem::sphere_quotient()] {
            for _ in 0..200 {
                let x = sys.sample(&mut rng);
                let d = sys.differential(&x).unwrap();
                assert!((d.determinant().abs() - 1.0).abs() < 1e-12);
                let back = sys.step_back(&sys.step(&x));
                assert!(sys.distance(&back, &x) < 1e-12);
            }
        }
    }

    #[test]
    fn sphere_map_commutes_with_projection() {
        let cat = DynamicalSystem::cat();
        let s2 = DynamicalSystem::sphere_quotient();
        let mut rng = member_rng(11, 0);
        for _ in 0..1000 {
            let x = cat.sample(&mut rng);
            let lhs = sphere_project(&cat.step(&x));
            let rhs = sphere_project(&s2.step(&sphere_project(&x).rep));
            assert!(sphere_distance(&lhs, &rhs) < 1e-12);
        }
    }

    #[test]
    fn singular_points_are_permuted_exactly() {
        let s2 = DynamicalSystem::sphere_quotient();
        let image = |x: f64, y: f64| s2.step(&pt(&[x, y]));
        assert_eq!(image(0.0, 0.0).coords(), &[0.0, 0.0]);
        assert_eq!(image(0.5, 0.0).coords(), &[0.0, 0.5]);
        assert_eq!(image(0.0, 0.5).coords(), &[0.5, 0.5]);
        assert_eq!(image(0.5, 0.5).coords(), &[0.5, 0.0]);
    }

    #[test]
    fn descriptor_validation() {
        assert_eq!(SystemDescriptor::named("cat").build().unwrap(), DynamicalSystem::cat());
        assert_eq!(SystemDescriptor::named("cat_x_id").build().unwrap(), DynamicalSystem::cat_x_id());
        assert!(SystemDescriptor::named("henon").build().is_err());
        let bad_det = SystemDescriptor { system: "cat".into(), matrix: Some(vec![vec![2, 1], vec![1, 2]]) };
        assert!(bad_det.build().is_err());
        let elliptic = SystemDescriptor { system: "cat".into(), matrix: Some(vec![vec![0, -1], vec![1, 0]]) };
        assert!(elliptic.build().is_err());
        let ok = SystemDescriptor { system: "sphere_quotient".into(), matrix: Some(vec![vec![3, 2], vec![1, 1]]) };
        assert_eq!(ok.build().unwrap().matrix().rows(), vec![vec![3, 2], vec![1, 1]]);
    }
}
