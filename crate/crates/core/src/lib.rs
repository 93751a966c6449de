//! Desk-scale numerical laboratory for nonuniformly hyperbolic dynamics.
//!
//! The crate is organised by subject:
//!
//! * [`dynamics`]: point spaces (T², T³ and the sphere quotient of T²), the
//!   linear example systems, their differentials and trigonometric observables.
//! * [`cocycle`]: finite-time Lyapunov exponents, spectra, Oseledets
//!   directions, empirical Pesin-block constants and domination checks.
//! * [`birkhoff`]: Birkhoff averages, ensemble ergodicity tests, recurrence,
//!   conditional-measure checks and ergodic-component clustering.
//! * [`manifolds`]: local and windowed global stable/unstable manifolds,
//!   contraction-rate membership, holonomy maps and their Jacobians.
//! * [`homoclinic`]: exact periodic-point enumeration, homoclinic witnesses,
//!   ergodic homoclinic class membership and decomposition reports.

pub mod birkhoff;
pub mod cocycle;
pub mod dynamics;
pub mod error;
pub mod homoclinic;
pub mod linalg;
pub mod manifolds;
pub mod rng;

pub use error::{LabError, Result};
