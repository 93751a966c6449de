//! Point spaces, example systems, differentials and observables.

mod matrix;
mod observable;
mod point;
mod system;

pub use matrix::{Eigen2, IntMatrix};
pub use observable::{cosine_family, default_family, Kind, Observable};
pub use point::{
    reduce_unit, singular_points, sphere_distance, sphere_project, torus_reduce, wrap_half,
    SpherePoint, TorusPoint, MAX_DIM,
};
pub use system::{
    DynamicalSystem, PointMap, ReferenceMeasure, Space, SystemDescriptor, DEFAULT_HORIZON,
};
