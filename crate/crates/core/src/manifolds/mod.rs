//! Stable and unstable leaves: local segments, windowed global strands,
//! rate-based membership, holonomies and their densities.
//!
//! Every leaf in the catalogue is a straight line in the torus lift, so the
//! polylines are exact up to rounding. On the sphere quotient the leaves
//! are computed on the covering torus.

mod global;
mod holonomy;
mod local;
mod rate;

pub use global::{global_manifold_window, GlobalManifold, Window, DEFAULT_POINT_BUDGET};
pub use holonomy::{
    holonomy_jacobian, holonomy_map, holonomy_map_within, DensityPiece, HolonomyResult, Transversal,
    DEFAULT_DENSITY_BOUND, DEFAULT_LEAF_RADIUS, MIN_TRANSVERSALITY,
};
pub use local::{
    find_period, invariance_defect, leaf_direction, local_manifold, tangency_angle, ManifoldSegment, Sign,
    MAX_PERIOD, RESOLUTION,
};
pub use rate::{pesin_rate_membership, RateEstimate, StopReason, MEMBER_RATE, SATURATION};
