//! Exact periodic points, homoclinic witnesses between them, membership in
//! ergodic homoclinic classes and the decomposition report built on those.

mod periodic;
mod probe;
mod report;
mod witness;

pub use periodic::{orbit_hyperbolicity, periodic_count, periodic_points, verify_periodic, Fraction, PeriodicPointRecord};
pub use probe::{nonwandering_probe, NonwanderingReport, DEFAULT_SAMPLES_PER_SIDE};
pub use report::{
    spectral_decomposition_report, AnchorSummary, ComponentSummary, DecompositionReport, SpectralOptions,
    SUBSTITUTE_SEARCH,
};
pub use witness::{
    ehc_membership, homoclinic_relation, homoclinic_witness_at, minimal_witness, EhcMembership, HomoclinicRelation,
    HomoclinicWitness, LeafIntersection, DEFAULT_TRANSLATE_WINDOW, EHC_LOCAL_RADIUS, EHC_SPLITTING_WINDOW,
    MAX_TRANSLATE_WINDOW, MIN_TRANSVERSAL_ANGLE,
};
