//! Tangent cocycle: finite-time exponents, spectra, Oseledets splittings,
//! Pesin-block constants and domination.

mod domination;
mod exponent;
mod pesin_block;
mod spectrum;
mod splitting;

pub use domination::{dominated_splitting_check, BundleField, DominationReport};
pub use exponent::{
    exponent_with_gap, finite_time_exponent, le_algebra_check, log_growth, FiniteTimeExponent, LeAlgebraRecord,
};
pub use pesin_block::{
    empirical_pesin_constant, tempering_report, DirectionConstant, PesinBlockEstimate, TemperingRatio,
    TemperingReport, SNAP_TOLERANCE,
};
pub use spectrum::{
    lyapunov_spectrum, lyapunov_spectrum_with, merge, LyapunovSpectrum, SpectrumOptions, DEFAULT_MERGE_TOLERANCE,
};
pub use splitting::{
    oseledets_directions, oseledets_directions_with, stable_direction, unstable_direction, zipped_classification,
    Branch, OseledetsDirection, OseledetsOptions, SplittingEstimate, ZippedDims, DEFAULT_ZERO_TOLERANCE,
};
