//! Birkhoff averages, ensemble ergodicity tests, recurrence statistics,
//! conditional-measure checks and ergodic-component clustering.

mod ergodic;
mod fubini;
mod recurrence;
mod series;

pub use ergodic::{
    cluster_components, ensemble_birkhoff_vectors, ergodic_components, ergodicity_test, BirkhoffVector, Cluster,
    ComponentReport, ErgodicReport, ObservableSummary, Verdict,
};
pub use fubini::{conditional_fubini_check, FubiniReport, PartitionDescriptor, TestSet};
pub use recurrence::{ball_measure, recurrence_statistics, RecurrenceReport, ReturnRecord};
pub use series::{
    birkhoff_average, birkhoff_average_with, forward_backward_gap, space_average, BirkhoffSeries, Checkpoint,
    Direction, DEFAULT_FIRST_CHECKPOINT,
};
