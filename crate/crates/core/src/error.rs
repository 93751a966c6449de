use thiserror::Error;

/// Errors raised by the estimators and geometric constructions.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LabError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("requested {steps} steps exceeds the configured horizon {horizon}")]
    HorizonExceeded { steps: i64, horizon: u64 },
    #[error("point {0:?} is a cone singularity of the sphere quotient")]
    SingularPoint(Vec<f64>),
    #[error("orthonormal frame degenerated at step {step} (stretch factor {factor:e})")]
    DegenerateFrame { step: u64, factor: f64 },
    #[error("direction estimate did not converge: angle {angle:e} between n and 2n exceeds {tolerance:e}")]
    NoConvergence { angle: f64, tolerance: f64 },
    #[error("manifold segment collapsed: {0}")]
    DegenerateSegment(String),
    #[error("distances are not resolvable: {0}")]
    NotResolvable(String),
    #[error("leaf misses the target transversal: {0}")]
    OutOfDomain(String),
    #[error("point is not hyperbolic: {0}")]
    NonHyperbolic(String),
    #[error("only the trivial intersection was found within translate window {window}")]
    TrivialWitness { window: i64 },
    #[error("integer overflow in exact arithmetic: {0}")]
    Overflow(String),
    #[error("no hyperbolic anchors: {0}")]
    NoAnchors(String),
}

impl LabError {
    /// Stable name used by the command-line harness when reporting failures.
    pub fn name(&self) -> &'static str {
        match self {
            LabError::InvalidInput(_) => "InvalidInput",
            LabError::HorizonExceeded { .. } => "HorizonExceeded",
            LabError::SingularPoint(_) => "SingularPointError",
            LabError::DegenerateFrame { .. } => "DegenerateFrameError",
            LabError::NoConvergence { .. } => "NoConvergenceError",
            LabError::DegenerateSegment(_) => "DegenerateSegmentError",
            LabError::NotResolvable(_) => "NotResolvableError",
            LabError::OutOfDomain(_) => "OutOfDomainError",
            LabError::NonHyperbolic(_) => "NonHyperbolicError",
            LabError::TrivialWitness { .. } => "TrivialWitnessError",
            LabError::Overflow(_) => "OverflowError",
            LabError::NoAnchors(_) => "NoAnchorsError",
        }
    }
}

pub type Result<T> = std::result::Result<T, LabError>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(LabError::InvalidInput(msg.into()))
}
