//! Error type shared across the library.

use thiserror::Error;

/// Typed failures surfaced by the library.
///
/// Numerical tolerances are part of the contract: constructors and checks
/// report *how far* an input is from satisfying an invariant wherever that
/// is meaningful.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: {context} (got {got}, expected {expected})")]
    DimensionMismatch {
        context: &'static str,
        got: String,
        expected: String,
    },

    #[error("matrix is not Hermitian (asymmetry {defect:.3e} exceeds {tolerance:.1e})")]
    NotHermitian { defect: f64, tolerance: f64 },

    #[error("matrix is not an isometry (|V\u{2020}V - I| = {defect:.3e})")]
    NotIsometry { defect: f64 },

    #[error("Kraus operators are not trace preserving (|\u{3a3} K\u{2020}K - I| = {defect:.3e})")]
    NotTracePreserving { defect: f64 },

    #[error("update undefined: outcome probability {probability:.3e} is below threshold")]
    ZeroProbabilityUpdate { probability: f64 },

    #[error("states belong to different theories")]
    TheoryMismatch,

    #[error("invalid state: {details}")]
    InvalidState { details: String },

    /// A transformation family produced something that is not a state of its
    /// theory. For mixed families the minimum output eigenvalue is retained so
    /// that complete-positivity failures stay diagnosable.
    #[error("family evaluator produced an invalid state: {details} (defect {defect:.3e})")]
    InvalidOutputState {
        details: String,
        defect: f64,
        min_eigenvalue: Option<f64>,
    },

    #[error("unknown zoo family `{0}`")]
    UnknownZooFamily(String),

    #[error("ensembles are distinguishable (trace distance {distance:.3e} exceeds {tolerance:.1e})")]
    NotIndistinguishable { distance: f64, tolerance: f64 },

    #[error("requested ensemble size {size} is below the state rank {rank}")]
    SizeBelowRank { size: usize, rank: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed input: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn dims(context: &'static str, got: impl ToString, expected: impl ToString) -> Self {
        Error::DimensionMismatch {
            context,
            got: got.to_string(),
            expected: expected.to_string(),
        }
    }
}
