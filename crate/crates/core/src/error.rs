use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("missing required column `{column}`")]
    MissingColumn { column: String },

    #[error("row {row}: cannot parse `{value}` in column `{column}`")]
    ParseCell { row: usize, column: String, value: String },

    #[error("row {row}: malformed record: {message}")]
    MalformedRecord { row: usize, message: String },

    #[error("row {row}: timestamp {current} ms is not after previous timestamp {previous} ms")]
    NonMonotonicTimestamp { row: usize, previous: f64, current: f64 },

    #[error("row {row}: {what} value {value} is out of range")]
    OutOfRange { row: usize, what: &'static str, value: f64 },

    #[error("{what} is empty")]
    Empty { what: &'static str },

    #[error("{what}: need at least {needed} samples, got {got}")]
    TooFewSamples {
        what: &'static str,
        needed: usize,
        got: usize,
    },

    #[error("invalid parameter `{name}`: {message}")]
    InvalidParameter { name: &'static str, message: String },

    #[error("non-finite value in {what}")]
    NonFinite { what: String },

    #[error("annotation track does not cover window [{start_ms}, {end_ms}) ms")]
    AnnotationCoverage { start_ms: f64, end_ms: f64 },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("expected {expected} features, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("{what} has zero variance")]
    ZeroVariance { what: &'static str },

    #[error("training set is empty after filtering")]
    EmptyTrainingSet,

    #[error("solver stopped after {iterations} iterations with KKT violation {violation:.3e}")]
    NotConverged { iterations: usize, violation: f64 },

    #[error("model file line {line}: {message}")]
    ModelFormat { line: usize, message: String },
}

/// Coarse grouping of errors, used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Io,
    Schema,
    Validation,
    Degenerate,
    Solver,
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        use Error::*;
        match self {
            Io(_) => ErrorCategory::Io,
            MissingColumn { .. }
            | ParseCell { .. }
            | MalformedRecord { .. }
            | ModelFormat { .. }
            | DimensionMismatch { .. } => ErrorCategory::Schema,
            NonMonotonicTimestamp { .. }
            | OutOfRange { .. }
            | TooFewSamples { .. }
            | InvalidParameter { .. }
            | NonFinite { .. }
            | AnnotationCoverage { .. }
            | LengthMismatch { .. } => ErrorCategory::Validation,
            Empty { .. } | ZeroVariance { .. } | EmptyTrainingSet => ErrorCategory::Degenerate,
            NotConverged { .. } => ErrorCategory::Solver,
        }
    }
}
