//! Error taxonomy shared by every module in the crate.

use thiserror::Error;

/// Unified error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A vector had a different length than the context requires.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// An operation that needs at least one element received none.
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    /// A parameter or configuration value is outside its legal range.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Two training/archive points share the same decision vector.
    #[error("duplicate decision vector (entries {0} and {1})")]
    DuplicatePoint(usize, usize),

    /// A kernel matrix stayed non-positive-definite even after the nugget
    /// was escalated to its ceiling.
    #[error("kernel matrix not positive definite even with nugget {nugget:e}")]
    Conditioning { nugget: f64 },

    /// A decision vector produced a self-intersecting or otherwise unusable
    /// geometry.
    #[error("infeasible geometry: {0}")]
    InfeasibleGeometry(String),

    /// An external evaluation failed (non-zero exit, timeout, unparseable
    /// output, or non-finite objective values).
    #[error("evaluation failure: {0}")]
    EvaluationFailure(String),

    /// A decision variable violated its box bounds.
    #[error("coordinate {dim} = {value} outside [{lo}, {hi}]")]
    OutOfBounds {
        dim: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },

    /// Malformed persisted data (archive CSV, config JSON, run directory).
    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Shorthand used by validation code throughout the crate.
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
