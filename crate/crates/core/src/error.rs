use thiserror::Error;

/// Errors shared by every analysis in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix is singular or numerically singular")]
    SingularMatrix,

    #[error("metric {metric} is incompatible with {what}")]
    IncompatibleMetric { metric: String, what: String },

    #[error("enumeration box has {candidates} candidates, above the limit of {limit} (integer box {box_shape:?})")]
    ResourceLimit {
        candidates: f64,
        limit: f64,
        box_shape: Vec<i64>,
    },

    #[error("overlap measure {estimate} is indistinguishable from zero (stderr {stderr})")]
    DegenerateDomain { estimate: f64, stderr: f64 },

    #[error("evaluation at the identity with an unbounded family")]
    SingularPoint,

    #[error("family has no declared truncation and none can be certified: {0}")]
    UndeclaredTruncation(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
