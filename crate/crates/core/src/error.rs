use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("{0} is not positive definite")]
    NotPositiveDefinite(&'static str),

    #[error("sample set is empty")]
    EmptySampleSet,

    #[error("block {index} of the information matrix is singular")]
    SingularBlock { index: usize },

    #[error("invalid step-size schedule: {0}")]
    InvalidSchedule(String),

    #[error("retraction hit a zero-norm point")]
    DegenerateRetraction,
}
