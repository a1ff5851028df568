use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: String, got: String },

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("columns are not orthonormal (residual {0:e})")]
    NotOrthonormal(f64),

    #[error("vector is not tangent at the base point (residual {0:e})")]
    NotTangent(f64),

    #[error("tangent vectors live at different base points")]
    BaseMismatch,

    #[error("retraction produced a non-SPD matrix; step rejected")]
    StepRejected,

    #[error("step rejected {0} consecutive times; aborting")]
    RetractionAborted(usize),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parameter out of range: {name} = {value} ({bound})")]
    OutOfRange {
        name: &'static str,
        value: f64,
        bound: String,
    },

    #[error("argument at or below a pole: {0}")]
    Pole(f64),

    #[error("model evaluation failed: {0}")]
    Model(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn dims(expected: impl ToString, got: impl ToString) -> Self {
        Error::DimensionMismatch {
            expected: expected.to_string(),
            got: got.to_string(),
        }
    }

    pub(crate) fn range(name: &'static str, value: f64, bound: impl Into<String>) -> Self {
        Error::OutOfRange {
            name,
            value,
            bound: bound.into(),
        }
    }
}
