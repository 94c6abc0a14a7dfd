use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input")]
    EmptyInput,

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: String, actual: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("eigen-block {block} is singular")]
    SingularBlock { block: usize },

    #[error("matrix is singular (pivot {pivot} vanished)")]
    Singular { pivot: usize },

    #[error("matrix is not positive definite (failed at column {column})")]
    NotPositiveDefinite { column: usize },

    #[error(
        "modulation matrix is singular (smallest singular value {min_singular_value:.3e}); \
         choose a different rolloff or a nonzero noise variance"
    )]
    SingularModulation { min_singular_value: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn dims(expected: impl ToString, actual: impl ToString) -> Self {
        Error::DimensionMismatch {
            expected: expected.to_string(),
            actual: actual.to_string(),
        }
    }
}
