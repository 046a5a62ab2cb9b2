use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("argument error: {0}")]
    Argument(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("numerical consistency error: {0}")]
    NumericalConsistency(String),

    #[error("scale error: {0}")]
    Scale(String),

    #[error("inconsistent coefficients: {0}")]
    InconsistentCoefficients(String),

    #[error("unsupported input: {0}")]
    UnsupportedInput(String),

    #[error("reconstruction failed at n = {n}: {reason}")]
    Reconstruction { n: usize, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
