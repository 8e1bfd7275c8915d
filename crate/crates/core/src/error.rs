use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix is not Hermitian (||H - H^dagger||_F = {asymmetry:e})")]
    NotHermitian { asymmetry: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid tomogram data: {0}")]
    Data(String),

    #[error("missing tomogram slice {0}")]
    MissingSlice(String),

    #[error("numerical failure: {0}")]
    Numeric(String),

    /// Two independent computations of the same quantity disagree.
    #[error("cross-check failed: {0}")]
    CrossCheck(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
