use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("operator matrix is not symmetric at ({row}, {col}): |H[a][b] - H[b][a]| = {delta:e}")]
    Asymmetric { row: usize, col: usize, delta: f64 },

    #[error("operator maps configuration {from:#b} outside the basis (to {to:#b})")]
    SectorLeak { from: u64, to: u64 },

    #[error("eigensolver did not converge after {iterations} iterations (residual norm {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("orbits {first} and {second} share the class label {label}")]
    LabelCollision {
        label: String,
        first: String,
        second: String,
    },

    #[error("states overlap with |Δ| = {delta} too close to 2")]
    DegenerateOverlap { delta: f64 },

    #[error("schema mismatch: {0}")]
    Schema(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Whether the error stems from bad input rather than a failed computation.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::InvalidArgument(_) | Error::Schema(_) | Error::Json(_) | Error::Csv(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
