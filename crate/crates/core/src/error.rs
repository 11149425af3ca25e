use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("series too short: need at least {needed} observations, got {got}")]
    Length { needed: usize, got: usize },

    #[error("empty series")]
    Empty,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("non-finite value at index {0}")]
    NonFinite(usize),

    #[error("row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("row {row}: invariant violated: {message}")]
    Invariant { row: usize, message: String },

    #[error("wavelet grids do not match")]
    GridMismatch,

    #[error("degenerate variance: series is constant")]
    DegenerateVariance,

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("cache does not belong to this forward pass: {0}")]
    CacheMismatch(String),

    #[error("training diverged at epoch {epoch}: loss is not finite")]
    Divergence { epoch: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("training window {window} must exceed lag {lag}")]
    WindowTooSmall { window: usize, lag: usize },

    #[error("actual value at index {index} is too close to zero ({value})")]
    NearZeroActual { index: usize, value: f64 },

    #[error("duplicate run configuration: {0}")]
    DuplicateConfig(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
