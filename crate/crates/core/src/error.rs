use std::path::PathBuf;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("non-finite value encountered: {0}")]
    NonFinite(String),
    #[error("invalid parameter: {0}")]
    BadParam(String),
    #[error("kernel `{view}` has a non-positive diagonal entry at {index}")]
    ZeroDiagonal { view: String, index: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("kernel `{view}` is asymmetric (max |K_ij - K_ji| = {asymmetry:e})")]
    AsymmetricKernel { view: String, asymmetry: f64 },
    #[error("need at least {k} points, got {n}")]
    TooFewPoints { n: usize, k: usize },
    #[error("label vectors differ in length ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("corrupt matrix header: {0}")]
    CorruptHeader(String),
    #[error("truncated matrix data: {0}")]
    TruncatedData(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("missing file: {}", .0.display())]
    MissingFile(PathBuf),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
