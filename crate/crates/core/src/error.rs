use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("sample is empty")]
    EmptySample,
    #[error("sample has zero variance")]
    ZeroVariance,
    #[error("degenerate law: centered second moment is {0}")]
    DegenerateLaw(f64),
    #[error("singular covariance matrix (det = {det})")]
    SingularCovariance { det: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("no numeric values in {0}")]
    EmptyInput(PathBuf),
    #[error("serialization error: {0}")]
    Serialization(String),
}
