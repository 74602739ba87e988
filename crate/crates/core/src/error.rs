//! Crate-wide error type. Variants are grouped so binaries can map them onto
//! process exit codes: configuration and domain misuse, bad data, and
//! training divergence.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration or argument values supplied by the caller.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A value outside the documented domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Tensor or vector dimensions that do not line up.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// Ingested data that violates its schema or integrity contract.
    #[error("data error: {0}")]
    Data(String),

    /// A judgment column whose observed range collapses to a point.
    #[error("degenerate judgment scale: {0}")]
    DegenerateScale(String),

    /// A metric that is undefined for the given inputs.
    #[error("metric undefined: {0}")]
    UndefinedMetric(String),

    /// Non-finite losses or gradients during optimization.
    #[error("training diverged: {0}")]
    Divergence(String),

    /// Filesystem failure with the offending path attached.
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// Unreadable or version-incompatible model file.
    #[error("model format error: {0}")]
    ModelFormat(String),
}

impl Error {
    /// Process exit code for binaries: 1 usage, 2 data, 3 divergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Domain(_) | Error::Shape(_) => 1,
            Error::Data(_)
            | Error::DegenerateScale(_)
            | Error::UndefinedMetric(_)
            | Error::Io { .. }
            | Error::ModelFormat(_) => 2,
            Error::Divergence(_) => 3,
        }
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::Io { path: path.display().to_string(), source }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
