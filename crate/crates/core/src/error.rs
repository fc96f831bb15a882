use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Geometric input is degenerate (too few points, collinear, ...).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// Caller violated a structural contract (mismatched sizes, missing affine part, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("linear solver failed: {0}")]
    Solver(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("registration diverged at level {level}, iteration {iteration}: loss is {loss}")]
    Divergence {
        level: usize,
        iteration: usize,
        loss: f64,
    },

    /// Malformed JSON document; `path` is the JSON path of the offending key.
    #[error("invalid document at `{path}`: {message}")]
    Schema { path: String, message: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {reason}", path.display())]
    Image { path: PathBuf, reason: String },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures caused by the filesystem or unreadable files rather
    /// than by bad arguments.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. } | Error::Image { .. })
    }
}
