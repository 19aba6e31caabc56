use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("cannot parse {what} from {input:?}: {reason}")]
    Parse {
        what: &'static str,
        input: String,
        reason: String,
    },

    #[error("resource bound exceeded: {0}")]
    Resource(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("rank deficient: {reason} (at least {required} coefficients needed, have {available})")]
    RankDeficient {
        reason: String,
        required: usize,
        available: usize,
    },

    #[error("series is not reproduced by the quasimodular basis: {0}")]
    NotQuasimodular(String),

    #[error("corrupt data in {}: {reason}", path.display())]
    Data { path: PathBuf, reason: String },

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Whether the error reflects a mathematical failure (as opposed to bad
    /// input or I/O).
    pub fn is_mathematical(&self) -> bool {
        matches!(
            self,
            Error::RankDeficient { .. } | Error::NotQuasimodular(_) | Error::Domain(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
