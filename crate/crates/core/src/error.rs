use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the domain of a mathematical operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid vortex sheet: {0}")]
    InvalidSheet(String),

    #[error("integration blew up at step {step} (t = {time}): non-finite position")]
    BlowUp { step: usize, time: f64 },

    #[error("relative drift of H^eps is {drift:e} at t = {time}, above tolerance {tolerance:e}")]
    DriftExceeded {
        time: f64,
        drift: f64,
        tolerance: f64,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("corrupt snapshot {path}: {reason}")]
    CorruptSnapshot { path: PathBuf, reason: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
