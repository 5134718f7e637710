use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Invalid or missing configuration, including input tables.
    #[error("configuration error: {0}")]
    Config(String),

    /// A parameter fit could not be carried out.
    #[error("calibration error: {0}")]
    Calibration(String),

    /// The transition model is internally inconsistent, e.g. event
    /// probabilities for a state sum above one.
    #[error("model error: {0}")]
    Model(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Calibration(_) => 2,
            Error::Domain(_) | Error::Model(_) => 3,
            Error::Io { .. } => 4,
        }
    }
}
