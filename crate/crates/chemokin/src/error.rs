use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Engine(#[from] chemokin_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {msg}")]
    Input { path: PathBuf, msg: String },
    #[error("{failed} of {total} sweep runs failed")]
    Sweep { failed: usize, total: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Process exit status: 2 for bad input, 3 for numerical failures,
    /// 4 when part of a sweep failed.
    pub fn exit_code(&self) -> i32 {
        use chemokin_core::Error as E;
        match self {
            Error::Config(_) | Error::Input { .. } | Error::Io { .. } => 2,
            Error::Engine(
                E::Cfl { .. } | E::NonFinite(_) | E::NegativeDensity { .. } | E::ProbabilityExceedsOne { .. },
            ) => 3,
            Error::Engine(_) => 2,
            Error::Sweep { .. } => 4,
        }
    }
}
