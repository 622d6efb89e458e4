//! Crate-wide error type.

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad failure class, used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Io,
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: line {line}: {msg}")]
    Format {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("{path}: {msg}")]
    Grid { path: PathBuf, msg: String },

    #[error("configuration: {0}")]
    Config(String),

    #[error("hydrograph: {0}")]
    Hydrograph(String),

    #[error("non-finite {field} at cell ({i}, {j})")]
    NonFinite {
        field: &'static str,
        i: usize,
        j: usize,
    },

    #[error("negative {field} = {value:e} at cell ({i}, {j})")]
    NegativeThickness {
        field: &'static str,
        value: f64,
        i: usize,
        j: usize,
    },

    #[error("fixed time step {dt:e} violates CFL bound {limit:e}")]
    CflViolation { dt: f64, limit: f64 },

    #[error("reduction over an empty field")]
    EmptyReduction,
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Io { .. } | Error::Format { .. } | Error::Grid { .. } => ErrorKind::Io,
            Error::Config(_) | Error::Hydrograph(_) => ErrorKind::Config,
            Error::NonFinite { .. }
            | Error::NegativeThickness { .. }
            | Error::CflViolation { .. }
            | Error::EmptyReduction => ErrorKind::Numerical,
        }
    }
}
