use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its admissible domain.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Two inputs disagree on a dimension.
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("index {index} out of range 1..={len}")]
    Index { index: usize, len: usize },

    #[error("cannot draw {requested} scenarios from a pool of {available} observations")]
    Sampling { requested: usize, available: usize },

    #[error("solver failure: {0}")]
    Solver(#[from] crate::milp::SolverError),

    #[error("window starting at interval {window}: {source}")]
    Window {
        window: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("cell {cell}: {source}")]
    Cell {
        cell: String,
        #[source]
        source: Box<Error>,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.to_string(),
        }
    }

    /// True when the failure originates in the optimizer rather than in the
    /// inputs or the file system.
    pub fn is_solver_failure(&self) -> bool {
        match self {
            Error::Solver(_) => true,
            Error::Window { source, .. } | Error::Cell { source, .. } => source.is_solver_failure(),
            _ => false,
        }
    }
}
