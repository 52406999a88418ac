//! Error type shared across the crate.

use std::path::PathBuf;

/// Library-wide error.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Caller passed inconsistent or out-of-contract arguments.
    #[error("usage error: {0}")]
    Usage(String),
    /// A geometric regularity condition was violated (chart degenerate,
    /// latitude outside (-pi/2, pi/2), projection pole hit, ...).
    #[error("regularity error: {0}")]
    Regularity(String),
    /// A manifold constraint could not be satisfied at construction.
    #[error("constraint error: {0}")]
    Constraint(String),
    /// A numerical procedure failed to meet its contract.
    #[error("numerical error: {0}")]
    Numerical(String),
    /// Filesystem failure, with the offending path.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub fn regularity(msg: impl Into<String>) -> Self {
        Error::Regularity(msg.into())
    }

    pub fn constraint(msg: impl Into<String>) -> Self {
        Error::Constraint(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Process exit code convention: 2 usage, 3 i/o, 4 numerical/geometric.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 2,
            Error::Io { .. } => 3,
            Error::Regularity(_) | Error::Constraint(_) | Error::Numerical(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
