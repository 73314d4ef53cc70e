use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("partition overlap at atom {atom}")]
    PartitionOverlap { atom: usize },

    #[error("partition does not cover atom {atom}")]
    PartitionGap { atom: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("unsupported combination: {0}")]
    Unsupported(String),

    #[error("certificate sequence does not converge to 1 at atom {atom} (|eta - 1| = {deviation:e})")]
    NonConvergence { atom: usize, deviation: f64 },

    #[error("sigma-stability violated: {0}")]
    SigmaStability(String),

    #[error("invalid scenario: {0}")]
    Config(String),

    #[error("sequence generator failed its own certificate: {0}")]
    Generator(String),

    #[error("io error on {path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn io(path: &std::path::Path, err: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }
}

pub(crate) fn ensure_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::Dimension { expected, found })
    }
}
