use thiserror::Error;

/// Errors produced by the bound calculus, the matrix layer and the simulation harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("root finding did not converge: {0}")]
    Convergence(String),
    #[error("factorization failed: {0}")]
    Factorization(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("bound violation: {0}")]
    BoundViolation(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Stable machine-readable code, used by the CLI and the C ABI.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Domain(_) => "DOMAIN",
            Error::Convergence(_) => "CONVERGENCE",
            Error::Factorization(_) => "FACTORIZATION",
            Error::DimensionMismatch { .. } => "DIMENSION_MISMATCH",
            Error::BoundViolation(_) => "BOUND_VIOLATION",
            Error::Config(_) => "CONFIG",
            Error::Io(_) => "IO",
        }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
