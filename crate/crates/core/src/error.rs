use thiserror::Error;

/// Errors produced by the estimator library and the experiment harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A hypothesis required by the requested experiment does not hold.
    #[error("hypothesis gate: {0}")]
    Gate(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("quadrature did not converge on [{lo}, {hi}]: estimated error {error:e} > tolerance {tolerance:e}")]
    Quadrature {
        lo: f64,
        hi: f64,
        error: f64,
        tolerance: f64,
    },

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("{0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn gate(msg: impl Into<String>) -> Self {
        Error::Gate(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
