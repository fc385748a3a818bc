use thiserror::Error;

/// Errors raised by the analysis, simulation and reconciliation routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("Fock truncation at n_cut = {n_cut} loses {deficit:.3e} of the norm (limit {limit:.1e})")]
    Truncation { n_cut: usize, deficit: f64, limit: f64 },

    #[error("index {index} out of range for a {size}-state constellation")]
    IndexOutOfRange { index: usize, size: usize },

    #[error("unphysical covariance matrix: smallest symplectic eigenvalue {nu_min} < 1")]
    Unphysical { nu_min: f64 },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("malformed input: {0}")]
    Format(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
