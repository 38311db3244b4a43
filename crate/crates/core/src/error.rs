use thiserror::Error;

/// Errors raised by the numerical routines and the file/CLI front-ends.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("function undefined at eigenvalue {0}")]
    Domain(f64),

    #[error("invalid state: {invariant} ({detail})")]
    InvalidState {
        invariant: &'static str,
        detail: String,
    },

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("eigendecomposition did not converge for a {0}x{0} matrix")]
    NoConvergence(usize),

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn state(invariant: &'static str, detail: impl Into<String>) -> Self {
        Error::InvalidState {
            invariant,
            detail: detail.into(),
        }
    }
}
