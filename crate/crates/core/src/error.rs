use thiserror::Error;

/// Errors produced by every stage of the spectral pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Input data that parsed but violates a geometric or structural invariant.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("resource limit: estimated {estimated} lattice vertices exceeds cap {cap}")]
    ResourceLimit { estimated: u64, cap: u64 },

    #[error("eigensolver did not converge after {iterations} iterations (worst residual {worst:.3e})")]
    Convergence {
        iterations: usize,
        worst: f64,
        residuals: Vec<f64>,
    },

    #[error("internal consistency: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid_arg(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

pub(crate) fn invalid_input(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
