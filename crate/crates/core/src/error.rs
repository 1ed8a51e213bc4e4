use thiserror::Error;

/// Errors raised by the spectral-transport library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is empty")]
    EmptyMatrix,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix contains a non-finite entry")]
    NonFinite,

    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),

    #[error("invalid algebra: {0}")]
    InvalidAlgebra(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("pure state index {index} out of range for {len} pure states")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("operation requires a {expected} algebra")]
    WrongAlgebra { expected: &'static str },

    #[error("state {0} is not pure")]
    NotPure(usize),

    #[error(
        "solver did not converge after {iterations} iterations (value bracketed in [{lower}, {upper}])"
    )]
    NotConverged {
        iterations: usize,
        lower: f64,
        upper: f64,
    },

    #[error("pair ({i}, {j}): {source}")]
    Pair {
        i: usize,
        j: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid marginals: {0}")]
    InvalidMarginals(String),

    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("linear program failed: {0}")]
    Lp(String),
}

pub type Result<T> = std::result::Result<T, Error>;
