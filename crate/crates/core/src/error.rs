use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error("block of odd size {0} cannot be broken into pairs")]
    OddBlock(usize),
    #[error("graph is not connected")]
    Disconnected,
    #[error("numerical convergence failure: {0}")]
    Convergence(String),
    #[error("variance cap exceeded: relative error {rel_err:.3e} above cap {cap:.3e}")]
    VarianceCap { rel_err: f64, cap: f64 },
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;
