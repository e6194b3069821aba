use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConicError {
    #[error("malformed program: {0}")]
    Malformed(String),
    #[error("point has {got} entries, program has {expected} variables")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("unknown solver backend `{0}`")]
    UnknownSolver(String),
}
