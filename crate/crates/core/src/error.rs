use thiserror::Error;

pub type Result<T> = std::result::Result<T, BlochError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BlochError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix must have dimension at least {min}, got {found}")]
    DimensionTooSmall { min: usize, found: usize },

    #[error("malformed matrix: {0}")]
    MalformedMatrix(String),

    #[error("matrix is not Hermitian (max deviation {max_deviation:e})")]
    NotHermitian { max_deviation: f64 },

    #[error("basis is not unitary (residual {residual:e})")]
    NotUnitary { residual: f64 },

    #[error("invalid spin {0}: 2s must be a positive integer")]
    InvalidSpin(f64),

    #[error("projection {mu} is not one of -s..s for spin {s}")]
    InvalidProjection { s: f64, mu: f64 },

    #[error("invalid direction: {0}")]
    InvalidDirection(String),

    #[error("not a density matrix: {0}")]
    NotAState(String),

    #[error("operator is not a rank-one projector (purity {purity})")]
    NotRankOne { purity: f64 },

    #[error("Bloch vector norm {norm} exceeds 1")]
    OutsideBall { norm: f64 },

    #[error("eigenstate family is not orthonormal (residual {residual:e})")]
    NotOrthonormal { residual: f64 },

    #[error("outcome group has zero probability ({probability:e})")]
    ZeroProbability { probability: f64 },

    #[error("all barycentric weights vanish")]
    AllWeightsZero,

    #[error("space vector and simplex come from different observables")]
    MismatchedObservable,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("eigensolver did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
}
