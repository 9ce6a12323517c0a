//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by kernels, identity builders and the likelihood layer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("matrix entry at ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not symmetric positive-definite (pivot {pivot:.3e} at step {step})")]
    NotSpd { step: usize, pivot: f64 },

    #[error("matrix is not symmetric (relative asymmetry {asym:.3e})")]
    NotSymmetric { asym: f64 },

    #[error("matrix is singular to tolerance (pivot {pivot:.3e} at step {step})")]
    SingularToTolerance { step: usize, pivot: f64 },

    #[error("triangular matrix has a near-zero diagonal entry at {index}")]
    ZeroDiagonal { index: usize },

    #[error("rank-deficient input: column {col} has negligible norm after projection")]
    RankDeficient { col: usize },

    #[error("bad parameters: {0}")]
    BadParams(String),

    #[error("matrix of size {n} exceeds the oracle limit {max}")]
    TooLarge { n: usize, max: usize },

    #[error("matrix is not EP (commutator residual {residual:.3e})")]
    NotEp { residual: f64 },

    #[error("index of M is not one")]
    IndexNotOne,

    #[error("kernel/coimage overlap condition fails (rank {found} < {expected})")]
    KernelOverlap { found: usize, expected: usize },

    #[error("structural kernel path requested but rank conditions do not hold")]
    ConditionsFailed,

    #[error("subspaces are not complementary to tolerance")]
    NotComplementary,

    #[error("matrix N = I - P + A P is singular to tolerance")]
    SingularN,

    #[error("restricted matrix P_S_perp + A P_S is singular")]
    SingularRestriction,

    #[error("W = X^T A^-1 X is singular to tolerance")]
    SingularW,

    #[error("Neumann series diverges: t * lambda_max = {ratio:.6} >= 1")]
    Divergent { ratio: f64 },

    #[error("likelihood routes disagree: direct {direct:.12e} vs woodbury {woodbury:.12e}")]
    RoutesDisagree { direct: f64, woodbury: f64 },

    #[error("bad file format: {0}")]
    BadFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
