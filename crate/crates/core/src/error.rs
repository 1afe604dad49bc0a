use thiserror::Error;

use crate::classify::CInterval;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("matrix order {0} is outside 1..={max}", max = crate::numkernel::MAX_ORDER)]
    InvalidOrder(usize),
    #[error("matrix data has {got} entries, expected {expected}")]
    BadShape { expected: usize, got: usize },
    #[error("non-finite matrix entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("tolerance must lie in (0, 1), got {0}")]
    InvalidTolerance(f64),
    #[error("singular matrix: pivot {pivot:.3e} in column {column}")]
    SingularMatrix { column: usize, pivot: f64 },
    #[error("matrix is not unitary (deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },
    #[error("matrix is not Hermitian unitary")]
    NotHermitianUnitary,
    #[error("a = {a}, a + n b = {a_nb}: both must have unit modulus")]
    NotUnitaryPs { a: String, a_nb: String },
    #[error("Gram system is singular: U is a scalar multiple of the identity")]
    DegenerateGram,
    #[error("U has more than two eigenvalues (closure residual {residual:.3e})")]
    MoreThanTwoEigenvalues { residual: f64 },
    #[error("numerical inconsistency: {0}")]
    NumericalInconsistency(String),
    #[error("spectral form is degenerate (alpha = beta)")]
    DegenerateForm,
    #[error("momentum must be positive and finite, got {0}")]
    InvalidMomentum(f64),
    #[error("invalid momentum grid: {0}")]
    InvalidGrid(String),
    #[error("reference entry M[{row}][{col}] is zero")]
    ZeroReference { row: usize, col: usize },
    #[error("matrix is not a non-diagonal Hermitian unitary MPS matrix")]
    NotMps,
    #[error("xi = {0} must lie in (-pi/2, pi/2) and be non-zero")]
    InvalidXi(f64),
    #[error("c = {c} is outside the admissible interval {interval}")]
    COutOfRange { c: f64, interval: CInterval },
    #[error("invalid design parameter: {0}")]
    InvalidParameter(String),
    #[error("order {n} is too large for exhaustive search (max {max})")]
    OrderTooLarge { n: usize, max: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
