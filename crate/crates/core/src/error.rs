use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("matrix is not Hermitian (defect {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("generator is not anti-Hermitian (defect {defect:.3e})")]
    NotAntiHermitian { defect: f64 },

    #[error("matrix is singular on the requested support")]
    Singular,

    #[error("ill-posed homodyne limit: {0}")]
    IllPosedHomodyne(String),

    #[error("operation requires the {expected} model")]
    WrongModel { expected: &'static str },

    #[error("expected {expected} free parameters, got {actual}")]
    WrongLength { expected: usize, actual: usize },

    #[error("truncation budget exceeded: tail weight {tail:.3e} > {tol:.3e} at N = {n}")]
    TruncationBudget { tail: f64, tol: f64, n: usize },

    #[error("optimizer failed to converge: {0}")]
    NonConvergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;
