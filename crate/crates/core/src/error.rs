use thiserror::Error;

/// Failure modes of the numeric routines.
///
/// Values are carried as `f64` so the error type stays independent of the
/// scalar the computation ran in.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("normalization failure: integral {integral} deviates from 1 by more than {tol}")]
    Normalization { integral: f64, tol: f64 },

    #[error("frame (0, 0) is not a valid reference frame")]
    DegenerateFrame,

    #[error("missing frame ({mu}, {nu}) in sampled tomogram")]
    MissingFrame { mu: f64, nu: f64 },

    #[error("scale parameter component {index} is zero")]
    ZeroScale { index: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("support truncated: lost mass {lost} exceeds tolerance {tol}")]
    Truncation { lost: f64, tol: f64 },

    #[error("insufficient angular coverage: largest gap {gap} rad exceeds {max_gap} rad")]
    Coverage { gap: f64, max_gap: f64 },

    #[error("correlation coefficient |r| = {r} is not below 1")]
    Correlation { r: f64 },

    #[error("matrix is not Hermitian: deviation {deviation}")]
    NotHermitian { deviation: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("not admissible: {0}")]
    NotAdmissible(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
