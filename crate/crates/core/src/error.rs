use thiserror::Error;

/// Errors produced anywhere in the solver stack.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("basis index {index} out of range (space has {len} functions)")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("resonant wave number: k^2 = {k2} lies within {gap:e} of eigenvalue {eigenvalue}")]
    Resonance { k2: f64, eigenvalue: f64, gap: f64 },

    #[error("size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("zero diagonal entry in row {0}")]
    ZeroDiagonal(usize),

    #[error("rational Bezier denominator vanishes at t = {0}")]
    DegenerateDenominator(f64),

    #[error("point {0} lies outside the unit domain")]
    OutsideDomain(String),

    #[error("dense materialization of n = {n} exceeds the cap of {cap}")]
    CapExceeded { n: usize, cap: usize },

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
