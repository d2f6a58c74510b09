//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("operator is not Hermitian: max asymmetry {asymmetry:.3e} exceeds {tolerance:.3e} (relative)")]
    NotHermitian { asymmetry: f64, tolerance: f64 },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("Hilbert-space dimension {dim} exceeds cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("ambiguous adiabatic labeling at ramp step {step}: states {a} and {b} overlap within {gap:.3e}")]
    AmbiguousLabeling { step: usize, a: usize, b: usize, gap: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("no sign change in grid: {0}")]
    NoBracket(String),

    #[error("fit did not converge: {0}")]
    FitDidNotConverge(String),
}
