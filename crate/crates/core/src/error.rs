use thiserror::Error;

/// Errors raised by the estimation engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not Hermitian (max asymmetry {asymmetry:e}, tolerance {tolerance:e})")]
    NotHermitian { asymmetry: f64, tolerance: f64 },

    #[error("not a density matrix: {0}")]
    NotDensity(String),

    #[error("matrix is near-singular (det = {det:e})")]
    Singular { det: f64 },

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("invalid quadrature grid: {0}")]
    InvalidGrid(String),

    #[error("derivative has weight {weight:e} outside the support of the state")]
    OutsideSupport { weight: f64 },

    #[error("POVM is not valid: {0}")]
    InvalidPovm(String),

    #[error("negative outcome probability {0:e}")]
    NegativeProbability(f64),

    #[error(
        "outcome {outcome} of mode {mode} has zero probability but derivative {derivative:e}"
    )]
    SingularOutcome {
        mode: String,
        outcome: usize,
        derivative: f64,
    },

    #[error("operation not supported: {0}")]
    Unsupported(String),

    #[error("too few replications: {got} (need at least {min}): {reason}")]
    TooFewReplications {
        got: usize,
        min: usize,
        reason: &'static str,
    },

    #[error("experiment has no records")]
    EmptyExperiment,
}

pub type Result<T> = std::result::Result<T, Error>;
