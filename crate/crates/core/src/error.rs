use thiserror::Error;

/// Errors surfaced by the learner and harness layer.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid loss vector: {0}")]
    InvalidLoss(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("fixed-point solve did not converge (residual {residual:.3e})")]
    Numerical { residual: f64 },

    #[error("instance too large for exact enumeration ({branches} branches, cap {cap}); use the Monte Carlo variant")]
    InstanceTooLarge { branches: u128, cap: u128 },

    #[error("golden fixture mismatch: {0}")]
    GoldenMismatch(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
