use thiserror::Error;

/// Errors produced by model construction and inference.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("observation payload does not match the output model variant: {0}")]
    PayloadMismatch(String),

    #[error(
        "propagation failed to converge after {refinements} refinements \
         ({steps} steps): last gap {gap:.3e} exceeds {target:.3e}"
    )]
    Convergence {
        refinements: u32,
        steps: u64,
        gap: f64,
        target: f64,
    },

    #[error("update undefined: upper probability of observation is zero")]
    UpdateUndefined,

    #[error("enumeration guard exceeded: {count} grid processes, limit {guard}")]
    EnumerationGuard { count: u128, guard: u128 },

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
