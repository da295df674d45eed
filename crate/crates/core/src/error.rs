//! Error type shared by all solver modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum WideError {
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("conditioning guard violated: T/eps = {t_over_eps:.3} exceeds {limit}")]
    ConditioningGuard { t_over_eps: f64, limit: f64 },

    #[error("non-finite value encountered at iteration {iteration}: {context}")]
    NonFinite { iteration: usize, context: String },

    #[error("time integration unstable: {0}")]
    Instability(String),

    #[error("invalid reporting window: {0}")]
    Window(String),

    #[error("solver did not converge: {0}")]
    NotConverged(String),
}

pub type Result<T> = std::result::Result<T, WideError>;
