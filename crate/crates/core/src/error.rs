use thiserror::Error;

/// Errors produced by model construction, discretization, synthesis and fitting.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid transfer function: {0}")]
    InvalidModel(String),

    #[error("improper transfer function: numerator degree exceeds denominator degree by {excess}")]
    Improper { excess: usize },

    #[error("discretization failed: {0}")]
    Discretization(String),

    #[error("feedforward synthesis infeasible: {0}")]
    InfeasibleSynthesis(String),

    #[error("identification failed: {0}")]
    Identification(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("simulation aborted: non-finite value at step {step} in signal {signal}")]
    NonFinite { step: usize, signal: String },

    #[error("metrics: {0}")]
    Metrics(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
