use thiserror::Error;

/// Errors raised by the numeric core, environments, buffers and trainers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("non-finite {what} at layer {layer}, index {index}")]
    NonFinite {
        what: &'static str,
        layer: usize,
        index: usize,
    },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("replay buffer is empty")]
    EmptyBuffer,

    #[error("numeric failure at step {step}: {detail}")]
    Numeric { step: u64, detail: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
