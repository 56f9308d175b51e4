use thiserror::Error;

/// Errors raised anywhere in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MorError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("axis mismatch: {0}")]
    AxisMismatch(String),
    #[error("stratum mismatch: {0}")]
    StratumMismatch(String),
    #[error("chain mismatch: {0}")]
    ChainMismatch(String),
    #[error("order violation: {0}")]
    OrderViolation(String),
    #[error("not fusible: {0}")]
    NotFusible(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("tail mass {mass:e} exceeds the allowed {limit:e}")]
    TailMass { mass: f64, limit: f64 },
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("parse error at {line}:{column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("validation error in `{name}`: {source}")]
    Validation {
        name: String,
        #[source]
        source: Box<MorError>,
    },
    #[error("unknown command `{0}`")]
    UnknownCommand(String),
    #[error("usage: {0}")]
    Usage(String),
}

pub type Result<T> = std::result::Result<T, MorError>;
