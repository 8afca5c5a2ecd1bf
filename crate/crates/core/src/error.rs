use thiserror::Error;

/// Crate-wide error type. Variants are grouped by the kind of object whose
/// validation failed rather than by call site.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error("invalid gate: {0}")]
    InvalidGate(String),
    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),
    #[error("invalid noise model: {0}")]
    InvalidNoise(String),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
