use thiserror::Error;

/// Errors shared across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch: {context} (expected {expected}, got {got})")]
    LengthMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("coordinate out of range: lon {lon}, lat {lat}")]
    CoordinateOutOfRange { lon: f64, lat: f64 },

    #[error("zero-norm curve: angle undefined")]
    DegenerateAngle,

    #[error("insufficient sample: {context} (need {needed}, got {got})")]
    InsufficientSample {
        context: &'static str,
        needed: usize,
        got: usize,
    },

    #[error("empty member set")]
    EmptyMembers,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("ingest error: {0}")]
    Ingest(String),

    #[error("numeric failure: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;
