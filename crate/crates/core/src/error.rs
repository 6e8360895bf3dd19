use thiserror::Error;

/// Errors raised by the channel sampler, beamformers, scheme analysis,
/// region tests and the sweep harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// The stacked constraint rows have full numerical rank, so no nonzero
    /// vector is orthogonal to all of them.
    #[error("null space is empty (rows have rank {rank} in dimension {dim})")]
    NullSpaceEmpty { rank: usize, dim: usize },

    #[error("cannot normalize a zero vector")]
    ZeroVector,

    #[error("invalid scheme `{name}`: {violations} violation(s)")]
    InvalidScheme { name: String, violations: usize },

    #[error("malformed scheme: {0}")]
    MalformedScheme(String),

    #[error("unsupported user count K={k} for {scheme} (allowed {min}..={max})")]
    UnsupportedK {
        scheme: String,
        k: usize,
        min: usize,
        max: usize,
    },

    #[error("slot mismatch: {0}")]
    SlotMismatch(String),

    #[error("need at least 2 points inside the regression window, got {0}")]
    InsufficientPoints(usize),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("unknown scheme `{0}`")]
    UnknownScheme(String),

    #[error("unknown region `{0}`")]
    UnknownRegion(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
