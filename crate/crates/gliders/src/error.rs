use thiserror::Error;

/// Errors shared by every module in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("state {state} out of range for alphabet of size {alphabet}")]
    StateOutOfRange { state: u8, alphabet: u8 },

    #[error("configuration window must contain at least one cell")]
    EmptyWindow,

    #[error("window of {got} cells is too short: need at least {need}")]
    WindowTooShort { need: usize, got: usize },

    #[error("local rule over alphabet {rule_alphabet} applied to window over alphabet {window_alphabet}")]
    AlphabetMismatch { rule_alphabet: u8, window_alphabet: u8 },

    #[error("local rule expects {expected} cells, got {got}")]
    NeighbourhoodLengthMismatch { expected: usize, got: usize },

    #[error("invalid speed pair ({v_minus}, {v_plus}): {reason}")]
    InvalidSpeeds { v_minus: i64, v_plus: i64, reason: &'static str },

    #[error("walk must contain index 0 (domain is [{lo}, {hi}])")]
    WalkMissingOrigin { lo: i64, hi: i64 },

    #[error("walk domain [{lo}, {hi}] does not cover the required range [{need_lo}, {need_hi}]")]
    WalkDomainTooSmall {
        lo: i64,
        hi: i64,
        need_lo: i64,
        need_hi: i64,
    },

    #[error("walk increment at index {index} is {increment}; only -1, 0, +1 are allowed")]
    WalkIncrementOutOfRange { index: i64, increment: i64 },

    #[error("walk anchored at M(0) = {value}; must be 0")]
    WalkNotAnchored { value: i64 },

    #[error("invalid sampler: {0}")]
    InvalidSampler(String),

    #[error("invalid factor `{name}`: {reason}")]
    InvalidFactor { name: String, reason: String },

    #[error("{0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Shorthand for the free-form argument error.
    pub fn arg(msg: impl Into<String>) -> Error {
        Error::InvalidArgument(msg.into())
    }
}
