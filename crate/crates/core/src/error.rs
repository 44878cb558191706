use thiserror::Error;

/// Errors raised by the channel, protocol and analysis layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("no secure channel established from receiver {from} to receiver {to}")]
    MissingSecureChannel { from: usize, to: usize },

    #[error("incomplete conditional table: {0}")]
    IncompleteTable(String),

    #[error("state space of 2^{bits} outcomes exceeds the exhaustive limit of 2^{limit}; use the sampling estimator")]
    StateSpaceTooLarge { bits: u32, limit: u32 },

    #[error("insufficient GHZ copies: need {needed}, have {available}")]
    InsufficientCopies { needed: usize, available: usize },

    #[error("invalid coalition: {0}")]
    InvalidCoalition(String),

    #[error("malformed transcript: {0}")]
    MalformedTranscript(String),

    #[error("randomness tape exhausted after {0} bits")]
    TapeExhausted(usize),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
