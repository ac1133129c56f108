use thiserror::Error;

use crate::zmod::Parity;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid modulus {0}")]
    InvalidModulus(i128),

    #[error("expected {expected} differences for this modulus, got {got}")]
    WrongCount { expected: usize, got: usize },

    #[error("difference #{index} ({value}) is not a unit modulo {modulus}")]
    NonUnit {
        /// 1-based position in the input list.
        index: usize,
        value: u64,
        modulus: u64,
    },

    #[error("modulus mismatch: {0} vs {1}")]
    ModulusMismatch(u64, u64),

    #[error("this operation needs an instance with {expected} modulus")]
    WrongParity { expected: Parity },

    #[error("modulus {modulus} exceeds the exhaustive-search bound {bound}")]
    TooLarge { modulus: u64, bound: u64 },

    #[error("parse error at {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Something a theorem rules out happened. Always a bug.
    #[error("internal invariant failure: {message}")]
    Internal { message: String, dump: String },
}

impl Error {
    pub(crate) fn internal(message: impl Into<String>, dump: impl Into<String>) -> Self {
        Error::Internal {
            message: message.into(),
            dump: dump.into(),
        }
    }
}
