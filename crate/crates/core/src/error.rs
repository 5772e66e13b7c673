use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("unknown letter {0:?}")]
    UnknownLetter(String),

    #[error("bad word: {0}")]
    BadWord(String),

    /// The requested operation is outside what the available oracles decide.
    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("element budget {budget} exceeded while building layer {layer} ({elements} elements enumerated)")]
    Budget {
        budget: usize,
        layer: usize,
        elements: usize,
    },

    #[error("refused: {0}")]
    Refused(String),

    /// An internal consistency check failed; this indicates a bug or an input
    /// that violates a stated precondition in a way only detectable late.
    #[error("consistency check failed: {0}")]
    Consistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;
