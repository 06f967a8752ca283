use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),

    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("quantization grid is empty")]
    EmptyGrid,

    #[error("non-deterministic rule set: {0}")]
    Nondeterministic(String),

    #[error("wrong weight variant: {0}")]
    WrongVariant(String),

    #[error("k-means quantizer used before fitting")]
    UnfittedKMeans,

    #[error("extraction did not close within {limit} nodes (frontier size {frontier})")]
    NonClosure { limit: usize, frontier: usize },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}
