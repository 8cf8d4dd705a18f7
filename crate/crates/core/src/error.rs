use crate::tensor::Shape4;

pub type Result<T> = std::result::Result<T, Error>;

/// Library-wide error type. Variants map onto the CLI's exit-code
/// categories: everything except `Io` is a configuration/usage problem.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("coordinate ({0}, {1}, {2}, {3}) out of range for shape {4}")]
    OutOfRange(usize, usize, usize, usize, Shape4),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid tile configuration: {0}")]
    Tiles(String),

    #[error("unknown name: {0}")]
    Lookup(String),

    #[error("tuning record key mismatch: record is for `{found}`, requested `{expected}`")]
    KeyMismatch { expected: String, found: String },

    #[error("parse error in {origin} line {line}: {msg}")]
    Parse {
        origin: String,
        line: usize,
        msg: String,
    },

    #[error("tuning failed: {0}")]
    Tuning(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn shape(msg: impl Into<String>) -> Self {
        Error::ShapeMismatch(msg.into())
    }
}
