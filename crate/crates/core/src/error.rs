use thiserror::Error;

/// Errors raised by the channel estimation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("root {root} is not coprime with sequence length {len}")]
    InvalidRoot { root: u64, len: usize },

    #[error("singular system: {0}")]
    Singular(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("numerical failure at iteration {iteration}: {reason}")]
    Numerical { iteration: usize, reason: String },

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
