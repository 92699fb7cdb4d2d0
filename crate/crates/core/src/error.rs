use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum Error {
    #[error("degenerate board {m}x{n}: {reason}")]
    DegenerateDims {
        m: u32,
        n: u32,
        reason: &'static str,
    },

    #[error("illegal position: {0}")]
    IllegalPosition(String),

    #[error("illegal move: {0}")]
    IllegalMove(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("board mismatch: tablebase is {expected}, position is {found}")]
    DimsMismatch { expected: String, found: String },

    #[error("index {index} out of range (size {size})")]
    IndexOutOfRange { index: u64, size: u64 },

    #[error("position is not a forced win: {0}")]
    NotWinning(String),

    #[error("no wins on {0}")]
    NoWins(String),

    #[error("family geometry: {0}")]
    Geometry(String),

    #[error("tablebase format: {0}")]
    Format(String),

    #[error("formula fit: {0}")]
    Fit(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
