use std::path::PathBuf;

/// Errors produced anywhere in the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("length {0} is not a power of two >= 2")]
    NotPowerOfTwo(usize),
    #[error("information length {k} out of range for code length {n}")]
    InfoLengthOutOfRange { k: usize, n: usize },
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("duplicate index {0} in reliability order")]
    DuplicateIndex(usize),
    #[error("index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("repetition factor {0} must be a power of two >= 2")]
    InvalidRepetition(usize),
    #[error("CRC width {width} must be smaller than word length {len}")]
    CrcTooWide { width: usize, len: usize },
    #[error("non-finite LLR at position {0}")]
    NonFiniteLlr(usize),
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Write(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn io_error(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Error {
    let path = path.into();
    move |source| Error::Io { path, source }
}
