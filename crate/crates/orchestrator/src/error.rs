use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] gbse_core::Error),
    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("config key `{key}`: {msg}")]
    InvalidValue { key: String, msg: String },
    #[error("cache entry: {0}")]
    Cache(String),
    #[error("reference data line {line}: {msg}")]
    Reference { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
