use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),

    #[error("malformed PGM at byte {offset}: {reason}")]
    Parse { offset: usize, reason: String },

    #[error("unsupported image format: {0}")]
    UnsupportedFormat(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("pair sequence is empty")]
    EmptyPairs,

    #[error("decode failed in pass {pass}, pair {pair}: {reason}")]
    Decode {
        pass: usize,
        pair: usize,
        reason: String,
    },

    #[error("auxiliary stream exhausted")]
    AuxExhausted,

    #[error("payload underrun: needed {needed} bits, {available} available")]
    PayloadUnderrun { needed: usize, available: usize },

    #[error("truncated arithmetic-coded stream")]
    TruncatedStream,

    #[error("table mismatch: {0}")]
    TableMismatch(String),

    #[error("table cache: {0}")]
    Cache(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
