use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("empty embedding file")]
    EmptyEmbeddings,

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("duplicate token `{0}`")]
    DuplicateToken(String),

    #[error("non-finite component in vector for `{0}`")]
    NonFinite(String),

    #[error("zero-norm vector{}", .0.as_deref().map(|t| format!(" for `{t}`")).unwrap_or_default())]
    ZeroNorm(Option<String>),

    #[error("token `{0}` not in embedding space")]
    UnknownToken(String),

    #[error("line {line}: expected 3 tab-separated columns, found {found}")]
    ColumnCount { line: usize, found: usize },

    #[error("duplicate phrase triple ({0}, {1}, {2})")]
    DuplicateTriple(String, String, String),

    #[error("invalid phrase record: {0}")]
    InvalidRecord(String),

    #[error("dataset has {actual} records, at least {required} required")]
    DatasetTooSmall { required: usize, actual: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{kind} requires {what}")]
    MissingArgument { kind: &'static str, what: &'static str },

    #[error("lexicalized model requires word ids for both constituents")]
    MissingWordIds,

    #[error("lexical row {row} out of range for vocabulary of {vocab_size}")]
    LexicalRowOutOfRange { row: usize, vocab_size: usize },

    #[error("nearest-neighbor fallback needs a non-empty training vocabulary")]
    EmptyTrainVocabulary,

    #[error("empty batch")]
    EmptyBatch,

    #[error("gradient shape mismatch for `{0}`")]
    ShapeMismatch(String),

    #[error("training diverged at epoch {epoch}: loss is {loss}")]
    Diverged { epoch: usize, loss: f64 },

    #[error("model kind {0} does not support this operation")]
    UnsupportedKind(&'static str),

    #[error("dropout rate {0} outside the allowed range")]
    DropoutRate(f64),

    #[error("empty rank list")]
    EmptyRanks,

    #[error("report invariant violated: {0}")]
    InvalidReport(String),

    #[error("malformed checkpoint: {0}")]
    Checkpoint(String),

    #[error("JSON serialization failed: {0}")]
    Json(#[from] serde_json::Error),
}
