//! Crate-wide error type with a stable exit-code mapping for the CLI.

use std::path::PathBuf;

use crate::corpus::Tag;

/// All failure modes surfaced by this crate.
///
/// Each variant maps to a fixed process exit code (see [`Error::exit_code`])
/// so batch scripts can distinguish failure classes.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("file not found: {path}")]
    MissingFile { path: PathBuf },

    #[error("{source_name}:{line}: malformed line: {reason}")]
    MalformedLine {
        source_name: String,
        line: usize,
        reason: String,
    },

    #[error("unknown tag \"{tag}\"{}", match line { Some(n) => format!(" at line {n}"), None => String::new() })]
    UnknownTag { tag: String, line: Option<usize> },

    #[error("corpus is empty")]
    EmptyCorpus,

    #[error("stratum \"{tag}\" has only {size} item(s); too small for a stratified split")]
    StratumTooSmall { tag: Tag, size: usize },

    #[error("unknown embedding backend \"{name}\"")]
    UnknownBackend { name: String },

    #[error("weights for backend \"{name}\" not found under {cache_dir} (offline?)")]
    WeightsUnavailable { name: String, cache_dir: PathBuf },

    #[error("cannot embed an empty word")]
    EmptyWord,

    #[error("cannot embed an empty batch")]
    EmptyBatch,

    #[error("invalid model spec: {reason}")]
    InvalidSpec { reason: String },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("loss became non-finite at epoch {epoch}; training aborted")]
    NonFiniteLoss { epoch: usize },

    #[error("backend mismatch: model was trained with \"{expected}\", got \"{actual}\"")]
    BackendMismatch { expected: String, actual: String },

    #[error("corrupt checkpoint: {reason}")]
    CorruptCheckpoint { reason: String },

    #[error("tag scheme mismatch: checkpoint declares [{found}], this build expects [{expected}]")]
    SchemeMismatch { expected: String, found: String },

    #[error("length mismatch: gold has {gold} tokens, predictions have {pred}")]
    LengthMismatch { gold: usize, pred: usize },

    #[error("confusion matrix has no entries")]
    EmptyMatrix,

    #[error("malformed history file: {reason}")]
    MalformedHistory { reason: String },

    #[error("not a one-hot vector: {vector:?}")]
    InvalidOneHot { vector: Vec<f64> },

    #[error("configuration error: {reason}")]
    Config { reason: String },

    #[error("corrupt weight bundle for \"{name}\": {reason}")]
    CorruptWeights { name: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("chart rendering failed: {reason}")]
    Render { reason: String },
}

impl Error {
    /// Stable nonzero exit code for this error class.
    ///
    /// Documented in the README; never renumber existing variants.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::MissingFile { .. } => 2,
            Error::MalformedLine { .. } => 3,
            Error::UnknownTag { .. } => 4,
            Error::EmptyCorpus => 5,
            Error::StratumTooSmall { .. } => 6,
            Error::UnknownBackend { .. } => 7,
            Error::WeightsUnavailable { .. } => 8,
            Error::EmptyWord => 9,
            Error::EmptyBatch => 10,
            Error::InvalidSpec { .. } => 11,
            Error::EmptyDataset => 12,
            Error::NonFiniteLoss { .. } => 13,
            Error::BackendMismatch { .. } => 14,
            Error::CorruptCheckpoint { .. } => 15,
            Error::SchemeMismatch { .. } => 16,
            Error::LengthMismatch { .. } => 17,
            Error::EmptyMatrix => 18,
            Error::MalformedHistory { .. } => 19,
            Error::InvalidOneHot { .. } => 20,
            Error::Config { .. } => 21,
            Error::CorruptWeights { .. } => 22,
            Error::Io(_) => 23,
            Error::Render { .. } => 24,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
