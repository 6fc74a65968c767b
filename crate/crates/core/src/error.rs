use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("mention {0} has no gold_cluster label")]
    MissingGold(String),

    #[error("mention {0} appears in more than one cluster")]
    DuplicateMention(String),

    #[error(
        "key and response cover different mention sets ({key_only} only in key, {response_only} only in response)"
    )]
    MentionSetMismatch { key_only: usize, response_only: usize },

    #[error("unknown document {0}")]
    UnknownDocument(String),

    #[error("missing embedding for key {0:?}")]
    MissingEmbedding(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid embedding: {0}")]
    InvalidEmbedding(String),

    #[error("invalid corpus: {0}")]
    InvalidCorpus(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("non-deterministic resolver output across benchmark runs")]
    NonDeterministic,

    #[error("{path}:{line}: {source}")]
    Parse {
        path: String,
        line: usize,
        #[source]
        source: serde_json::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
