use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("EmptyCorpus: no trainable tokens after filtering")]
    EmptyCorpus,

    #[error("InvalidParams: {0}")]
    InvalidParams(String),

    #[error("UnknownTerm: {0:?}")]
    UnknownTerm(String),

    #[error("ZeroVector: compound vector has (near) zero norm")]
    ZeroVector,

    #[error("MalformedQuestionFile: line {line}: {reason}")]
    MalformedQuestionFile { line: usize, reason: String },

    #[error("MalformedModelFile: line {line}: {reason}")]
    MalformedModelFile { line: usize, reason: String },

    #[error("MalformedMap: {0}")]
    MalformedMap(String),

    #[error("EmptyInput: percentile of an empty set")]
    EmptyInput,

    #[error("EmptyGraph: graph has no links")]
    EmptyGraph,

    #[error("{path}: {source}")]
    Path {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParams(msg.into())
    }

    pub(crate) fn at_path(path: impl Into<PathBuf>) -> impl FnOnce(io::Error) -> Self {
        let path = path.into();
        move |source| Error::Path { path, source }
    }
}
