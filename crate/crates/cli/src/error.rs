use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("line {line}: negative count {value}")]
    NegativeCount { line: u64, value: f64 },
    #[error("line {line}: category `{category}` is already assigned to a group")]
    Overlap { line: u64, category: String },
    #[error("line {line}: edge weight {weight} is not positive")]
    NonPositiveWeight { line: u64, weight: f64 },
    #[error("line {line}: self-loop on node `{node}`")]
    SelfLoop { line: u64, node: String },
    #[error("track and graph disagree: {0}")]
    LabelMismatch(String),
    #[error("invalid render settings: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Core(#[from] scidyn_core::Error),
}

pub type IoResult<T> = std::result::Result<T, IoError>;

impl IoError {
    pub(crate) fn file(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| Self::File { path, source }
    }

    pub(crate) fn parse(line: u64, message: impl Into<String>) -> Self {
        Self::Parse { line, message: message.into() }
    }

    pub(crate) fn from_csv(e: csv::Error) -> Self {
        let line = e.position().map_or(0, |p| p.line());
        let message = e.to_string();
        match e.into_kind() {
            csv::ErrorKind::Io(source) => Self::File { path: PathBuf::new(), source },
            _ => Self::Parse { line, message },
        }
    }
}
