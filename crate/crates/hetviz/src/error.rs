use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = HetvizError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum HetvizError {
    #[error(transparent)]
    Engine(#[from] hetviz_core::Error),

    #[error("file not found: {}", .0.display())]
    NotFound(PathBuf),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Csv { line: u64, message: String },

    #[error("input is not valid UTF-8 text (byte {offset})")]
    Utf8 { offset: usize },

    #[error("unsupported document version {found}, expected {expected}")]
    Version { found: u64, expected: u64 },

    /// Malformed JSON document; `location` names the attribute or field path.
    #[error("{location}: {message}")]
    Document { location: String, message: String },
}

impl HetvizError {
    pub fn document(location: impl Into<String>, message: impl ToString) -> Self {
        HetvizError::Document {
            location: location.into(),
            message: message.to_string(),
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            HetvizError::Engine(e) => e.code(),
            HetvizError::NotFound(_) => "not_found",
            HetvizError::Io { .. } => "io_error",
            HetvizError::Csv { .. } => "malformed_csv",
            HetvizError::Utf8 { .. } => "invalid_utf8",
            HetvizError::Version { .. } => "unsupported_version",
            HetvizError::Document { .. } => "malformed_document",
        }
    }

    /// Turns an IO failure into `NotFound` when the file is missing.
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        let path = path.into();
        if source.kind() == std::io::ErrorKind::NotFound {
            HetvizError::NotFound(path)
        } else {
            HetvizError::Io { path, source }
        }
    }
}
