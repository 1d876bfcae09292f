use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: invalid UTF-8 at byte offset {offset}")]
    Encoding { path: PathBuf, offset: usize },

    #[error("training failed: {0}")]
    Training(String),

    #[error("format error in field `{field}`: {message}")]
    Format { field: String, message: String },

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("contract violation: {0}")]
    Contract(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Format {
            field: field.into(),
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
