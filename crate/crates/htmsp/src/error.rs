use std::io;
use std::path::PathBuf;

/// Errors raised by IO, configuration, datasets and the template store.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },

    #[error("{}: {message}", path.display())]
    Image { path: PathBuf, message: String },

    #[error("config key `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("dataset {}: {message}", root.display())]
    Dataset { root: PathBuf, message: String },

    #[error("template store {}: {message}", path.display())]
    Store { path: PathBuf, message: String },

    #[error(transparent)]
    Core(#[from] htmsp_core::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn image(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Image {
            path: path.into(),
            message: message.into(),
        }
    }

    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    /// Process exit status for this error class.
    ///
    /// | code | meaning |
    /// |------|---------|
    /// | 2 | unreadable or malformed input file |
    /// | 3 | invalid configuration |
    /// | 4 | dataset layout problem |
    /// | 5 | template store problem |
    /// | 1 | anything else |
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } | Error::Image { .. } => 2,
            Error::Config { .. } => 3,
            Error::Core(htmsp_core::Error::InvalidParameter { .. }) => 3,
            Error::Dataset { .. } => 4,
            Error::Store { .. } => 5,
            Error::Core(_) => 1,
        }
    }
}
