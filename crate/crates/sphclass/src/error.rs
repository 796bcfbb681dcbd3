use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{0}")]
    Core(#[from] sphclass_core::Error),
    #[error("io: {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("format: {path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("dataset: {0}")]
    Dataset(String),
    #[error("config: {0}")]
    Config(String),
    #[error("csv: {path}: {message}")]
    Csv { path: PathBuf, message: String },
}

impl Error {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io { path: path.to_path_buf(), source }
    }

    pub fn format(path: &Path, message: impl Into<String>) -> Self {
        Error::Format { path: path.to_path_buf(), message: message.into() }
    }

    /// Short category used as the first field of one-line CLI errors.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Core(_) => "invalid",
            Error::Io { .. } => "io",
            Error::Format { .. } => "format",
            Error::Dataset(_) => "dataset",
            Error::Config(_) => "config",
            Error::Csv { .. } => "csv",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
