use std::path::{Path, PathBuf};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    /// Malformed input; `field` names the offending header field or key.
    #[error("{path}: invalid `{field}`: {message}")]
    Parse { path: PathBuf, field: String, message: String },
    #[error("{path}: payload size mismatch: expected {expected} bytes, found {actual}")]
    PayloadSize { path: PathBuf, expected: usize, actual: usize },
    #[error("{path}: incompatible model: {message}")]
    Incompatible { path: PathBuf, message: String },
    #[error(transparent)]
    Core(#[from] radfp_core::Error),
    /// Bad command-line input; exit status 2.
    #[error("{0}")]
    Usage(String),
}

impl Error {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io { path: path.to_path_buf(), source }
    }

    pub fn parse(path: &Path, field: &str, message: impl Into<String>) -> Self {
        Error::Parse { path: path.to_path_buf(), field: field.into(), message: message.into() }
    }
}

pub(crate) trait IoContext<T> {
    fn at(self, path: &Path) -> Result<T>;
}

impl<T> IoContext<T> for std::io::Result<T> {
    fn at(self, path: &Path) -> Result<T> {
        self.map_err(|e| Error::io(path, e))
    }
}
