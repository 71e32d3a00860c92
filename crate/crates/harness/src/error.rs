use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] cic_core::Error),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {detail}", path.display())]
    Schema { path: PathBuf, detail: String },
    #[error("seed {seed} failed: {source}")]
    Run { seed: u64, source: cic_core::Error },
}

impl HarnessError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io { path: path.to_path_buf(), source }
    }

    pub fn schema(path: &Path, detail: impl Into<String>) -> Self {
        Self::Schema { path: path.to_path_buf(), detail: detail.into() }
    }
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
