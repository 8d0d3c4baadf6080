use thiserror::Error;

pub type Result<T> = std::result::Result<T, LabError>;

#[derive(Debug, Error)]
pub enum LabError {
    /// The configuration is unreadable or violates the schema.
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] ym2d::Error),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl LabError {
    pub fn config(msg: impl Into<String>) -> Self {
        LabError::Config(msg.into())
    }

    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        LabError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    /// Whether the error is a usage or configuration problem rather than a
    /// failure while running.
    pub fn is_config(&self) -> bool {
        matches!(self, LabError::Config(_))
    }
}
