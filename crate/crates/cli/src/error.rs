use std::fmt::Display;

use thiserror::Error;

/// Command failure, classified by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, config file or missing inputs (exit 2).
    #[error("{0}")]
    Config(String),
    /// Malformed or inconsistent data (exit 3).
    #[error("{0:#}")]
    Data(anyhow::Error),
    /// Generation or scoring service failure (exit 4).
    #[error("{0:#}")]
    Adapter(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Adapter(_) => 4,
        }
    }

    pub fn data(msg: impl Display) -> Self {
        CliError::Data(anyhow::anyhow!("{msg}"))
    }
}

pub trait ResultExt<T> {
    fn data(self, context: impl Display) -> Result<T, CliError>;
    fn adapter(self, context: impl Display) -> Result<T, CliError>;
}

impl<T, E> ResultExt<T> for Result<T, E>
where
    E: std::error::Error + Send + Sync + 'static,
{
    fn data(self, context: impl Display) -> Result<T, CliError> {
        self.map_err(|e| CliError::Data(anyhow::Error::new(e).context(context.to_string())))
    }

    fn adapter(self, context: impl Display) -> Result<T, CliError> {
        self.map_err(|e| CliError::Adapter(anyhow::Error::new(e).context(context.to_string())))
    }
}
