use std::path::PathBuf;
use std::process::ExitCode;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: nonbloch::Error,
    },
    #[error("cannot read {path}: {message}")]
    Read { path: PathBuf, message: String },
    #[error("cannot write {path}: {message}")]
    Write { path: PathBuf, message: String },
    #[error("unknown preset `{0}`; known presets: {1}")]
    UnknownPreset(String, String),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// 2 for anything wrong with the input, 3 for numerical or I/O failure.
    pub fn exit_code(&self) -> ExitCode {
        let code = match self {
            CliError::Core { source, .. } if source.is_config() => 2,
            CliError::Core { .. } | CliError::Write { .. } => 3,
            CliError::Read { .. } | CliError::UnknownPreset(..) | CliError::Usage(_) => 2,
        };
        ExitCode::from(code)
    }
}

/// Attach a short description of what was being computed.
pub trait Context<T> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T, CliError>;
}

impl<T> Context<T> for nonbloch::Result<T> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T, CliError> {
        self.map_err(|source| CliError::Core {
            context: what(),
            source,
        })
    }
}
