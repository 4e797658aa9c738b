use thiserror::Error;
use ymc_core::YmError;

/// Exit status for a run whose in-run assertions failed.
pub const EXIT_ASSERTION: i32 = 1;
/// Exit status for configuration and precondition errors.
pub const EXIT_CONFIG: i32 = 2;
/// Exit status for numerical and output failures.
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error [{section}.{key}]: {message}")]
    Config {
        section: String,
        key: String,
        message: String,
    },

    #[error("[{module}] {err}", module = .0.module(), err = .0)]
    Core(#[from] YmError),

    #[error("output error [{path}]: {message}")]
    Output { path: String, message: String },
}

impl CliError {
    pub fn config(section: &str, key: &str, message: impl Into<String>) -> Self {
        CliError::Config {
            section: section.to_string(),
            key: key.to_string(),
            message: message.into(),
        }
    }

    pub fn output(path: &std::path::Path, e: impl std::fmt::Display) -> Self {
        CliError::Output {
            path: path.display().to_string(),
            message: e.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => EXIT_CONFIG,
            CliError::Core(e) => match e {
                YmError::Numerical { .. } | YmError::Io(_) => EXIT_NUMERICAL,
                _ => EXIT_CONFIG,
            },
            CliError::Output { .. } => EXIT_NUMERICAL,
        }
    }
}
