use thiserror::Error;

/// Failure modes shared by every module of the workbench.
///
/// Each variant carries the module and the name of the violated
/// precondition so that callers (notably the CLI) can report context.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum YmError {
    #[error("{module}: domain error: {message}")]
    Domain { module: &'static str, message: String },

    #[error("{module}: gauge error: coulomb residual {residual:e} exceeds tolerance {tolerance:e}")]
    Gauge {
        module: &'static str,
        residual: f64,
        tolerance: f64,
    },

    #[error("{module}: capacity error: {message}")]
    Capacity { module: &'static str, message: String },

    #[error("{module}: numerical error: {message}")]
    Numerical { module: &'static str, message: String },

    #[error("{module}: shape mismatch: {message}")]
    Shape { module: &'static str, message: String },

    #[error("io error: {0}")]
    Io(String),

    #[error("format error: {0}")]
    Format(String),
}

impl YmError {
    pub(crate) fn domain(module: &'static str, message: impl Into<String>) -> Self {
        YmError::Domain {
            module,
            message: message.into(),
        }
    }

    pub(crate) fn capacity(module: &'static str, message: impl Into<String>) -> Self {
        YmError::Capacity {
            module,
            message: message.into(),
        }
    }

    pub(crate) fn numerical(module: &'static str, message: impl Into<String>) -> Self {
        YmError::Numerical {
            module,
            message: message.into(),
        }
    }

    pub(crate) fn shape(module: &'static str, message: impl Into<String>) -> Self {
        YmError::Shape {
            module,
            message: message.into(),
        }
    }

    /// The module the error originated in, when known.
    pub fn module(&self) -> &'static str {
        match self {
            YmError::Domain { module, .. }
            | YmError::Gauge { module, .. }
            | YmError::Capacity { module, .. }
            | YmError::Numerical { module, .. }
            | YmError::Shape { module, .. } => module,
            YmError::Io(_) | YmError::Format(_) => "io",
        }
    }
}

impl From<std::io::Error> for YmError {
    fn from(e: std::io::Error) -> Self {
        YmError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, YmError>;
