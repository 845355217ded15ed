use thiserror::Error;

/// Errors surfaced by the library. The CLI maps these onto exit codes
/// (config -> 2, numerical -> 3, complexity guard -> 4).
#[derive(Debug, Error)]
pub enum Error {
    #[error("argument error: {0}")]
    Argument(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("numerical failure at t = {t}: {message}")]
    Numerical { t: f64, message: String },

    #[error("complexity guard exceeded: {0}")]
    ComplexityGuard(String),

    #[error("empty admissible frequency set: {0}")]
    EmptySupport(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn numerical(t: f64, message: impl Into<String>) -> Self {
        Error::Numerical {
            t,
            message: message.into(),
        }
    }

    /// Process exit code the CLI uses for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::Argument(_) | Error::EmptySupport(_) => 2,
            Error::Numerical { .. } => 3,
            Error::ComplexityGuard(_) => 4,
            _ => 1,
        }
    }
}
