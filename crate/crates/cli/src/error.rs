use std::fmt;
use std::io;

use petzlab::Error as CoreError;

/// Failure of a CLI run, mapped onto the process exit status.
#[derive(Debug)]
pub enum CliError {
    /// Unreadable, malformed or out-of-range configuration.
    Config(String),
    /// The numerical core produced non-finite or inconsistent values.
    Numeric {
        message: String,
        last_good_time: Option<f64>,
    },
    Io(io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric { .. } => 3,
            CliError::Io(_) => 1,
        }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "config error: {msg}"),
            CliError::Numeric {
                message,
                last_good_time: Some(t),
            } => write!(f, "numeric failure: {message} (last good t = {t:.16e})"),
            CliError::Numeric { message, .. } => write!(f, "numeric failure: {message}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

/// Argument and shape errors from the core come from config values; the rest
/// are numerical.
impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::NonFinite { last_good_time } => CliError::Numeric {
                message: "non-finite values during integration".into(),
                last_good_time: Some(last_good_time),
            },
            CoreError::Singular | CoreError::NotHermitian { .. } => CliError::Numeric {
                message: e.to_string(),
                last_good_time: None,
            },
            CoreError::InvalidArgument(_)
            | CoreError::InvalidState(_)
            | CoreError::DimensionMismatch { .. }
            | CoreError::NotPowerOfTwo(_) => CliError::Config(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
