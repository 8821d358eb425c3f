use std::fmt;

use susyqm_core::SusyError;

/// Exit status for bad inputs; nothing has been written.
pub const EXIT_VALIDATION: u8 = 2;
/// Exit status for numerical failures.
pub const EXIT_NUMERICAL: u8 = 3;
/// Exit status for I/O failures while writing outputs.
pub const EXIT_IO: u8 = 1;

/// A run failure with a module-qualified code.
#[derive(Debug)]
pub enum Failure {
    Validation { code: String, message: String },
    Numerical { code: String, message: String },
    Io(anyhow::Error),
}

impl Failure {
    pub fn config(message: impl Into<String>) -> Self {
        Failure::Validation { code: "cli.config".into(), message: message.into() }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Validation { .. } => EXIT_VALIDATION,
            Failure::Numerical { .. } => EXIT_NUMERICAL,
            Failure::Io(_) => EXIT_IO,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Validation { code, message } | Failure::Numerical { code, message } => write!(f, "error[{code}]: {message}"),
            Failure::Io(e) => write!(f, "error[cli.io]: {e:#}"),
        }
    }
}

impl From<SusyError> for Failure {
    fn from(e: SusyError) -> Self {
        let code = e.code().to_string();
        let message = e.to_string();
        if e.is_validation() {
            Failure::Validation { code, message }
        } else {
            Failure::Numerical { code, message }
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Io(e)
    }
}
