use std::io;

use thermalcat_core::Error as CoreError;

/// Failures of a program run, each mapped to a process exit code.
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    /// Syntax, schema or semantic problems with the program. Exit code 2.
    #[error("invalid program: {0}")]
    Parse(String),
    /// A Fock cutoff is too small. Exit code 3.
    #[error("truncation: {0}")]
    Truncation(String),
    /// A numerical tolerance was not met. Exit code 4.
    #[error("numerical tolerance: {0}")]
    Tolerance(String),
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
}

impl RunError {
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Parse(_) => 2,
            RunError::Truncation(_) => 3,
            RunError::Tolerance(_) => 4,
            RunError::Io(_) => 1,
        }
    }
}

impl From<CoreError> for RunError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Domain(m) => RunError::Parse(m),
            CoreError::Truncation(m) => RunError::Truncation(m),
            CoreError::Tolerance(m) | CoreError::Series(m) => RunError::Tolerance(m),
        }
    }
}
