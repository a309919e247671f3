use std::process::ExitCode;

use gausshcrb::Error;

/// Failure of a subcommand, carrying its process exit code.
#[derive(Debug)]
pub enum CliError {
    BadArgs(String),
    Optimizer(String),
    Io(String),
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::BadArgs(_) => 2,
            CliError::Optimizer(_) => 3,
            CliError::Io(_) => 4,
            CliError::Verification(_) => 5,
        })
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::BadArgs(m) => write!(f, "invalid arguments: {m}"),
            CliError::Optimizer(m) => write!(f, "optimizer failure: {m}"),
            CliError::Io(m) => write!(f, "I/O error: {m}"),
            CliError::Verification(m) => write!(f, "verification failed: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NonConvergence(_) => CliError::Optimizer(e.to_string()),
            _ => CliError::BadArgs(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
