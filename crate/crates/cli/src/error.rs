use std::process::ExitCode;

use ccb_core::Error;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// The configuration does not parse or does not validate.
    #[error("config error: {0}")]
    Config(String),
    /// A policy broke the budget contract, or the harness hit an internal fault.
    #[error("runtime error: {0}")]
    Runtime(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
            CliError::Io(_) => 1,
        }
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(self.code())
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::ContractViolation(_) | Error::Internal(_) => CliError::Runtime(e.to_string()),
            Error::InvalidArgument(_) | Error::Config(_) | Error::TooLarge(_) => CliError::Config(e.to_string()),
        }
    }
}
