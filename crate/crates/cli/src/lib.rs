//! Command implementations behind the `densel` binary. Each command returns
//! its stdout payload; `main` maps errors to the exit-code contract:
//! 0 success, 1 verification failure, 2 parse error, 3 invalid parameters.

pub mod commands;
pub mod files;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid parameters: {0}")]
    Invalid(String),
    #[error("{0}")]
    Io(String),
    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    pub fn parse(e: densel_core::Error) -> Self {
        Self::Parse(e.to_string())
    }

    pub fn invalid(e: densel_core::Error) -> Self {
        Self::Invalid(e.to_string())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Verification(_) => 1,
            Self::Parse(_) => 2,
            // an unwritable output path is a bad parameter
            Self::Invalid(_) | Self::Io(_) => 3,
        }
    }
}
