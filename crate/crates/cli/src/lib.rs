//! Front end of the `ma` binary: configuration, subcommands and the
//! acceptance runner.

pub mod commands;
pub mod config;
pub mod output;
pub mod repro;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("invalid {field}: {msg}")]
    Invalid { field: String, msg: String },
    #[error("i/o error: {0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] ma_core::MaError),
}

impl CliError {
    /// 2 for usage and configuration errors, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse(_) | CliError::Invalid { .. } => 2,
            _ => 1,
        }
    }
}
