use std::path::PathBuf;

use crate::config::ConfigError;

pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_IO: u8 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("invalid input: {0}")]
    Validation(#[from] qec_lab::Error),
    #[error("invalid argument {flag}: {message}")]
    Argument { flag: &'static str, message: String },
    #[error("sweep result has no rows; nothing written")]
    EmptyResult,
    #[error("{action} {path}: {source}", path = path.display())]
    Io {
        action: &'static str,
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } => EXIT_IO,
            _ => EXIT_VALIDATION,
        }
    }
}
