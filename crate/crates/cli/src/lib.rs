//! Command-line front end for `qec-lab`: config parsing, command dispatch
//! and deterministic CSV and text artifacts.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;

pub use commands::{run_command, Command, Common, RunConfig};
pub use config::{emit, parse_config, ConfigError, Document};
pub use error::CliError;
pub use report::write_csv;
