use std::process::ExitCode;

use clap::Parser;
use qec_lab_cli::{run_command, RunConfig};

fn main() -> ExitCode {
    let cfg = RunConfig::parse();
    match run_command(&cfg, &mut std::io::stdout().lock()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qeclab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
