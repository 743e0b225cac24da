//! `entmetrics` command-line front end.
//!
//! Exit codes: 0 success, 1 usage or validation, 2 data error, 3 numeric
//! failure.

mod args;
mod commands;
mod error;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use crate::args::{Cli, Command};
use crate::error::CliError;

const THREADS_ENV: &str = "ENTMETRICS_THREADS";

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::usage(format!("{THREADS_ENV} must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::usage(format!("cannot configure thread pool: {e}")))
}

fn run(cli: Cli, argv: Vec<String>) -> Result<(), CliError> {
    configure_threads()?;
    match cli.command {
        Command::Eval(a) => commands::eval(&a, argv),
        Command::Audit(a) => commands::audit(&a, argv),
        Command::Synth(a) => commands::synth(&a),
        Command::Sweep(a) => commands::sweep(&a, argv),
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(error::USAGE),
            };
        }
    };
    match run(cli, argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
