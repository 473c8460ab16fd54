//! `cfc` — experiment runner for the chained-MZI counterfactual channel.
//!
//! Emits CSV data only; plotting is out of scope. All commands are pure
//! functions of (configuration, input files, seed): repeated runs produce
//! byte-identical output.

mod commands;
mod config;

use std::process::ExitCode;

/// Usage problem: exit code 2.
pub struct UsageError(pub String);
/// Input-data problem (file I/O, parse errors): exit code 3.
pub struct InputError(pub String);

pub enum CliError {
    Usage(String),
    Input(String),
}

impl From<UsageError> for CliError {
    fn from(e: UsageError) -> Self {
        CliError::Usage(e.0)
    }
}

impl From<InputError> for CliError {
    fn from(e: InputError) -> Self {
        CliError::Input(e.0)
    }
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--help" || a == "-h") {
        print!("{}", config::USAGE);
        return ExitCode::SUCCESS;
    }
    let run = config::RunConfig::from_args(&args)
        .map_err(CliError::from)
        .and_then(commands::dispatch);
    match run {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("run with --help for usage");
            ExitCode::from(2)
        }
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
