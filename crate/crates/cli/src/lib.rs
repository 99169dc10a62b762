//! Command-line front end of `betapoly`.
//!
//! Exit codes: 0 on success, 1 on invalid input or configuration, 2 when a
//! computation fails. Errors go to stderr as a single JSON line.

pub mod args;
mod commands;
mod config;

use std::ffi::OsString;

use clap::Parser;

use crate::args::Cli;

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Runtime(String),
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Validation(_) => "validation",
            CliError::Runtime(_) => "runtime",
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Runtime(m) => m,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl From<betapoly::Error> for CliError {
    fn from(e: betapoly::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

fn report(err: &CliError) {
    let line = serde_json::json!({ "error": err.kind(), "message": err.message() });
    eprintln!("{line}");
}

/// Parses `argv` (program name first), runs the subcommand and returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let first = e.to_string().lines().next().unwrap_or_default().to_string();
            report(&CliError::Validation(first.trim_start_matches("error: ").to_string()));
            eprintln!("{}", e.render());
            return 1;
        }
    };

    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        2 => log::LevelFilter::Debug,
        _ => log::LevelFilter::Trace,
    };
    // a logger may already be installed when run twice in one process
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .target(env_logger::Target::Stderr)
        .try_init();

    match commands::dispatch(cli) {
        Ok(()) => 0,
        Err(err) => {
            report(&err);
            err.exit_code()
        }
    }
}
