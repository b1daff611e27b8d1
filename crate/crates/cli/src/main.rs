//! `privote`: run elections, accuracy sweeps, analytic tables and
//! transcript replays from the command line.
//!
//! Exit status: 0 on success, 1 on I/O failure, 2 on usage errors, 3 on
//! bad configuration or transcript input, 4 when the protocol fails to
//! produce a decision.

mod args;
mod commands;
mod config;

use std::process::ExitCode;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(clap::Error),
    #[error("config error: {0}")]
    Config(String),
    #[error("protocol failure: {0}")]
    Protocol(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl CliError {
    fn report(self) -> ExitCode {
        if let Self::Usage(e) = self {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
        eprintln!("error: {self}");
        ExitCode::from(match self {
            Self::Io(_) => 1,
            Self::Config(_) => 3,
            Self::Protocol(_) => 4,
            Self::Usage(_) => unreachable!(),
        })
    }
}

fn main() -> ExitCode {
    let argv: Vec<_> = std::env::args_os().collect();
    match config::parse(&argv).and_then(commands::run) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => e.report(),
    }
}
