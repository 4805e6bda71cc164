//! Command-line front end: argument types, output records and the command
//! dispatcher behind the `bergman` binary.

pub mod args;
mod commands;
pub mod output;
mod verify;

use std::io;

use clap::Parser;

pub use args::{Cli, Command, Format, RunArgs};
pub use commands::{execute, Report};
pub use output::Records;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] hartogs_bergman::Error),
    #[error("usage: {0}")]
    Usage(String),
    #[error("io: {0}")]
    Io(#[from] io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    /// Checks ran to completion but some failed.
    #[error("numerical: {0}")]
    Failed(String),
}

impl CliError {
    /// 2 for bad input, 3 for numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_contract() => 2,
            CliError::Usage(_) | CliError::Io(_) => 2,
            CliError::Core(_) | CliError::Csv(_) | CliError::Json(_) | CliError::Failed(_) => 3,
        }
    }

    fn category(&self) -> &'static str {
        if self.exit_code() == 2 {
            "contract"
        } else {
            "numerical"
        }
    }
}

fn report(err: &CliError) -> i32 {
    let line = err
        .to_string()
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ");
    eprintln!("error[{}]: {line}", err.category());
    err.exit_code()
}

/// Parses `argv`, runs the command and writes its records. Returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
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
            return report(&CliError::Usage(
                first.trim_start_matches("error: ").to_string(),
            ));
        }
    };
    match execute(&cli) {
        Ok(rep) => {
            let written = rep.records.write_to(
                cli.run.out.as_deref(),
                cli.run.format,
                rep.command,
                rep.seed,
            );
            match (written, rep.failure) {
                (Err(e), _) => report(&e),
                (Ok(()), Some(msg)) => report(&CliError::Failed(msg)),
                (Ok(()), None) => 0,
            }
        }
        Err(e) => report(&e),
    }
}
