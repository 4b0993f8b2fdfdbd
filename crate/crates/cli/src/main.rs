//! `drsub`: generate benchmark instances, solve them, and tabulate results.
//!
//! Exit codes: 0 converged, 1 runtime error, 2 stopped by a limit,
//! 3 infeasible, 64 usage error.

mod args;
mod generate;
mod record;
mod solve;
mod table;
mod verify;

use std::process::ExitCode;

use clap::Parser;
use thiserror::Error;

use args::{Cli, Command};

const EXIT_USAGE: u8 = 64;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] drsub_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn dispatch(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Generate(a) => generate::run(&a).map(|_| 0),
        Command::Solve(a) => solve::run(&a).map(solve::Outcome::exit_code),
        Command::Table(a) => {
            let cells = table::aggregate(&record::read_all(&a.results)?)?;
            print!("{}", table::render(&cells));
            Ok(0)
        }
        Command::Verify(a) => verify::run(&a).map(|ok| if ok { 0 } else { 1 }),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                CliError::Usage(_) => EXIT_USAGE,
                _ => 1,
            })
        }
    }
}
