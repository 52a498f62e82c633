//! Command-line interface for majority-vote risk analysis.
//!
//! Exit codes: 0 on success, 1 for input problems (bad flags, malformed
//! files, unreachable targets), 2 for numerical failures (solver
//! divergence, undefined criteria).

mod commands;
mod config;

use std::process::ExitCode;

use cbound::ErrorCategory;
use clap::Parser;

fn main() -> ExitCode {
    let cli = match commands::Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.category() {
                ErrorCategory::Input => 1,
                ErrorCategory::Numerical => 2,
            })
        }
    }
}
