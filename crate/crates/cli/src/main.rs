//! `ptorsion`: solves, closed-form oracles, diagnostic reports and sweeps.
//!
//! Exit codes: 0 success, 1 configuration error, 2 solver failure,
//! 3 chain of inequalities violated, 4 sweep finished with failed points.

mod args;
mod commands;
mod exit;
mod sweep;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(exit::CONFIG),
            };
        }
    };
    let g = &cli.global;
    let outcome = match &cli.command {
        Command::Solve => commands::solve(g),
        Command::Oracle { kind } => commands::oracle(g, kind),
        Command::Deficit { solution } => commands::deficit(g, solution.as_deref()),
        Command::Sweep { family } => sweep::sweep(g, family),
        Command::Report { files, format } => commands::report(files, *format),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
