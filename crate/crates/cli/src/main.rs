mod cli;
mod commands;
mod manifest;

use std::process::ExitCode;

use clap::Parser;

use crate::cli::Cli;
use crate::commands::{dispatch, CliError, Outcome, CONFIG_HELP};

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code().clamp(0, 255) as u8);
        }
    };
    let verbose = cli.verbose;
    let is_experiment = matches!(cli.command, cli::Command::Experiment(_));
    match dispatch(cli, &argv) {
        Ok(Outcome::Done(manifest)) => {
            if verbose {
                eprintln!("manifest: {}", manifest.display());
            }
            ExitCode::SUCCESS
        }
        Ok(Outcome::CheckFailed(manifest, why)) => {
            eprintln!("check failed: {why}");
            if verbose {
                eprintln!("manifest: {}", manifest.display());
            }
            ExitCode::from(1)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            if is_experiment && msg.contains("config") {
                eprintln!("\n{CONFIG_HELP}");
            }
            ExitCode::from(2)
        }
        Err(CliError::Domain(e)) => {
            eprintln!("error: {e}");
            if verbose {
                let mut source = std::error::Error::source(&e);
                while let Some(s) = source {
                    eprintln!("  caused by: {s}");
                    source = s.source();
                }
            }
            ExitCode::from(1)
        }
    }
}
