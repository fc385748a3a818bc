mod cli;
mod commands;
mod config;
mod error;
mod grid;
mod output;
mod simulate;

use std::process::ExitCode;

use clap::Parser;

use cli::{Cli, Command};
use error::CliError;

fn run(command: &Command) -> Result<(), CliError> {
    match command {
        Command::Keyrate(args) => commands::keyrate(args),
        Command::Capacity(args) => commands::capacity(args),
        Command::Correlation(args) => commands::correlation(args),
        Command::Simulate(args) => simulate::run(args),
        Command::Wigner(args) => commands::wigner_grid(args),
        Command::Schema { document } => commands::schema(*document),
    }
}

fn main() -> ExitCode {
    // Usage errors from clap exit with status 2.
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cvqkd: {e}");
            e.exit_code()
        }
    }
}
