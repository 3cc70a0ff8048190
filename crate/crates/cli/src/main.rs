// SPDX-License-Identifier: Apache-2.0

//! `verigate` command-line front end.

mod args;
mod commands;
mod config;
mod error;
mod output;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use config::RunConfig;
use error::CliError;

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Validate { paths } => commands::validate(&paths),
        Command::Synth(args) => commands::synth(&args),
        Command::Calibrate(args) => commands::calibrate_cmd(&RunConfig::resolve(args)?),
        Command::Route(args) => commands::route(&RunConfig::resolve(args)?),
        Command::Evaluate(args) => commands::evaluate(&RunConfig::resolve(args)?),
        Command::Report { kind, run } => commands::report_cmd(kind, &RunConfig::resolve(run)?),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("verigate: error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
