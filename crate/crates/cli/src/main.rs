//! `nlobs`: batch front-end for the nonlocal double obstacle solver.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;
mod expr;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::Axis;
use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Parser)]
#[command(name = "nlobs", version, about = "Grid solver and verification runs for nonlocal double obstacle problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Run configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Suppress the summary line.
    #[arg(long)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the configured instance and write solution.csv, residual.csv and report.json.
    Solve(Common),
    /// Check a solution file against the configured instance.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Solution CSV; defaults to <out>/solution.csv.
        #[arg(long)]
        solution: Option<PathBuf>,
    },
    /// Repeat the run along one parameter axis.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        axis: Axis,
    },
}

type Job = Box<dyn Fn(&RunConfig, &Common) -> Result<commands::Outcome, CliError>>;

fn run(cli: Cli) -> Result<(bool, String), CliError> {
    let (common, job): (&Common, Job) = match &cli.command {
        Command::Solve(c) => (c, Box::new(|cfg, c| commands::run_solve(cfg, &c.out))),
        Command::Verify { common, solution } => {
            let solution = solution.clone();
            (common, Box::new(move |cfg, c| commands::run_verify(cfg, &c.out, solution.clone())))
        }
        Command::Sweep { common, axis } => {
            let axis = *axis;
            (common, Box::new(move |cfg, c| commands::run_sweep(cfg, &c.out, axis)))
        }
    };
    let cfg = RunConfig::load(&common.config)?;
    let outcome = job(&cfg, common)?;
    Ok((common.quiet, outcome.summary))
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok((quiet, summary)) => {
            if !quiet {
                println!("{summary}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("nlobs: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
