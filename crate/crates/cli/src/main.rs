//! Command-line interface for the grouped spatial-pack convolution crate:
//! verification sweeps, benchmarks, tile tuning, cost-model reports and
//! ahead-of-time weight packing.

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

mod bench;
mod common;
mod pack;
mod report;
mod tune;
mod verify;

use common::{exit_code, CliResult};

#[derive(Parser, Debug)]
#[command(
    name = "gspc",
    version,
    about = "Grouped spatial-pack convolution toolkit",
    long_about = "Verify, benchmark and tune CPU grouped-convolution kernels, and report \
                  parameter/MAC budgets for grouped network variants.\n\n\
                  Exit codes: 0 success, 2 verification failure, 3 configuration or usage \
                  error, 4 I/O error."
)]
struct Cli {
    #[command(subcommand)]
    command: Commands,
}

#[derive(Subcommand, Debug)]
enum Commands {
    /// Compare kernel outputs against the reference convolution
    Verify(verify::VerifyArgs),
    /// Time kernels over a network's convolution layers
    Bench(bench::BenchArgs),
    /// Search tile configurations per layer and save records
    Tune(tune::TuneArgs),
    /// Print cost-model totals for network variants
    Report(report::ReportArgs),
    /// Pack a weight tensor into the kernel layout ahead of time
    Pack(pack::PackArgs),
}

fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.command {
        Commands::Verify(args) => verify::run(args),
        Commands::Bench(args) => bench::run(args),
        Commands::Tune(args) => tune::run(args),
        Commands::Report(args) => report::run(args),
        Commands::Pack(args) => pack::run(args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 3,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
