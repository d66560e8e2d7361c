//! `nilreturn`: coefficients, verification sweeps and oracles for the return
//! map of `X' = -Y, Y' = X^3 - Y^3`.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure.

mod commands;
mod config;
mod report;

use clap::{Parser, Subcommand};
use config::{ConfigError, Opts, Settings};
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "nilreturn", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Table of c_n and X_n with grid error estimates
    Coeffs,
    /// ODE oracle vs series partial sums over an epsilon sweep, with slope fits
    Verify,
    /// Picard iteration for v = J[v] at each delta
    Fixedpoint,
    /// Closed-form and quadrature Melnikov integral at each T
    Melnikov,
    /// One turn of the normalized system: crossings, Lyapunov audit, samples
    Trace,
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    let settings = Settings::resolve(&cli.opts)?;
    let report = match cli.command {
        Command::Coeffs => commands::coeffs(&settings)?,
        Command::Verify => commands::verify(&settings)?,
        Command::Fixedpoint => commands::fixedpoint(&settings)?,
        Command::Melnikov => commands::melnikov_cmd(&settings)?,
        Command::Trace => commands::trace(&settings)?,
    };
    report.emit(settings.format, settings.out.as_deref())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<ConfigError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
    }
}
