//! `matorth` command-line front end.
//!
//! Exit codes: 0 when the verdict passes, 2 when it fails or a numerical
//! check breaks down, 1 for usage and parameter errors.

mod args;
mod commands;
mod report;

use std::process::ExitCode;

use clap::Parser;
use matorth::Error;

use args::{Cli, Command, UsageError};

const EXIT_PASS: u8 = 0;
const EXIT_USAGE: u8 = 1;
const EXIT_FAIL: u8 = 2;

fn run(cli: Cli) -> anyhow::Result<bool> {
    match &cli.command {
        Command::Families(out) => commands::families(out),
        Command::CheckSymmetry { setup, nmax, out } => commands::check_symmetry(setup, *nmax, out),
        Command::Orthopoly { setup, n, out } => commands::orthopoly(setup, *n, out),
        Command::VerifyEigen { setup, n, out } => commands::verify_eigen(setup, *n, out),
        Command::FindBasis { setup, order, nmax, out } => commands::find_basis(setup, *order, *nmax, out),
        Command::FindMass { setup, out } => commands::find_mass(setup, out),
        Command::ConeReconstruct { setup, nmax, out } => commands::cone_reconstruct_cmd(setup, *nmax, out),
        Command::Moments { setup, nmax, out } => commands::moments(setup, *nmax, out),
        Command::DensityGrid {
            setup,
            from,
            to,
            points,
            out,
        } => commands::density_grid(setup, *from, *to, *points, out),
        Command::FourierCheck { setup, x, terms, out } => commands::fourier(setup, x, *terms, out),
    }
}

/// Parameter problems are usage errors; everything else the library reports
/// is a failed computation.
fn is_usage(e: &anyhow::Error) -> bool {
    if e.downcast_ref::<UsageError>().is_some() {
        return true;
    }
    matches!(
        e.downcast_ref::<Error>(),
        Some(
            Error::InvalidParameter(_)
                | Error::DimensionMismatch(_)
                | Error::Unsupported(_)
                | Error::ExcludedPoint { .. }
                | Error::DivergentMoment { .. }
                | Error::NotPsd
        )
    )
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::from(EXIT_PASS),
        Ok(false) => ExitCode::from(EXIT_FAIL),
        Err(e) => {
            eprintln!("error: {e:#}");
            if is_usage(&e) {
                eprintln!("usage: matorth <COMMAND> [OPTIONS]; see matorth --help");
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::from(EXIT_FAIL)
            }
        }
    }
}
