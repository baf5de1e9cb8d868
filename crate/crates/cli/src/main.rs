mod error;
mod run;
mod scenario;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use densinv_core::endpoint::Boundary;

use crate::error::CliResult;
use crate::run::ClassifyInput;
use crate::scenario::Scenario;

/// Density-to-potential inversion scenarios for one particle on a ring.
///
/// Exit codes: 0 success, 2 config error, 3 numeric or output error,
/// 4 iteration diverged. Set RAYON_NUM_THREADS to cap worker threads.
#[derive(Debug, Parser)]
#[command(name = "densinv", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides `[output] dir`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Side {
    Lower,
    Upper,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// density.csv, current.csv, norm_trace.csv
    Propagate(RunArgs),
    /// eigenvalues.csv, eigenvectors_t<step>.csv, crossings.csv, d_constant.txt
    Spectrum(RunArgs),
    /// v_recovered.csv, iteration_report.csv, v_error.csv
    Invert(RunArgs),
    /// Print the endpoint class for `--p/--ap` or for a fitted `x, n` table.
    Classify {
        #[arg(long, allow_hyphen_values = true, requires = "ap", conflicts_with = "density")]
        p: Option<f64>,
        #[arg(long)]
        ap: Option<f64>,
        #[arg(long, requires = "boundary")]
        density: Option<PathBuf>,
        #[arg(long, allow_hyphen_values = true)]
        boundary: Option<f64>,
        #[arg(long, value_enum, default_value = "upper")]
        side: Side,
        #[arg(long, default_value_t = 8)]
        window: usize,
    },
}

fn execute(cmd: Command) -> CliResult<String> {
    match cmd {
        Command::Propagate(a) => run::run_propagate(Scenario::load(&a.config)?, a.out.as_deref()),
        Command::Spectrum(a) => run::run_spectrum(Scenario::load(&a.config)?, a.out.as_deref()),
        Command::Invert(a) => run::run_invert(Scenario::load(&a.config)?, a.out.as_deref()),
        Command::Classify {
            p,
            ap,
            density,
            boundary,
            side,
            window,
        } => {
            let input = match (p, ap, density, boundary) {
                (Some(p), Some(a_p), None, _) => ClassifyInput::Direct { p, a_p },
                (None, _, Some(path), Some(boundary)) => ClassifyInput::Profile {
                    path,
                    boundary,
                    side: match side {
                        Side::Lower => Boundary::Lower,
                        Side::Upper => Boundary::Upper,
                    },
                    window,
                },
                _ => return Err(error::config_err("classify needs --p and --ap, or --density and --boundary")),
            };
            Ok(run::run_classify(input)?.to_string())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(line) => {
            println!("{line}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("densinv: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
