//! `skewbound`: sampling campaigns, canonical forms, sharpness searches and
//! submersion tables from the command line.
//!
//! CSV goes to `--out` or standard output, a human summary to standard error.
//! Exit status: 0 success, 1 violations or numeric failure, 2 usage or input errors.

mod commands;
mod input;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use crate::report::{CliError, RunReport};

#[derive(Debug, Parser)]
#[command(name = "skewbound", version, about = "Commutator norm bounds for skew-symmetric tuples")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample random tuples and check the bound and the trace identity.
    Verify {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Slack allowed above d(n) before a ratio counts as a violation.
        #[arg(long, default_value_t = 1e-9)]
        tolerance: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Block canonical form of the skew matrices in a JSON file.
    Canonical {
        /// JSON file holding one 2-D array or a list of them.
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Maximise the commutator ratio by multi-restart ascent.
    Sharpness {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 32)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Largest accepted gap between the best ratio and d(n).
        #[arg(long, default_value_t = 1e-3)]
        tolerance: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Curvature tables and integrands of a submersion point model.
    Submersion {
        #[arg(long = "case", value_enum)]
        model: ModelArg,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        a: f64,
        /// Base dimension; only the quaternion equality model (case4) accepts a choice.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModelArg {
    /// so(3) equality model over a 3-dimensional base
    Case3,
    /// quaternion equality model over an n-dimensional base
    Case4,
    /// S⁷ → S⁴
    Hopf,
    /// S³ → S²
    HopfS3,
}

fn run(command: Command) -> Result<(RunReport, Option<PathBuf>), CliError> {
    Ok(match command {
        Command::Verify {
            n,
            m,
            trials,
            seed,
            tolerance,
            out,
        } => (commands::verify(n, m, trials, seed, tolerance)?, out),
        Command::Canonical { input, out } => (commands::canonical(&input)?, out),
        Command::Sharpness {
            n,
            m,
            restarts,
            seed,
            tolerance,
            out,
        } => (commands::sharpness(n, m, restarts, seed, tolerance)?, out),
        Command::Submersion { model, a, n, out } => (commands::submersion(model.into(), a, n)?, out),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = run(cli.command).and_then(|(report, out)| {
        report.write_csv(out.as_deref())?;
        Ok(report)
    });
    match outcome {
        Ok(report) => {
            report.print_summary();
            if report.violations > 0 {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

impl From<ModelArg> for commands::ModelChoice {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Case3 => commands::ModelChoice::Case3,
            ModelArg::Case4 => commands::ModelChoice::Case4,
            ModelArg::Hopf => commands::ModelChoice::Hopf,
            ModelArg::HopfS3 => commands::ModelChoice::HopfS3,
        }
    }
}
