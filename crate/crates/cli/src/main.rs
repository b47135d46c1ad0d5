//! `bayesbench`: run optimizer benchmarks and analyze them with Bayesian
//! models.
//!
//! Every subcommand is deterministic given its inputs and `--seed`
//! (`BAYESBENCH_SEED` serves as a fallback). Exit codes: 0 success,
//! 2 validation error, 3 convergence failure, 4 I/O error.

use std::process::ExitCode;

use bayesbench_core::Error;
use clap::{Parser, Subcommand};

mod artifacts;
mod bench;
mod checks;
mod filters;
mod fitcmd;
mod inspect;
mod plots;
mod report;

#[derive(Parser)]
#[command(name = "bayesbench", version, about)]
struct Cli {
    /// Worker threads for parallel sections (default: logical cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the benchmark grid from a config file and write the dataset CSV.
    Bench(bench::BenchArgs),
    /// Fit an analysis model to a dataset; write draws, diagnostics, summary.
    Fit(fitcmd::FitArgs),
    /// Re-check convergence diagnostics of a saved fit.
    Diagnose(inspect::DiagnoseArgs),
    /// Print the posterior summary table of a saved fit.
    Summarize(inspect::SummarizeArgs),
    /// Posterior rank distribution of the algorithms in a saved fit.
    Rank(inspect::RankArgs),
    /// Posterior predictive checks against the fitted dataset.
    Ppc(checks::PpcArgs),
    /// Refit under scaled priors and report how the posterior moves.
    Sensitivity(checks::SensitivityArgs),
    /// Render a self-contained markdown + SVG report from a saved fit.
    Report(report::ReportArgs),
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Validation(_) | Error::Parse { .. } => 2,
        Error::Convergence(_) => 3,
        Error::Io { .. } => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        // A failure here means a pool already exists, which only happens in
        // tests driving main() twice; the existing pool is fine then.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    let result = match cli.command {
        Command::Bench(args) => bench::run(args),
        Command::Fit(args) => fitcmd::run(args),
        Command::Diagnose(args) => inspect::diagnose(args),
        Command::Summarize(args) => inspect::summarize(args),
        Command::Rank(args) => inspect::rank(args),
        Command::Ppc(args) => checks::ppc(args),
        Command::Sensitivity(args) => checks::sensitivity(args),
        Command::Report(args) => report::run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
