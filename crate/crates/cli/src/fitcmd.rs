//! `fit`: prepare a model from the dataset, sample it, persist the artifacts.

use std::path::PathBuf;
use std::str::FromStr;

use bayesbench_core::fit::{ratio_label, run_fit, FitSpec};
use bayesbench_core::harness::read_csv;
use bayesbench_core::models::ModelKind;
use bayesbench_core::Result;
use clap::Args;

use crate::artifacts::{
    draws_to_csv, summary_table, Diagnostics, FitMeta, OutDir, ParamDiagnostics, DIAGNOSTICS_FILE,
    DRAWS_FILE, META_FILE, SUMMARY_FILE,
};
use crate::filters::parse_filters;

#[derive(Args)]
pub struct FitArgs {
    /// Model: binomial, relative-improvement, bradley-terry, davidson, cox,
    /// or student-t.
    model: String,
    /// Dataset CSV produced by `bench`.
    data: PathBuf,
    /// Output directory for the fit artifacts.
    #[arg(long)]
    out: PathBuf,
    /// Success threshold (binomial and cox models).
    #[arg(long)]
    epsilon: Option<f64>,
    /// Dataset filter, e.g. `--filter noise=0 --filter budget=1000`.
    #[arg(long = "filter")]
    filters: Vec<String>,
    #[arg(long)]
    chains: Option<usize>,
    /// Adaptation iterations per chain.
    #[arg(long)]
    warmup: Option<usize>,
    /// Total iterations per chain, warmup included.
    #[arg(long)]
    iters: Option<usize>,
    /// Joint multiplier on every prior scale.
    #[arg(long, default_value_t = 1.0)]
    prior_scale: f64,
    #[arg(long, env = "BAYESBENCH_SEED", default_value_t = 0)]
    seed: u64,
    /// Overwrite existing output files.
    #[arg(long)]
    force: bool,
}

impl FitArgs {
    fn spec(&self) -> Result<FitSpec> {
        Ok(FitSpec {
            model: ModelKind::from_str(&self.model)?,
            epsilon: self.epsilon,
            filters: parse_filters(&self.filters)?,
            prior_scale: self.prior_scale,
            chains: self.chains,
            warmup: self.warmup,
            iters: self.iters,
            seed: self.seed,
        })
    }
}

pub fn run(args: FitArgs) -> Result<()> {
    let spec = args.spec()?;
    let dataset = read_csv(&args.data)?;
    let out = OutDir::create(&args.out, args.force)?;
    // Claim every slot before the (slow) sampling starts.
    for name in [DRAWS_FILE, DIAGNOSTICS_FILE, META_FILE, SUMMARY_FILE] {
        out.slot(name)?;
    }

    let report = run_fit(&dataset, &spec)?;

    out.write(DRAWS_FILE, &draws_to_csv(&report.draws))?;
    out.write_json(
        DIAGNOSTICS_FILE,
        &Diagnostics {
            divergences: report.divergences,
            max_depth_hits: report.max_depth_hits,
            failures: report.failures.clone(),
            chain_stats: report.draws.chain_stats.clone(),
            parameters: report
                .rows
                .iter()
                .map(|r| ParamDiagnostics {
                    name: r.parameter.clone(),
                    mean: r.mean,
                    sd: r.sd,
                    rhat: r.rhat,
                    ess: r.ess,
                })
                .collect(),
        },
    )?;
    out.write_json(
        META_FILE,
        &FitMeta {
            version: env!("CARGO_PKG_VERSION").to_string(),
            data: args.data.display().to_string(),
            spec: spec.clone(),
            sampler: report.config.clone(),
            algorithms: report.model.algorithm_labels(),
            warnings: report.warnings.clone(),
            waic: report.waic.clone(),
            informativeness: report.informativeness.clone(),
            failures: report.failures.clone(),
        },
    )?;
    let table = summary_table(&report.rows, ratio_label(report.kind));
    out.write(SUMMARY_FILE, &table)?;

    for warning in &report.warnings {
        eprintln!("warning: {warning}");
    }
    println!(
        "{} fit: {} chains x ({} + {}) iterations, {} divergences",
        report.kind,
        report.config.chains,
        report.config.warmup,
        report.config.draws,
        report.divergences
    );
    print!("{table}");
    report.ensure_converged()
}
