//! Model criticism on a saved fit: `ppc` and `sensitivity`.

use std::path::{Path, PathBuf};

use bayesbench_core::fit::build_model;
use bayesbench_core::harness::read_csv;
use bayesbench_core::modelcheck::{
    posterior_predictive_check, sensitivity_analysis, PpcReport, SensitivityReport,
};
use bayesbench_core::{Error, Result};
use clap::Args;

use crate::artifacts::{fmt, load_fit, markdown_table, OutDir, SavedFit};
use crate::plots;

fn load_fit_with_data(dir: &Path) -> Result<(SavedFit, bayesbench_core::harness::Dataset)> {
    let saved = load_fit(dir)?;
    let dataset = read_csv(Path::new(&saved.meta.data))?;
    Ok((saved, dataset))
}

#[derive(Args)]
pub struct PpcArgs {
    /// Fit directory produced by `fit`.
    fit: PathBuf,
    /// Number of replicated datasets.
    #[arg(long, default_value_t = 200)]
    reps: usize,
    #[arg(long, env = "BAYESBENCH_SEED", default_value_t = 0)]
    seed: u64,
    /// Output directory (defaults to the fit directory).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overwrite existing output files.
    #[arg(long)]
    force: bool,
}

pub fn ppc_table(report: &PpcReport) -> String {
    let rows: Vec<Vec<String>> = report
        .stats
        .iter()
        .map(|s| {
            let rep_mean = s.replicated.iter().sum::<f64>() / s.replicated.len() as f64;
            vec![
                s.name.clone(),
                fmt(s.observed),
                fmt(rep_mean),
                fmt(s.tail_prob),
            ]
        })
        .collect();
    markdown_table(
        &["Statistic", "Observed", "Replicated mean", "Tail probability"],
        &rows,
    )
}

pub fn ppc(args: PpcArgs) -> Result<()> {
    let (saved, dataset) = load_fit_with_data(&args.fit)?;
    let (model, _) = build_model(&dataset, &saved.meta.spec)?;
    let report = posterior_predictive_check(model.as_ref(), &saved.draws, args.reps, args.seed)?;

    let table = ppc_table(&report);
    let mean_stat = &report.stats[0];
    let overlay = plots::density_plot(
        &format!("replicated `{}` vs observed", mean_stat.name),
        &mean_stat.replicated,
        None,
        Some(mean_stat.observed),
    )?;

    let out = OutDir::create(args.out.as_deref().unwrap_or(&args.fit), args.force)?;
    let md = format!(
        "## Posterior predictive check\n\n{} replications, seed {}.\n\n{}\n![replicated mean](ppc.svg)\n",
        report.n_rep, args.seed, table
    );
    out.write("ppc.md", &md)?;
    out.write("ppc.svg", &overlay)?;
    print!("{table}");
    Ok(())
}

#[derive(Args)]
pub struct SensitivityArgs {
    /// Fit directory produced by `fit`.
    fit: PathBuf,
    /// Comma-separated prior-scale multipliers.
    #[arg(long, default_value = "0.5,1,2")]
    multipliers: String,
    /// Output directory (defaults to the fit directory).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overwrite existing output files.
    #[arg(long)]
    force: bool,
}

pub fn sensitivity_markdown(report: &SensitivityReport) -> String {
    let mut md = String::from("## Prior sensitivity\n");
    for variant in &report.variants {
        md.push_str(&format!("\n### prior scales x {}\n\n", variant.multiplier));
        if !variant.failures.is_empty() {
            md.push_str(&format!(
                "**Did not converge:** {}\n\n",
                variant.failures.join("; ")
            ));
        }
        let rows: Vec<Vec<String>> = variant
            .estimates
            .iter()
            .map(|e| {
                vec![
                    e.name.clone(),
                    fmt(e.mean),
                    fmt(e.hpd_low),
                    fmt(e.hpd_high),
                ]
            })
            .collect();
        md.push_str(&markdown_table(
            &["Parameter", "Mean", "HPD low", "HPD high"],
            &rows,
        ));
    }
    md.push_str(&format!(
        "\nMax mean shift: {} baseline posterior sd.\n\n### Prior informativeness\n\n",
        fmt(report.max_mean_shift)
    ));
    let rows: Vec<Vec<String>> = report
        .informativeness
        .iter()
        .map(|e| {
            vec![
                e.parameter.clone(),
                fmt(e.posterior_sd),
                fmt(e.prior_sd),
                if e.informative { "yes" } else { "no" }.to_string(),
            ]
        })
        .collect();
    md.push_str(&markdown_table(
        &["Parameter", "Posterior sd", "Prior sd", "Informative"],
        &rows,
    ));
    md
}

pub fn sensitivity(args: SensitivityArgs) -> Result<()> {
    let multipliers: Vec<f64> = args
        .multipliers
        .split(',')
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|e| Error::validation(format!("multiplier `{s}`: {e}")))
        })
        .collect::<Result<_>>()?;

    let (saved, dataset) = load_fit_with_data(&args.fit)?;
    let base = saved.meta.spec.clone();
    let build = |m: f64| {
        let mut spec = base.clone();
        spec.prior_scale = base.prior_scale * m;
        Ok(build_model(&dataset, &spec)?.0)
    };
    let report = sensitivity_analysis(build, &multipliers, &saved.meta.sampler)?;

    let md = sensitivity_markdown(&report);
    let out = OutDir::create(args.out.as_deref().unwrap_or(&args.fit), args.force)?;
    out.write("sensitivity.md", &md)?;
    println!(
        "max mean shift {} baseline sd across {} variants",
        fmt(report.max_mean_shift),
        report.variants.len()
    );
    for variant in &report.variants {
        if !variant.failures.is_empty() {
            eprintln!(
                "warning: multiplier {} failed convergence: {}",
                variant.multiplier,
                variant.failures.join("; ")
            );
        }
    }
    Ok(())
}
