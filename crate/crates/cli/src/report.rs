//! The `report` subcommand: render a saved fit into markdown plus SVG plots.

use std::path::{Path, PathBuf};

use bayesbench_core::fit::{ratio_label, table_from_draws};
use bayesbench_core::harness::{prepare_cpu, read_csv, Dataset};
use bayesbench_core::models::ModelKind;
use bayesbench_core::posterior::rank_posterior;
use bayesbench_core::sampler::convergence_failures;
use bayesbench_core::util::mean;
use bayesbench_core::{Error, Result};
use clap::Args;

use crate::artifacts::{fmt, load_fit, markdown_table, summary_table, OutDir, SavedFit};
use crate::inspect::{rank_table, strength_draws};
use crate::plots;

#[derive(Args)]
pub struct ReportArgs {
    /// Fit directory produced by `fit`.
    fit: PathBuf,
    /// Directory for `report.md` and its plots.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, env = "BAYESBENCH_SEED", default_value_t = 0)]
    seed: u64,
    /// Overwrite existing output files.
    #[arg(long)]
    force: bool,
}

fn dataset_for(saved: &SavedFit) -> Result<Dataset> {
    read_csv(Path::new(&saved.meta.data))
}

/// Average per-dimension evaluations until the tolerance was hit (censored
/// runs count at their full budget), next to each algorithm's hazard ratio.
fn evaluations_section(saved: &SavedFit, hr_by_label: &[(String, Option<f64>)]) -> Result<String> {
    let dataset = dataset_for(saved)?;
    let spec = &saved.meta.spec;
    let epsilon = spec
        .epsilon
        .ok_or_else(|| Error::validation("survival fit is missing its epsilon"))?;
    let k = dataset.epsilon_index(epsilon)?;

    let rows: Vec<Vec<String>> = hr_by_label
        .iter()
        .map(|(label, hr)| {
            let evals: Vec<f64> = dataset
                .records
                .iter()
                .filter(|r| spec.filters.matches(r) && r.algorithm.as_str() == label)
                .map(|r| match r.solve_feval[k] {
                    Some(feval) => feval as f64 / r.dimension as f64,
                    None => r.budget_per_dim as f64,
                })
                .collect();
            let avg = if evals.is_empty() { f64::NAN } else { mean(&evals) };
            vec![
                label.clone(),
                format!("{avg:.1}"),
                hr.map(fmt).unwrap_or_default(),
            ]
        })
        .collect();
    Ok(format!(
        "## Evaluations to tolerance {epsilon}\n\n{}",
        markdown_table(&["Algorithm", "Avg evals/dim", "HR"], &rows)
    ))
}

fn cpu_section(saved: &SavedFit, out: &OutDir) -> Result<String> {
    let dataset = dataset_for(saved)?;
    let input = prepare_cpu(&dataset, &saved.meta.spec.filters)?;
    let groups: Vec<Vec<f64>> = (0..input.algorithms.len())
        .map(|a| {
            input
                .rows
                .iter()
                .filter(|r| r.algorithm == a)
                .map(|r| r.y)
                .collect()
        })
        .collect();
    let svg = plots::grouped_boxplot(
        "CPU cost per 10k evaluations",
        "seconds / 10k evals",
        &input.algorithms,
        &groups,
    )?;
    out.write("cpu_boxplot.svg", &svg)?;
    Ok("## CPU time\n\n![cpu time](cpu_boxplot.svg)\n".to_string())
}

pub fn run(args: ReportArgs) -> Result<()> {
    let saved = load_fit(&args.fit)?;
    let kind = saved.meta.spec.model;
    let out = OutDir::create(&args.out, args.force)?;

    let (rows, summary) = table_from_draws(kind, &saved.draws)?;
    let failures = convergence_failures(&summary);

    let mut md = format!(
        "# {} fit\n\ndata: `{}`\n\nsampler: {} chains, {} warmup + {} draws per chain, seed {}\n\n",
        kind,
        saved.meta.data,
        saved.meta.sampler.chains,
        saved.meta.sampler.warmup,
        saved.meta.sampler.draws,
        saved.meta.sampler.seed,
    );

    md.push_str("## Posterior summary\n\n");
    md.push_str(&summary_table(&rows, ratio_label(kind)));

    md.push_str("\n## Convergence\n\n");
    md.push_str(&format!(
        "divergences: {}, max-depth hits: {}\n\n",
        summary.divergences, summary.max_depth_hits
    ));
    if failures.is_empty() {
        md.push_str("All parameters pass the R-hat and effective-sample-size gates.\n");
    } else {
        md.push_str("**Convergence failures:**\n\n");
        for f in &failures {
            md.push_str(&format!("- {f}\n"));
        }
    }
    let diag_rows: Vec<Vec<String>> = summary
        .rows
        .iter()
        .map(|r| vec![r.name.clone(), fmt(r.rhat), format!("{:.0}", r.ess)])
        .collect();
    md.push('\n');
    md.push_str(&markdown_table(&["Parameter", "R-hat", "ESS"], &diag_rows));
    let chain_rows: Vec<Vec<String>> = saved
        .diagnostics
        .chain_stats
        .iter()
        .enumerate()
        .map(|(c, s)| {
            vec![
                c.to_string(),
                format!("{:.4}", s.step_size),
                fmt(s.mean_accept),
                s.divergences.to_string(),
            ]
        })
        .collect();
    md.push('\n');
    md.push_str(&markdown_table(
        &["Chain", "Step size", "Mean accept", "Divergences"],
        &chain_rows,
    ));

    let waic = &saved.meta.waic;
    md.push_str(&format!(
        "\n## Model fit\n\nWAIC {} (lppd {}, effective parameters {}).\n\n",
        fmt(waic.waic),
        fmt(waic.lppd),
        fmt(waic.p_waic)
    ));
    let info_rows: Vec<Vec<String>> = saved
        .meta
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
        &info_rows,
    ));

    if saved.meta.algorithms.len() >= 2 {
        let (labels, strengths) = strength_draws(&saved)?;
        let ranks = rank_posterior(&labels, &strengths, None, 10_000, args.seed)?;
        md.push_str("\n## Ranking\n\n");
        md.push_str(&rank_table(&ranks));
        let svg = plots::rank_bars(&ranks.labels, &ranks.rank_probs)?;
        out.write("rank_bars.svg", &svg)?;
        md.push_str("\n![rank probabilities](rank_bars.svg)\n");
    }

    if kind == ModelKind::Cox {
        let hr_by_label: Vec<(String, Option<f64>)> = saved
            .meta
            .algorithms
            .iter()
            .map(|label| {
                let hr = rows
                    .iter()
                    .find(|r| r.parameter == format!("a_{label}"))
                    .and_then(|r| r.ratio);
                (label.clone(), hr)
            })
            .collect();
        md.push('\n');
        md.push_str(&evaluations_section(&saved, &hr_by_label)?);
    }

    if kind == ModelKind::StudentT {
        md.push('\n');
        md.push_str(&cpu_section(&saved, &out)?);
    }

    md.push_str("\n## Parameter plots\n\n");
    for (idx, row) in rows.iter().enumerate() {
        let name = &row.parameter;
        let trace = plots::trace_plot(&format!("trace of {name}"), &saved.draws.per_chain(idx))?;
        let density = plots::density_plot(
            &format!("posterior of {name}"),
            &saved.draws.pooled(idx),
            Some((row.hpd_low, row.hpd_high)),
            Some(row.mean),
        )?;
        out.write(&format!("trace_{name}.svg"), &trace)?;
        out.write(&format!("density_{name}.svg"), &density)?;
        md.push_str(&format!(
            "### {name}\n\n![trace of {name}](trace_{name}.svg)\n![posterior of {name}](density_{name}.svg)\n\n",
        ));
    }

    let path = out.write("report.md", &md)?;
    println!("report written to {}", path.display());
    if !failures.is_empty() {
        eprintln!("warning: the fit has convergence failures; see the report");
    }
    Ok(())
}
