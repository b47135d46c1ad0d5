//! Read-only views of a saved fit: `diagnose`, `summarize`, `rank`.

use std::path::PathBuf;

use bayesbench_core::fit::{ratio_label, table_from_draws};
use bayesbench_core::models::ModelKind;
use bayesbench_core::posterior::{rank_posterior, RankSummary};
use bayesbench_core::sampler::{convergence_failures, summarize as summarize_draws, PosteriorDraws};
use bayesbench_core::{Error, Result};
use clap::Args;

use crate::artifacts::{fmt, load_fit, markdown_table, summary_table, SavedFit};

#[derive(Args)]
pub struct DiagnoseArgs {
    /// Fit directory produced by `fit`.
    fit: PathBuf,
}

pub fn diagnose(args: DiagnoseArgs) -> Result<()> {
    let saved = load_fit(&args.fit)?;
    let summary = summarize_draws(&saved.draws)?;
    let failures = convergence_failures(&summary);

    let rows: Vec<Vec<String>> = summary
        .rows
        .iter()
        .map(|r| {
            vec![
                r.name.clone(),
                fmt(r.rhat),
                format!("{:.0}", r.ess),
            ]
        })
        .collect();
    print!("{}", markdown_table(&["Parameter", "R-hat", "ESS"], &rows));
    println!(
        "\ndivergences: {}, max-depth hits: {}",
        summary.divergences, summary.max_depth_hits
    );
    if failures.is_empty() {
        println!("convergence: ok");
        Ok(())
    } else {
        for f in &failures {
            eprintln!("convergence: {f}");
        }
        Err(Error::convergence(failures.join("; ")))
    }
}

#[derive(Args)]
pub struct SummarizeArgs {
    /// Fit directory produced by `fit`.
    fit: PathBuf,
}

pub fn summarize(args: SummarizeArgs) -> Result<()> {
    let saved = load_fit(&args.fit)?;
    let (rows, _) = table_from_draws(saved.meta.spec.model, &saved.draws)?;
    print!("{}", summary_table(&rows, ratio_label(saved.meta.spec.model)));
    for warning in &saved.meta.warnings {
        eprintln!("warning: {warning}");
    }
    Ok(())
}

#[derive(Args)]
pub struct RankArgs {
    /// Fit directory produced by `fit`.
    fit: PathBuf,
    /// Posterior rank samples.
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long, env = "BAYESBENCH_SEED", default_value_t = 0)]
    seed: u64,
}

/// Strength draws per algorithm, oriented so that larger means better.
///
/// Under the CPU-time model the `a` effects are log costs, so they are
/// negated; every other model's effects already point toward "better".
pub fn strength_draws(saved: &SavedFit) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let labels = saved.meta.algorithms.clone();
    if labels.len() < 2 {
        return Err(Error::validation(
            "ranking needs at least two algorithms in the fit",
        ));
    }
    let flip = saved.meta.spec.model == ModelKind::StudentT;
    let draws: &PosteriorDraws = &saved.draws;
    let mut per_label = Vec::with_capacity(labels.len());
    for label in &labels {
        let idx = draws.param_index(&format!("a_{label}"))?;
        let mut pooled = draws.pooled(idx);
        if flip {
            for v in &mut pooled {
                *v = -*v;
            }
        }
        per_label.push(pooled);
    }
    Ok((labels, per_label))
}

pub fn rank_table(ranks: &RankSummary) -> String {
    let k = ranks.labels.len();
    let mut header: Vec<String> = vec!["Algorithm".into()];
    header.extend((1..=k).map(|r| format!("P(rank {r})")));
    header.push("Median rank".into());
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();

    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| ranks.median_rank[a].total_cmp(&ranks.median_rank[b]));
    let rows: Vec<Vec<String>> = order
        .into_iter()
        .map(|i| {
            let mut row = vec![ranks.labels[i].clone()];
            row.extend(ranks.rank_probs[i].iter().map(|p| fmt(*p)));
            row.push(format!("{:.1}", ranks.median_rank[i]));
            row
        })
        .collect();
    markdown_table(&header_refs, &rows)
}

pub fn rank(args: RankArgs) -> Result<()> {
    let saved = load_fit(&args.fit)?;
    let (labels, strengths) = strength_draws(&saved)?;
    let ranks = rank_posterior(&labels, &strengths, None, args.samples, args.seed)?;
    print!("{}", rank_table(&ranks));
    Ok(())
}
