//! `--filter key=value` parsing.

use std::str::FromStr;

use bayesbench_core::harness::Filters;
use bayesbench_core::optim::AlgorithmId;
use bayesbench_core::{Error, Result};

/// Parse repeated `key=value` pairs into dataset filters.
///
/// Keys: `algorithm`, `benchmark`, `noise`, `budget` (plural forms accepted);
/// values may be comma-separated lists and repeated keys accumulate.
pub fn parse_filters(pairs: &[String]) -> Result<Filters> {
    let mut algorithms: Vec<AlgorithmId> = Vec::new();
    let mut benchmarks: Vec<String> = Vec::new();
    let mut noises: Vec<f64> = Vec::new();
    let mut budgets: Vec<usize> = Vec::new();

    for pair in pairs {
        let (key, value) = pair.split_once('=').ok_or_else(|| {
            Error::validation(format!("filter `{pair}` is not of the form key=value"))
        })?;
        for item in value.split(',').filter(|s| !s.is_empty()) {
            match key {
                "algorithm" | "algorithms" => algorithms.push(AlgorithmId::from_str(item)?),
                "benchmark" | "benchmarks" => benchmarks.push(item.to_string()),
                "noise" | "noise_level" => noises.push(item.parse().map_err(|e| {
                    Error::validation(format!("filter noise `{item}`: {e}"))
                })?),
                "budget" | "budgets" | "budget_per_dim" => {
                    budgets.push(item.parse().map_err(|e| {
                        Error::validation(format!("filter budget `{item}`: {e}"))
                    })?)
                }
                other => {
                    return Err(Error::validation(format!(
                        "unknown filter key `{other}` (expected algorithm, benchmark, noise, or budget)"
                    )))
                }
            }
        }
    }

    let mut filters = Filters::none();
    if !algorithms.is_empty() {
        filters = filters.algorithms(&algorithms);
    }
    if !benchmarks.is_empty() {
        let refs: Vec<&str> = benchmarks.iter().map(String::as_str).collect();
        filters = filters.benchmarks(&refs);
    }
    if !noises.is_empty() {
        filters = filters.noise_levels(&noises);
    }
    if !budgets.is_empty() {
        filters = filters.budgets_per_dim(&budgets);
    }
    Ok(filters)
}
