//! Model-ready views of a run dataset.
//!
//! Each preparation selects a slice of the dataset, indexes the algorithms
//! and benchmarks it actually contains (sorted by name), and emits the rows
//! the corresponding model consumes. Model inputs are always derived from a
//! dataset on demand, never persisted on their own.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{
    BinomialInput, BinomialRow, CpuTimeInput, CpuTimeRow, PairInput, PairOutcome, PairRow,
    RelativeImprovementInput, RelativeImprovementRow, SurvivalInput, SurvivalRow,
};
use crate::optim::AlgorithmId;
use crate::rng::derive_rng;

use super::{Dataset, RunRecord};

/// Row selection for the prepare operations. `None` keeps every value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Filters {
    pub algorithms: Option<Vec<AlgorithmId>>,
    pub benchmarks: Option<Vec<String>>,
    pub noise_levels: Option<Vec<f64>>,
    pub budgets_per_dim: Option<Vec<usize>>,
}

impl Filters {
    pub fn none() -> Self {
        Filters::default()
    }

    pub fn algorithms(mut self, ids: &[AlgorithmId]) -> Self {
        self.algorithms = Some(ids.to_vec());
        self
    }

    pub fn benchmarks(mut self, ids: &[&str]) -> Self {
        self.benchmarks = Some(ids.iter().map(|s| s.to_string()).collect());
        self
    }

    pub fn noise_levels(mut self, levels: &[f64]) -> Self {
        self.noise_levels = Some(levels.to_vec());
        self
    }

    pub fn budgets_per_dim(mut self, budgets: &[usize]) -> Self {
        self.budgets_per_dim = Some(budgets.to_vec());
        self
    }

    pub fn matches(&self, r: &RunRecord) -> bool {
        self.algorithms
            .as_ref()
            .is_none_or(|v| v.contains(&r.algorithm))
            && self
                .benchmarks
                .as_ref()
                .is_none_or(|v| v.contains(&r.benchmark))
            && self
                .noise_levels
                .as_ref()
                .is_none_or(|v| v.contains(&r.noise))
            && self
                .budgets_per_dim
                .as_ref()
                .is_none_or(|v| v.contains(&r.budget_per_dim))
    }
}

/// How a dead heat between two runs becomes a pair outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieMode {
    /// Assign the win uniformly at random (for the strict win/loss model).
    RandomWinner,
    /// Emit an explicit tie row (for the tie-aware model).
    KeepTies,
}

impl fmt::Display for TieMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TieMode::RandomWinner => "random_winner",
            TieMode::KeepTies => "keep_ties",
        })
    }
}

impl FromStr for TieMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random_winner" => Ok(TieMode::RandomWinner),
            "keep_ties" => Ok(TieMode::KeepTies),
            other => Err(Error::validation(format!(
                "unknown tie mode `{other}`; expected random_winner or keep_ties"
            ))),
        }
    }
}

struct Slice<'a> {
    records: Vec<&'a RunRecord>,
    algorithms: Vec<AlgorithmId>,
    benchmarks: Vec<String>,
}

impl Slice<'_> {
    fn algorithm_index(&self, id: AlgorithmId) -> usize {
        self.algorithms.iter().position(|&a| a == id).unwrap()
    }

    fn benchmark_index(&self, name: &str) -> usize {
        self.benchmarks.iter().position(|b| b == name).unwrap()
    }

    fn algorithm_names(&self) -> Vec<String> {
        self.algorithms.iter().map(|a| a.to_string()).collect()
    }
}

fn select<'a>(
    dataset: &'a Dataset,
    filters: &Filters,
    op: &str,
    extra: impl Fn(&RunRecord) -> bool,
) -> Result<Slice<'a>> {
    let records: Vec<&RunRecord> = dataset
        .records
        .iter()
        .filter(|r| filters.matches(r) && extra(r))
        .collect();
    if records.is_empty() {
        return Err(Error::validation(format!(
            "{op}: no rows match the filters"
        )));
    }
    let mut algorithms: Vec<AlgorithmId> = records.iter().map(|r| r.algorithm).collect();
    algorithms.sort_by_key(|a| a.as_str());
    algorithms.dedup();
    let mut benchmarks: Vec<String> = records.iter().map(|r| r.benchmark.clone()).collect();
    benchmarks.sort();
    benchmarks.dedup();
    Ok(Slice {
        records,
        algorithms,
        benchmarks,
    })
}

/// Treat negative zero like zero so grouping by noise level is stable.
fn noise_key(noise: f64) -> u64 {
    if noise == 0.0 { 0.0f64 } else { noise }.to_bits()
}

/// Aggregate solved counts at `epsilon` into binomial trials per
/// (algorithm, benchmark, noise, budget) group.
pub fn prepare_binomial(dataset: &Dataset, epsilon: f64, filters: &Filters) -> Result<BinomialInput> {
    let k = dataset.epsilon_index(epsilon)?;
    let s = select(dataset, filters, "prepare_binomial", |_| true)?;
    let mut groups: BTreeMap<(usize, usize, u64, usize), (u64, u64)> = BTreeMap::new();
    for r in &s.records {
        let key = (
            s.algorithm_index(r.algorithm),
            s.benchmark_index(&r.benchmark),
            noise_key(r.noise),
            r.budget_per_dim,
        );
        let cell = groups.entry(key).or_insert((0, 0));
        cell.0 += 1;
        if r.solved_at[k] {
            cell.1 += 1;
        }
    }
    let rows = groups
        .into_iter()
        .map(|((algorithm, benchmark, noise_bits, _budget), (trials, successes))| BinomialRow {
            algorithm,
            benchmark,
            noise: f64::from_bits(noise_bits),
            trials,
            successes,
        })
        .collect();
    Ok(BinomialInput {
        algorithms: s.algorithm_names(),
        benchmarks: s.benchmarks,
        rows,
    })
}

/// Distance improvement over the single-read random-search baseline, from
/// noiseless rows only. The baseline for each (benchmark, budget) cell is
/// the repetition mean of the baseline algorithm's distances; cells whose
/// baseline distance is zero are dropped and reported in the warning list.
/// Random-search rows never appear in the response set.
pub fn prepare_relative_improvement(
    dataset: &Dataset,
    filters: &Filters,
) -> Result<(RelativeImprovementInput, Vec<String>)> {
    let s = select(
        dataset,
        filters,
        "prepare_relative_improvement",
        |r| r.noise == 0.0,
    )?;
    let mut baseline: BTreeMap<(usize, usize), Vec<f64>> = BTreeMap::new();
    for r in &s.records {
        if r.algorithm == AlgorithmId::RandomSearch1 {
            baseline
                .entry((s.benchmark_index(&r.benchmark), r.budget_per_dim))
                .or_default()
                .push(r.euclid);
        }
    }

    let responders: Vec<AlgorithmId> = s
        .algorithms
        .iter()
        .copied()
        .filter(|&a| a != AlgorithmId::RandomSearch1 && a != AlgorithmId::RandomSearch2)
        .collect();
    if responders.is_empty() {
        return Err(Error::validation(
            "prepare_relative_improvement: no non-baseline algorithms in the slice",
        ));
    }

    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    let mut dropped: BTreeSet<(usize, usize)> = BTreeSet::new();
    for r in &s.records {
        if r.algorithm == AlgorithmId::RandomSearch1 || r.algorithm == AlgorithmId::RandomSearch2 {
            continue;
        }
        let bm = s.benchmark_index(&r.benchmark);
        let key = (bm, r.budget_per_dim);
        let base = baseline.get(&key).ok_or_else(|| {
            Error::validation(format!(
                "prepare_relative_improvement: no RandomSearch1 baseline for benchmark {}, budget {} per dim",
                r.benchmark, r.budget_per_dim
            ))
        })?;
        let mean = base.iter().sum::<f64>() / base.len() as f64;
        if mean == 0.0 {
            if dropped.insert(key) {
                warnings.push(format!(
                    "dropped benchmark {}, budget {} per dim: baseline distance is zero",
                    r.benchmark, r.budget_per_dim
                ));
            }
            continue;
        }
        let algorithm = responders.iter().position(|&a| a == r.algorithm).unwrap();
        rows.push(RelativeImprovementRow {
            algorithm,
            benchmark: bm,
            y: ((mean - r.euclid) / mean).clamp(-1.0, 1.0),
        });
    }
    if rows.is_empty() {
        return Err(Error::validation(
            "prepare_relative_improvement: every cell was dropped",
        ));
    }
    Ok((
        RelativeImprovementInput {
            algorithms: responders.iter().map(|a| a.to_string()).collect(),
            benchmarks: s.benchmarks,
            rows,
        },
        warnings,
    ))
}

/// Head-to-head outcomes for every unordered algorithm pair within each
/// (benchmark, repetition) cell of a single-condition slice. The strictly
/// lower final gap wins; dead heats follow `tie_mode`, with `seed` driving
/// the random assignments.
pub fn prepare_pairs(
    dataset: &Dataset,
    filters: &Filters,
    tie_mode: TieMode,
    seed: u64,
) -> Result<PairInput> {
    let s = select(dataset, filters, "prepare_pairs", |_| true)?;
    if s.algorithms.len() < 2 {
        return Err(Error::validation(
            "prepare_pairs: need at least two algorithms in the slice",
        ));
    }
    let mut cells: BTreeMap<(usize, usize), Vec<(usize, f64)>> = BTreeMap::new();
    let mut seen: BTreeSet<(usize, usize, usize)> = BTreeSet::new();
    for r in &s.records {
        let alg = s.algorithm_index(r.algorithm);
        let bm = s.benchmark_index(&r.benchmark);
        if !seen.insert((alg, bm, r.repetition)) {
            return Err(Error::validation(format!(
                "prepare_pairs: {} appears more than once for benchmark {}, repetition {}; \
                 filters must pin one noise level and one budget",
                r.algorithm, r.benchmark, r.repetition
            )));
        }
        cells.entry((bm, r.repetition)).or_default().push((alg, r.delta_f));
    }
    let mut rng = derive_rng(seed, "prepare/pairs");
    let mut rows = Vec::new();
    for ((bm, _rep), mut members) in cells {
        members.sort_by_key(|&(alg, _)| alg);
        for i in 0..members.len() {
            for j in i + 1..members.len() {
                let (algo0, d0) = members[i];
                let (algo1, d1) = members[j];
                let outcome = if d0 < d1 {
                    PairOutcome::Algo0Wins
                } else if d1 < d0 {
                    PairOutcome::Algo1Wins
                } else {
                    match tie_mode {
                        TieMode::KeepTies => PairOutcome::Tie,
                        TieMode::RandomWinner => {
                            if rng.random::<bool>() {
                                PairOutcome::Algo0Wins
                            } else {
                                PairOutcome::Algo1Wins
                            }
                        }
                    }
                };
                rows.push(PairRow {
                    algo1,
                    algo0,
                    benchmark: bm,
                    outcome,
                });
            }
        }
    }
    Ok(PairInput {
        algorithms: s.algorithm_names(),
        benchmarks: s.benchmarks,
        rows,
    })
}

/// Time-to-solution rows at `epsilon` for a single-budget slice: solved runs
/// contribute their per-dimension solving index as an event, unsolved runs a
/// right-censored observation at the per-dimension budget.
pub fn prepare_survival(dataset: &Dataset, epsilon: f64, filters: &Filters) -> Result<SurvivalInput> {
    let k = dataset.epsilon_index(epsilon)?;
    let s = select(dataset, filters, "prepare_survival", |_| true)?;
    let budgets: BTreeSet<usize> = s.records.iter().map(|r| r.budget_per_dim).collect();
    if budgets.len() > 1 {
        return Err(Error::validation(format!(
            "prepare_survival: slice spans budgets {budgets:?}; filter to a single budget"
        )));
    }
    let rows = s
        .records
        .iter()
        .map(|r| {
            let limit = r.budget_per_dim as f64;
            let (y, event) = match r.solve_feval[k] {
                Some(feval) => (feval as f64 / r.dimension as f64, true),
                None => (limit, false),
            };
            SurvivalRow {
                algorithm: s.algorithm_index(r.algorithm),
                benchmark: s.benchmark_index(&r.benchmark),
                noise: r.noise,
                y,
                event,
                censor_limit: limit,
            }
        })
        .collect();
    Ok(SurvivalInput {
        algorithms: s.algorithm_names(),
        benchmarks: s.benchmarks,
        rows,
    })
}

/// CPU cost per ten thousand evaluations for every selected run.
pub fn prepare_cpu(dataset: &Dataset, filters: &Filters) -> Result<CpuTimeInput> {
    let s = select(dataset, filters, "prepare_cpu", |_| true)?;
    let rows = s
        .records
        .iter()
        .map(|r| {
            let evals = r.evaluations_used();
            if evals == 0 {
                return Err(Error::validation(format!(
                    "prepare_cpu: run {} / {} has zero evaluations",
                    r.algorithm, r.benchmark
                )));
            }
            Ok(CpuTimeRow {
                algorithm: s.algorithm_index(r.algorithm),
                benchmark: s.benchmark_index(&r.benchmark),
                y: 1e4 * r.cpu_seconds / evals as f64,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CpuTimeInput {
        algorithms: s.algorithm_names(),
        benchmarks: s.benchmarks,
        rows,
    })
}
