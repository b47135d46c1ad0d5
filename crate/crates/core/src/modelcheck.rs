//! Model checking: information criteria, posterior predictive checks, and
//! prior sensitivity tooling.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{Model, PairOutcome, Responses};
use crate::posterior::hpd_interval;
use crate::rng::{derive_rng, derive_seed};
use crate::sampler::{
    convergence_failures, nuts_sample, summarize, PosteriorDraws, SamplerConfig,
};
use crate::util::{log_sum_exp, mean, sample_sd, sample_var};

/// Widely applicable information criterion on the deviance scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaicSummary {
    /// Log pointwise predictive density.
    pub lppd: f64,
    /// Effective number of parameters.
    pub p_waic: f64,
    /// `-2 * (lppd - p_waic)`; lower is better.
    pub waic: f64,
}

/// Compute WAIC from a pointwise log-likelihood matrix indexed
/// `loglik[draw][observation]`.
///
/// Per observation, the predictive density is the draw-average of the
/// likelihood (computed via log-sum-exp) and the penalty is the sample
/// variance (n - 1 denominator) of the log-likelihood over draws.
pub fn waic(loglik: &[Vec<f64>]) -> Result<WaicSummary> {
    let n_draws = loglik.len();
    if n_draws < 2 {
        return Err(Error::validation(
            "WAIC needs at least two posterior draws of pointwise log-likelihood",
        ));
    }
    let n_obs = loglik[0].len();
    if n_obs == 0 {
        return Err(Error::validation("WAIC needs at least one observation"));
    }
    if loglik.iter().any(|row| row.len() != n_obs) {
        return Err(Error::validation("ragged log-likelihood matrix"));
    }

    let mut lppd = 0.0;
    let mut p_waic = 0.0;
    let mut col = vec![0.0; n_draws];
    for i in 0..n_obs {
        for (s, row) in loglik.iter().enumerate() {
            let v = row[i];
            if v.is_nan() {
                return Err(Error::validation(format!(
                    "NaN log-likelihood at draw {s}, observation {i}"
                )));
            }
            col[s] = v;
        }
        lppd += log_sum_exp(&col) - (n_draws as f64).ln();
        p_waic += sample_var(&col);
    }
    Ok(WaicSummary {
        lppd,
        p_waic,
        waic: -2.0 * (lppd - p_waic),
    })
}

/// Informativeness check for one parameter: the prior is flagged as
/// informative when the posterior standard deviation exceeds a tenth of the
/// prior standard deviation.
pub fn prior_informative(posterior_sd: f64, prior_sd: f64) -> Result<bool> {
    if !(prior_sd > 0.0) {
        return Err(Error::validation(format!(
            "prior standard deviation must be positive, got {prior_sd}"
        )));
    }
    if !(posterior_sd >= 0.0) {
        return Err(Error::validation(format!(
            "posterior standard deviation must be nonnegative, got {posterior_sd}"
        )));
    }
    Ok(posterior_sd > 0.1 * prior_sd)
}

/// Per-parameter prior informativeness report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InformativenessEntry {
    pub parameter: String,
    pub posterior_sd: f64,
    pub prior_sd: f64,
    pub informative: bool,
}

/// Apply [`prior_informative`] to every named parameter with a fixed prior
/// scale; `entries` pairs each parameter's pooled draws with its prior sd.
pub fn prior_informativeness(
    entries: &[(String, Vec<f64>, f64)],
) -> Result<Vec<InformativenessEntry>> {
    entries
        .iter()
        .map(|(name, draws, prior_sd)| {
            let posterior_sd = sample_sd(draws);
            if posterior_sd.is_nan() {
                return Err(Error::validation(format!(
                    "parameter {name}: need at least two draws for a posterior sd"
                )));
            }
            Ok(InformativenessEntry {
                parameter: name.clone(),
                posterior_sd,
                prior_sd: *prior_sd,
                informative: prior_informative(posterior_sd, *prior_sd)?,
            })
        })
        .collect()
}

/// One summary statistic tracked by a posterior predictive check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PpcStat {
    pub name: String,
    pub observed: f64,
    /// The statistic recomputed on each replicated dataset.
    pub replicated: Vec<f64>,
    /// Fraction of replications whose statistic is at least the observed one.
    pub tail_prob: f64,
}

/// Posterior predictive check report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PpcReport {
    pub n_rep: usize,
    /// Observed responses reduced to one numeric value per observation:
    /// success fractions for counts, win scores (1, 1/2, 0) for contest
    /// outcomes, event times for survival rows, raw values otherwise.
    pub observed_values: Vec<f64>,
    /// Replicated numeric values, one row per replication.
    pub replicated_values: Vec<Vec<f64>>,
    pub stats: Vec<PpcStat>,
}

/// Per-observation numeric reduction used by the predictive checks.
fn response_values(resp: &Responses, trials: Option<&[u64]>) -> Result<Vec<f64>> {
    match resp {
        Responses::Continuous(v) => Ok(v.clone()),
        Responses::Counts(c) => {
            let trials = trials.ok_or_else(|| {
                Error::validation("count responses need per-row trial counts")
            })?;
            if trials.len() != c.len() || trials.contains(&0) {
                return Err(Error::validation("trial counts do not match the responses"));
            }
            Ok(c.iter()
                .zip(trials)
                .map(|(&y, &n)| y as f64 / n as f64)
                .collect())
        }
        Responses::Outcomes(o) => Ok(o
            .iter()
            .map(|w| match w {
                PairOutcome::Algo1Wins => 1.0,
                PairOutcome::Tie => 0.5,
                PairOutcome::Algo0Wins => 0.0,
            })
            .collect()),
        Responses::Survival(s) => Ok(s.iter().map(|o| o.y).collect()),
    }
}

/// Named summary statistics of one dataset: mean, sd (when defined), max,
/// and min of the per-observation values, plus a rate specific to the
/// response family.
fn response_stats(resp: &Responses, values: &[f64]) -> Vec<(&'static str, f64)> {
    let mut stats = vec![("mean", mean(values))];
    if values.len() >= 2 {
        stats.push(("sd", sample_sd(values)));
    }
    stats.push(("max", values.iter().copied().fold(f64::NEG_INFINITY, f64::max)));
    stats.push(("min", values.iter().copied().fold(f64::INFINITY, f64::min)));
    match resp {
        Responses::Continuous(_) => {}
        Responses::Counts(_) => {}
        Responses::Outcomes(o) => {
            let ties = o.iter().filter(|w| **w == PairOutcome::Tie).count();
            stats.push(("tie_rate", ties as f64 / o.len() as f64));
        }
        Responses::Survival(s) => {
            let events = s.iter().filter(|o| o.event).count();
            stats.push(("event_rate", events as f64 / s.len() as f64));
        }
    }
    stats
}

/// Simulate `n_rep` datasets from the likelihood at posterior draws picked
/// uniformly at random (pooled across chains) and compare summary statistics
/// against the observed data.
///
/// For count responses the per-observation value is the success fraction, so
/// the `mean` statistic doubles as the overall success rate.
pub fn posterior_predictive_check(
    model: &dyn Model,
    draws: &PosteriorDraws,
    n_rep: usize,
    seed: u64,
) -> Result<PpcReport> {
    if n_rep == 0 {
        return Err(Error::validation("need at least one replication"));
    }
    let per_chain = draws.n_draws_per_chain();
    let total = draws.n_chains() * per_chain;
    if total == 0 {
        return Err(Error::validation("no posterior draws to replicate from"));
    }

    let trials = model.trial_counts();
    let observed = model.observed();
    let observed_values = response_values(&observed, trials.as_deref())?;
    let observed_stats = response_stats(&observed, &observed_values);

    let mut pick = derive_rng(seed, "ppc/pick");
    let mut replicated_values = Vec::with_capacity(n_rep);
    let mut replicated_stats = vec![Vec::with_capacity(n_rep); observed_stats.len()];
    for r in 0..n_rep {
        let k = pick.random_range(0..total);
        let params = &draws.draws[k / per_chain][k % per_chain];
        let sim = model.simulate(params, derive_seed(seed, &format!("ppc/rep/{r}")))?;
        if sim.len() != observed_values.len() {
            return Err(Error::validation(format!(
                "replication {r} produced {} responses for {} observations",
                sim.len(),
                observed_values.len()
            )));
        }
        let values = response_values(&sim, trials.as_deref())?;
        for (acc, (_, stat)) in replicated_stats.iter_mut().zip(response_stats(&sim, &values)) {
            acc.push(stat);
        }
        replicated_values.push(values);
    }

    let stats = observed_stats
        .into_iter()
        .zip(replicated_stats)
        .map(|((name, observed), replicated)| {
            let hits = replicated.iter().filter(|v| **v >= observed).count();
            PpcStat {
                name: name.to_string(),
                observed,
                tail_prob: hits as f64 / n_rep as f64,
                replicated,
            }
        })
        .collect();

    Ok(PpcReport {
        n_rep,
        observed_values,
        replicated_values,
        stats,
    })
}

/// Posterior location and 95% HPD interval of one parameter under one
/// prior-scale variant.
#[derive(Debug, Clone, Serialize)]
pub struct ParameterEstimate {
    pub name: String,
    pub mean: f64,
    pub sd: f64,
    pub hpd_low: f64,
    pub hpd_high: f64,
}

/// One refit of the model with every prior scale multiplied by `multiplier`.
#[derive(Debug, Clone, Serialize)]
pub struct SensitivityVariant {
    pub multiplier: f64,
    pub estimates: Vec<ParameterEstimate>,
    /// Convergence-gate violations for this refit; empty when clean.
    pub failures: Vec<String>,
}

/// Prior sensitivity report over a set of scale multipliers.
#[derive(Debug, Clone, Serialize)]
pub struct SensitivityReport {
    /// Sorted by multiplier; always contains the baseline (multiplier 1).
    pub variants: Vec<SensitivityVariant>,
    /// Largest |mean - baseline mean| / baseline posterior sd over every
    /// parameter of every clean non-baseline variant; 0 when no variant
    /// qualifies.
    pub max_mean_shift: f64,
    /// Informativeness of each top-level prior, judged on the baseline fit.
    pub informativeness: Vec<InformativenessEntry>,
}

/// Refit the model with all prior scales jointly multiplied by each entry of
/// `multipliers` (the baseline multiplier 1 is added when missing) and report
/// how the posterior moves. Refits run concurrently and share `cfg`, so the
/// baseline variant reproduces a plain fit with the same seed. Variants that
/// fail the convergence gate are reported with their violations rather than
/// dropped.
pub fn sensitivity_analysis<F>(
    build: F,
    multipliers: &[f64],
    cfg: &SamplerConfig,
) -> Result<SensitivityReport>
where
    F: Fn(f64) -> Result<Box<dyn Model>> + Sync,
{
    if multipliers.is_empty() {
        return Err(Error::validation("need at least one prior scale multiplier"));
    }
    if let Some(bad) = multipliers.iter().find(|m| !(m.is_finite() && **m > 0.0)) {
        return Err(Error::validation(format!(
            "prior scale multipliers must be positive and finite, got {bad}"
        )));
    }
    let mut scales = multipliers.to_vec();
    if !scales.contains(&1.0) {
        scales.push(1.0);
    }
    scales.sort_by(f64::total_cmp);
    scales.dedup();

    let variants = scales
        .par_iter()
        .map(|&multiplier| {
            let model = build(multiplier)?;
            let draws = nuts_sample(model.as_ref(), cfg)?;
            let summary = summarize(&draws)?;
            let estimates = summary
                .rows
                .iter()
                .enumerate()
                .map(|(i, row)| {
                    let (hpd_low, hpd_high) = hpd_interval(&draws.pooled(i), 0.95)?;
                    Ok(ParameterEstimate {
                        name: row.name.clone(),
                        mean: row.mean,
                        sd: row.sd,
                        hpd_low,
                        hpd_high,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(SensitivityVariant {
                multiplier,
                estimates,
                failures: convergence_failures(&summary),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let baseline = variants
        .iter()
        .find(|v| v.multiplier == 1.0)
        .expect("baseline variant is always present");

    let mut max_mean_shift: f64 = 0.0;
    for variant in &variants {
        if variant.multiplier == 1.0 || !variant.failures.is_empty() {
            continue;
        }
        for (est, base) in variant.estimates.iter().zip(&baseline.estimates) {
            if base.sd > 0.0 {
                max_mean_shift = max_mean_shift.max((est.mean - base.mean).abs() / base.sd);
            }
        }
    }

    let informativeness = build(1.0)?
        .prior_scales()
        .into_iter()
        .map(|(name, prior_sd)| {
            let est = baseline
                .estimates
                .iter()
                .find(|e| e.name == name)
                .ok_or_else(|| {
                    Error::validation(format!("prior scale for unknown parameter {name}"))
                })?;
            Ok(InformativenessEntry {
                parameter: name,
                posterior_sd: est.sd,
                prior_sd,
                informative: prior_informative(est.sd, prior_sd)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(SensitivityReport {
        variants,
        max_mean_shift,
        informativeness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn waic_matches_hand_computed_two_draw_case() {
        let loglik = vec![vec![0.5f64.ln()], vec![0.25f64.ln()]];
        let s = waic(&loglik).unwrap();
        let expected_lppd = (0.375f64).ln();
        let expected_p = 2.0f64.ln().powi(2) / 2.0;
        assert_relative_eq!(s.lppd, expected_lppd, epsilon = 1e-12);
        assert_relative_eq!(s.p_waic, expected_p, epsilon = 1e-12);
        assert_relative_eq!(s.waic, -2.0 * (expected_lppd - expected_p), epsilon = 1e-12);
        assert!((s.waic - 2.442).abs() < 5e-4);
    }

    #[test]
    fn duplicating_draws_shifts_only_the_variance_factor() {
        let loglik = vec![
            vec![-1.0, -0.5, -2.0],
            vec![-1.2, -0.7, -1.5],
            vec![-0.9, -0.4, -2.2],
        ];
        let base = waic(&loglik).unwrap();
        let mut doubled = loglik.clone();
        doubled.extend(loglik.iter().cloned());
        let dup = waic(&doubled).unwrap();
        assert_relative_eq!(dup.lppd, base.lppd, epsilon = 1e-12);
        let n = loglik.len() as f64;
        let factor = 2.0 * (n - 1.0) / (2.0 * n - 1.0);
        assert_relative_eq!(dup.p_waic, base.p_waic * factor, epsilon = 1e-12);
    }

    #[test]
    fn waic_rejects_degenerate_input() {
        assert!(waic(&[]).is_err());
        assert!(waic(&[vec![-1.0]]).is_err());
        assert!(waic(&[vec![-1.0], vec![]]).is_err());
        assert!(waic(&[vec![-1.0], vec![f64::NAN]]).is_err());
    }

    #[test]
    fn informativeness_follows_tenth_rule() {
        assert!(prior_informative(0.6, 5.0).unwrap());
        assert!(!prior_informative(0.04, 5.0).unwrap());
        assert!(prior_informative(0.0, 5.0).is_ok());
        assert!(prior_informative(0.5, 0.0).is_err());
        assert!(prior_informative(0.5, -1.0).is_err());
    }

    #[test]
    fn informativeness_table_reports_each_parameter() {
        let entries = vec![
            ("a".to_string(), vec![0.0, 1.0, 2.0, 1.0], 5.0),
            ("b".to_string(), vec![0.0, 0.01, -0.01, 0.0], 5.0),
        ];
        let table = prior_informativeness(&entries).unwrap();
        assert!(table[0].informative);
        assert!(!table[1].informative);
    }

    use crate::models::{binomial_model, BinomialInput, BinomialModel, BinomialRow};
    use crate::sampler::{ChainStats, Target};

    /// Full factorial binomial input over the given labels and noise levels.
    fn grid_input(
        algorithms: &[&str],
        benchmarks: &[&str],
        noises: &[f64],
        trials: u64,
        successes: &[u64],
    ) -> BinomialInput {
        let mut rows = Vec::new();
        let mut k = 0;
        for a in 0..algorithms.len() {
            for b in 0..benchmarks.len() {
                for &noise in noises {
                    rows.push(BinomialRow {
                        algorithm: a,
                        benchmark: b,
                        noise,
                        trials,
                        successes: successes[k % successes.len()],
                    });
                    k += 1;
                }
            }
        }
        BinomialInput {
            algorithms: algorithms.iter().map(|s| s.to_string()).collect(),
            benchmarks: benchmarks.iter().map(|s| s.to_string()).collect(),
            rows,
        }
    }

    fn fake_draws(model: &dyn Model, level: f64) -> PosteriorDraws {
        let dim = model.dim();
        let chain = |offset: f64| -> Vec<Vec<f64>> {
            (0..3).map(|j| vec![level + offset + 0.01 * j as f64; dim]).collect()
        };
        let stats = ChainStats {
            divergences: 0,
            max_depth_hits: 0,
            step_size: 0.5,
            mean_accept: 0.9,
        };
        PosteriorDraws {
            names: model.names(),
            draws: vec![chain(0.0), chain(0.005)],
            chain_stats: vec![stats.clone(), stats],
        }
    }

    #[test]
    fn ppc_replications_follow_the_contract_and_the_seed() {
        let input = grid_input(&["A", "B"], &["m1", "m2"], &[0.0], 40, &[10, 30, 20, 5]);
        let model = binomial_model(input).unwrap();
        let draws = fake_draws(&model, 0.2);

        let report = posterior_predictive_check(&model, &draws, 25, 11).unwrap();
        assert_eq!(report.n_rep, 25);
        assert_eq!(report.replicated_values.len(), 25);
        assert!(report.replicated_values.iter().all(|row| row.len() == 4));
        let names: Vec<&str> = report.stats.iter().map(|s| s.name.as_str()).collect();
        assert_eq!(names, ["mean", "sd", "max", "min"]);
        assert_relative_eq!(report.stats[0].observed, 65.0 / 160.0, epsilon = 1e-12);
        assert_relative_eq!(report.stats[3].observed, 0.125, epsilon = 1e-12);
        for stat in &report.stats {
            assert_eq!(stat.replicated.len(), 25);
            assert!((0.0..=1.0).contains(&stat.tail_prob));
        }

        let again = posterior_predictive_check(&model, &draws, 25, 11).unwrap();
        assert_eq!(report, again);
        let other = posterior_predictive_check(&model, &draws, 25, 12).unwrap();
        assert_ne!(report.replicated_values, other.replicated_values);

        assert!(posterior_predictive_check(&model, &draws, 0, 1).is_err());
    }

    #[test]
    fn ppc_is_calibrated_on_data_simulated_from_the_model() {
        let mut central = 0usize;
        let mut total = 0usize;
        for t in 0..20u64 {
            let mut template =
                grid_input(&["A", "B"], &["m1", "m2", "m3", "m4"], &[0.0], 30, &[0]);
            let model0 = binomial_model(template.clone()).unwrap();
            let mut rng = derive_rng(77, &format!("ppc-truth/{t}"));
            let truth: Vec<f64> =
                (0..model0.dim()).map(|_| rng.random_range(0.1..0.8)).collect();
            let sim = model0
                .simulate(&truth, derive_seed(78, &format!("ppc-data/{t}")))
                .unwrap();
            let Responses::Counts(counts) = sim else { panic!("binomial simulates counts") };
            for (row, y) in template.rows.iter_mut().zip(counts) {
                row.successes = y;
            }
            let model = binomial_model(template).unwrap();

            let cfg = SamplerConfig {
                chains: 2,
                warmup: 150,
                draws: 250,
                seed: derive_seed(79, &format!("ppc-fit/{t}")),
                ..SamplerConfig::default()
            };
            let draws = nuts_sample(&model, &cfg).unwrap();
            let report = posterior_predictive_check(
                &model,
                &draws,
                100,
                derive_seed(80, &format!("ppc-check/{t}")),
            )
            .unwrap();
            for stat in &report.stats {
                total += 1;
                if stat.tail_prob > 0.05 && stat.tail_prob < 0.95 {
                    central += 1;
                }
            }
        }
        assert!(
            central as f64 >= 0.8 * total as f64,
            "only {central} of {total} predictive stats were central"
        );
    }

    #[test]
    fn constant_observed_data_is_an_extreme_misfit() {
        let input = grid_input(&["A", "B"], &["m1", "m2", "m3"], &[0.0], 40, &[20]);
        let model = binomial_model(input).unwrap();
        let draws = fake_draws(&model, 0.0);
        let report = posterior_predictive_check(&model, &draws, 200, 3).unwrap();
        let tail = |name: &str| {
            report
                .stats
                .iter()
                .find(|s| s.name == name)
                .map(|s| s.tail_prob)
                .unwrap()
        };
        assert!(tail("sd") >= 0.99, "constant data has sd 0, every replication exceeds it");
        assert!(tail("min") < 0.2);
    }

    fn build_binomial(input: &BinomialInput) -> impl Fn(f64) -> Result<Box<dyn Model>> + Sync + '_ {
        move |m| {
            let model: Box<dyn Model> = Box::new(BinomialModel::new(input.clone(), m)?);
            Ok(model)
        }
    }

    #[test]
    fn sensitivity_includes_and_reproduces_the_baseline() {
        let input = grid_input(
            &["A", "B"],
            &["m1", "m2"],
            &[0.0, 3.0],
            25,
            &[20, 11, 17, 9, 23, 12, 14, 6],
        );
        let cfg = SamplerConfig {
            chains: 2,
            warmup: 150,
            draws: 200,
            seed: 42,
            ..SamplerConfig::default()
        };
        let report = sensitivity_analysis(build_binomial(&input), &[0.5, 2.0], &cfg).unwrap();
        let multipliers: Vec<f64> = report.variants.iter().map(|v| v.multiplier).collect();
        assert_eq!(multipliers, [0.5, 1.0, 2.0]);

        let model = binomial_model(input.clone()).unwrap();
        let draws = nuts_sample(&model, &cfg).unwrap();
        let summary = summarize(&draws).unwrap();
        let baseline = &report.variants[1];
        for (i, (est, row)) in baseline.estimates.iter().zip(&summary.rows).enumerate() {
            assert_eq!(est.name, row.name);
            assert_eq!(est.mean, row.mean);
            assert_eq!(est.sd, row.sd);
            let (lo, hi) = hpd_interval(&draws.pooled(i), 0.95).unwrap();
            assert_eq!((est.hpd_low, est.hpd_high), (lo, hi));
        }

        let deduped =
            sensitivity_analysis(build_binomial(&input), &[2.0, 0.5, 2.0, 1.0], &cfg).unwrap();
        assert_eq!(deduped.variants.len(), 3);

        for bad in [&[][..], &[0.0][..], &[-1.0][..], &[f64::NAN][..]] {
            assert!(sensitivity_analysis(build_binomial(&input), bad, &cfg).is_err());
        }
    }

    #[test]
    fn sensitivity_abundant_data_is_robust_to_prior_scaling() {
        let benchmarks: Vec<String> = (1..=8).map(|i| format!("m{i}")).collect();
        let bm_refs: Vec<&str> = benchmarks.iter().map(|s| s.as_str()).collect();
        let mut template = grid_input(&["A", "B"], &bm_refs, &[0.0, 3.0], 200, &[0]);
        let model0 = binomial_model(template.clone()).unwrap();
        let mut rng = derive_rng(12, "sensitivity-truth");
        let truth: Vec<f64> = model0
            .names()
            .iter()
            .map(|name| {
                if name.starts_with("b_noise") {
                    rng.random_range(-0.1..0.1)
                } else {
                    rng.random_range(-0.6..0.6)
                }
            })
            .collect();
        let Responses::Counts(counts) = model0.simulate(&truth, 99).unwrap() else {
            panic!("binomial simulates counts")
        };
        for (row, y) in template.rows.iter_mut().zip(counts) {
            row.successes = y;
        }

        let cfg = SamplerConfig {
            chains: 2,
            warmup: 300,
            draws: 1300,
            seed: 7,
            ..SamplerConfig::default()
        };
        let report =
            sensitivity_analysis(build_binomial(&template), &[0.5, 1.0, 2.0], &cfg).unwrap();
        for v in &report.variants {
            assert!(v.failures.is_empty(), "multiplier {}: {:?}", v.multiplier, v.failures);
        }
        assert!(
            report.max_mean_shift < 0.1,
            "posterior should be dominated by the data, shift {}",
            report.max_mean_shift
        );
    }

    #[test]
    fn sensitivity_two_observations_shift_and_flag_informative_priors() {
        let input = BinomialInput {
            algorithms: vec!["A".into(), "B".into()],
            benchmarks: vec!["m".into()],
            rows: vec![
                BinomialRow { algorithm: 0, benchmark: 0, noise: 0.0, trials: 20, successes: 19 },
                BinomialRow { algorithm: 1, benchmark: 0, noise: 0.0, trials: 20, successes: 1 },
            ],
        };
        let cfg = SamplerConfig {
            chains: 2,
            warmup: 300,
            draws: 400,
            target_accept: 0.9,
            seed: 21,
            ..SamplerConfig::default()
        };
        let report =
            sensitivity_analysis(build_binomial(&input), &[0.5, 1.0, 2.0], &cfg).unwrap();

        let baseline = &report.variants[1];
        let mut shift: f64 = 0.0;
        for v in &report.variants {
            for (est, base) in v.estimates.iter().zip(&baseline.estimates) {
                if base.sd > 0.0 {
                    shift = shift.max((est.mean - base.mean).abs() / base.sd);
                }
            }
        }
        assert!(shift > 0.1, "two observations should leave the prior visible, shift {shift}");
        assert!(report.informativeness.iter().any(|e| e.informative));
    }

    #[test]
    fn sensitivity_flags_unconverged_variants() {
        let input = grid_input(&["A", "B"], &["m1", "m2"], &[0.0], 25, &[20, 11, 17, 9]);
        let cfg = SamplerConfig {
            chains: 2,
            warmup: 60,
            draws: 60,
            seed: 5,
            ..SamplerConfig::default()
        };
        let report = sensitivity_analysis(build_binomial(&input), &[1.0, 2.0], &cfg).unwrap();
        for v in &report.variants {
            assert!(
                v.failures.iter().any(|f| f.contains("ESS")),
                "120 pooled draws cannot clear the ESS gate"
            );
            assert!(!v.estimates.is_empty());
        }
        assert_eq!(report.max_mean_shift, 0.0);
    }
}
