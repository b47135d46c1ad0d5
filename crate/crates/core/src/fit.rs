//! One-call pipeline from a benchmark dataset to a fitted, summarized model.
//!
//! A [`FitSpec`] names the model, the dataset slice it should see, and any
//! sampler overrides; [`run_fit`] prepares the model input, samples, and
//! returns the draws next to a summary table, diagnostics, WAIC, and prior
//! informativeness. A fit that fails the convergence gate is still returned
//! in full so callers can persist the evidence before reporting failure.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::{
    prepare_binomial, prepare_cpu, prepare_pairs, prepare_relative_improvement, prepare_survival,
    Dataset, Filters, TieMode,
};
use crate::modelcheck::{prior_informative, waic, InformativenessEntry, WaicSummary};
use crate::models::{
    loglik_matrix, BinomialModel, BradleyTerryModel, CoxModel, DavidsonModel, Model, ModelKind,
    RelativeImprovementModel, StudentTModel,
};
use crate::posterior::hpd_interval;
use crate::rng::derive_seed;
use crate::sampler::{
    convergence_failures, nuts_sample, summarize, PosteriorDraws, PosteriorSummary, SamplerConfig,
};

/// Probability mass of the reported HPD intervals.
pub const HPD_MASS: f64 = 0.95;

/// Everything needed to fit one model against a dataset.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitSpec {
    pub model: ModelKind,
    /// Success threshold; required by the binomial and survival models,
    /// rejected by the others.
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub filters: Filters,
    /// Joint multiplier on every prior scale.
    #[serde(default = "default_prior_scale")]
    pub prior_scale: f64,
    #[serde(default)]
    pub chains: Option<usize>,
    /// Adaptation iterations per chain.
    #[serde(default)]
    pub warmup: Option<usize>,
    /// Total iterations per chain, warmup included.
    #[serde(default)]
    pub iters: Option<usize>,
    #[serde(default)]
    pub seed: u64,
}

fn default_prior_scale() -> f64 {
    1.0
}

impl FitSpec {
    pub fn new(model: ModelKind) -> Self {
        FitSpec {
            model,
            epsilon: None,
            filters: Filters::default(),
            prior_scale: 1.0,
            chains: None,
            warmup: None,
            iters: None,
            seed: 0,
        }
    }
}

/// One row of the posterior summary table.
#[derive(Debug, Clone, Serialize)]
pub struct FitRow {
    pub parameter: String,
    pub mean: f64,
    pub sd: f64,
    pub hpd_low: f64,
    pub hpd_high: f64,
    pub rhat: f64,
    pub ess: f64,
    /// `exp(mean)` for linear-predictor effects: an odds ratio under the
    /// binomial model, a hazard ratio under the survival model.
    pub ratio: Option<f64>,
}

/// A fitted model with its posterior, summary table, and health checks.
pub struct FitReport {
    pub kind: ModelKind,
    pub model: Box<dyn Model>,
    pub draws: PosteriorDraws,
    pub config: SamplerConfig,
    pub rows: Vec<FitRow>,
    pub divergences: usize,
    pub max_depth_hits: usize,
    /// Convergence-gate violations; empty when the fit is usable.
    pub failures: Vec<String>,
    pub waic: WaicSummary,
    pub informativeness: Vec<InformativenessEntry>,
    /// Data-preparation notes (dropped cells and the like).
    pub warnings: Vec<String>,
}

impl std::fmt::Debug for FitReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FitReport")
            .field("kind", &self.kind)
            .field("rows", &self.rows)
            .field("divergences", &self.divergences)
            .field("failures", &self.failures)
            .finish_non_exhaustive()
    }
}

impl FitReport {
    /// Error out with every gate violation when the fit did not converge.
    pub fn ensure_converged(&self) -> Result<()> {
        if self.failures.is_empty() {
            Ok(())
        } else {
            Err(Error::convergence(self.failures.join("; ")))
        }
    }
}

/// Column header for the ratio column of the summary table, when the model
/// has one.
pub fn ratio_label(kind: ModelKind) -> Option<&'static str> {
    match kind {
        ModelKind::Binomial => Some("OR"),
        ModelKind::Cox => Some("HR"),
        _ => None,
    }
}

fn require_epsilon(spec: &FitSpec) -> Result<f64> {
    spec.epsilon.ok_or_else(|| {
        Error::validation(format!("the {} model needs an epsilon", spec.model))
    })
}

fn reject_epsilon(spec: &FitSpec) -> Result<()> {
    if spec.epsilon.is_some() {
        return Err(Error::validation(format!(
            "the {} model does not take an epsilon",
            spec.model
        )));
    }
    Ok(())
}

/// Prepare the input slice and construct the model named by `spec`.
///
/// Pairwise contests break ties randomly for the Bradley-Terry model (it has
/// no tie outcome) and keep them for the Davidson model; the tie-break
/// randomness derives from the fit seed.
pub fn build_model(dataset: &Dataset, spec: &FitSpec) -> Result<(Box<dyn Model>, Vec<String>)> {
    let mut warnings = Vec::new();
    let model: Box<dyn Model> = match spec.model {
        ModelKind::Binomial => {
            let input = prepare_binomial(dataset, require_epsilon(spec)?, &spec.filters)?;
            Box::new(BinomialModel::new(input, spec.prior_scale)?)
        }
        ModelKind::RelativeImprovement => {
            reject_epsilon(spec)?;
            let (input, notes) = prepare_relative_improvement(dataset, &spec.filters)?;
            warnings = notes;
            Box::new(RelativeImprovementModel::new(input, spec.prior_scale)?)
        }
        ModelKind::BradleyTerry => {
            reject_epsilon(spec)?;
            let ties = derive_seed(spec.seed, "fit/ties");
            let input = prepare_pairs(dataset, &spec.filters, TieMode::RandomWinner, ties)?;
            Box::new(BradleyTerryModel::new(input, spec.prior_scale)?)
        }
        ModelKind::Davidson => {
            reject_epsilon(spec)?;
            let ties = derive_seed(spec.seed, "fit/ties");
            let input = prepare_pairs(dataset, &spec.filters, TieMode::KeepTies, ties)?;
            Box::new(DavidsonModel::new(input, spec.prior_scale)?)
        }
        ModelKind::Cox => {
            let input = prepare_survival(dataset, require_epsilon(spec)?, &spec.filters)?;
            Box::new(CoxModel::new(input, spec.prior_scale)?)
        }
        ModelKind::StudentT => {
            reject_epsilon(spec)?;
            Box::new(StudentTModel::new(prepare_cpu(dataset, &spec.filters)?, spec.prior_scale)?)
        }
    };
    Ok((model, warnings))
}

/// Resolve the sampler configuration: model defaults, then spec overrides.
pub fn sampler_config(model: &dyn Model, spec: &FitSpec) -> Result<SamplerConfig> {
    let mut cfg = model.default_sampler();
    cfg.seed = spec.seed;
    if let Some(chains) = spec.chains {
        cfg.chains = chains;
    }
    if let Some(warmup) = spec.warmup {
        cfg.warmup = warmup;
    }
    if let Some(iters) = spec.iters {
        if iters <= cfg.warmup {
            return Err(Error::validation(format!(
                "iterations ({iters}) must exceed warmup ({})",
                cfg.warmup
            )));
        }
        cfg.draws = iters - cfg.warmup;
    }
    if cfg.chains < 2 {
        return Err(Error::validation(
            "need at least two chains to diagnose convergence",
        ));
    }
    Ok(cfg)
}

fn is_effect(name: &str) -> bool {
    name.starts_with("a_") || name.starts_with("b_noise_")
}

/// Summary table rows and the underlying per-parameter summary, computed
/// from draws alone (no model required).
pub fn table_from_draws(
    kind: ModelKind,
    draws: &PosteriorDraws,
) -> Result<(Vec<FitRow>, PosteriorSummary)> {
    let summary = summarize(draws)?;
    let with_ratio = ratio_label(kind).is_some();
    let mut rows = Vec::with_capacity(summary.rows.len());
    for (i, row) in summary.rows.iter().enumerate() {
        let (hpd_low, hpd_high) = hpd_interval(&draws.pooled(i), HPD_MASS)?;
        rows.push(FitRow {
            parameter: row.name.clone(),
            mean: row.mean,
            sd: row.sd,
            hpd_low,
            hpd_high,
            rhat: row.rhat,
            ess: row.ess,
            ratio: (with_ratio && is_effect(&row.name)).then(|| row.mean.exp()),
        });
    }
    Ok((rows, summary))
}

/// Summarize sampled draws into the report table and health checks.
pub fn summarize_fit(
    model: Box<dyn Model>,
    draws: PosteriorDraws,
    config: SamplerConfig,
    warnings: Vec<String>,
) -> Result<FitReport> {
    let kind = model.kind();
    let (rows, summary) = table_from_draws(kind, &draws)?;
    let failures = convergence_failures(&summary);

    let waic = waic(&loglik_matrix(model.as_ref(), &draws)?)?;
    let informativeness = model
        .prior_scales()
        .into_iter()
        .map(|(name, prior_sd)| {
            let row = summary
                .rows
                .iter()
                .find(|r| r.name == name)
                .ok_or_else(|| {
                    Error::validation(format!("prior scale for unknown parameter {name}"))
                })?;
            Ok(InformativenessEntry {
                parameter: name,
                posterior_sd: row.sd,
                prior_sd,
                informative: prior_informative(row.sd, prior_sd)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(FitReport {
        kind,
        model,
        draws,
        config,
        rows,
        divergences: summary.divergences,
        max_depth_hits: summary.max_depth_hits,
        failures,
        waic,
        informativeness,
        warnings,
    })
}

/// Prepare, sample, and summarize in one call.
pub fn run_fit(dataset: &Dataset, spec: &FitSpec) -> Result<FitReport> {
    let (model, warnings) = build_model(dataset, spec)?;
    let cfg = sampler_config(model.as_ref(), spec)?;
    let draws = nuts_sample(model.as_ref(), &cfg)?;
    summarize_fit(model, draws, cfg, warnings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{run_experiment, ExperimentConfig, TimingMode};
    use crate::optim::AlgorithmId;

    fn desk_dataset() -> Dataset {
        let config = ExperimentConfig {
            algorithms: vec![
                AlgorithmId::DifferentialEvolution,
                AlgorithmId::SimulatedAnnealing,
                AlgorithmId::RandomSearch1,
            ],
            benchmarks: vec!["discus2d".into(), "zakharov2d".into()],
            noise_levels: vec![0.0],
            budgets_per_dim: vec![40],
            repetitions: 4,
            epsilons: vec![1.0, 0.1, 1e-3, 1e-6],
            master_seed: 31,
            timing: TimingMode::Deterministic,
        };
        run_experiment(&config).unwrap()
    }

    #[test]
    fn binomial_fit_produces_a_complete_report() {
        let dataset = desk_dataset();
        let mut spec = FitSpec::new(ModelKind::Binomial);
        spec.epsilon = Some(0.1);
        spec.chains = Some(2);
        spec.warmup = Some(200);
        spec.iters = Some(700);
        spec.seed = 9;
        let report = run_fit(&dataset, &spec).unwrap();

        assert_eq!(report.kind, ModelKind::Binomial);
        assert_eq!(report.config.draws, 500);
        assert_eq!(report.rows.len(), report.draws.n_params());
        assert_eq!(report.draws.n_chains(), 2);
        for row in &report.rows {
            assert!(row.hpd_low <= row.mean && row.mean <= row.hpd_high);
            match row.parameter.as_str() {
                "s" => assert!(row.ratio.is_none()),
                _ => assert_eq!(row.ratio, Some(row.mean.exp())),
            }
        }
        assert!(report.waic.p_waic > -1e-9);
        assert!(!report.informativeness.is_empty());
        if report.failures.is_empty() {
            assert!(report.ensure_converged().is_ok());
        } else {
            assert!(report.ensure_converged().is_err());
        }
    }

    #[test]
    fn fits_are_reproducible_for_a_fixed_seed() {
        let dataset = desk_dataset();
        let mut spec = FitSpec::new(ModelKind::BradleyTerry);
        spec.filters = Filters::default().noise_levels(&[0.0]).budgets_per_dim(&[40]);
        spec.chains = Some(2);
        spec.warmup = Some(150);
        spec.iters = Some(450);
        spec.seed = 12;
        let a = run_fit(&dataset, &spec).unwrap();
        let b = run_fit(&dataset, &spec).unwrap();
        assert_eq!(a.draws.draws, b.draws.draws);
        for (x, y) in a.rows.iter().zip(&b.rows) {
            assert_eq!(x.mean, y.mean);
            assert_eq!((x.hpd_low, x.hpd_high), (y.hpd_low, y.hpd_high));
        }
        assert!(a.rows.iter().all(|r| r.ratio.is_none()));
    }

    #[test]
    fn spec_validation_rejects_misuse() {
        let dataset = desk_dataset();

        let spec = FitSpec::new(ModelKind::Binomial);
        let err = run_fit(&dataset, &spec).unwrap_err().to_string();
        assert!(err.contains("epsilon"), "{err}");

        let mut spec = FitSpec::new(ModelKind::StudentT);
        spec.epsilon = Some(0.1);
        let err = run_fit(&dataset, &spec).unwrap_err().to_string();
        assert!(err.contains("does not take an epsilon"), "{err}");

        let mut spec = FitSpec::new(ModelKind::StudentT);
        spec.chains = Some(1);
        let err = run_fit(&dataset, &spec).unwrap_err().to_string();
        assert!(err.contains("two chains"), "{err}");

        let mut spec = FitSpec::new(ModelKind::StudentT);
        spec.warmup = Some(300);
        spec.iters = Some(300);
        let err = run_fit(&dataset, &spec).unwrap_err().to_string();
        assert!(err.contains("exceed warmup"), "{err}");
    }
}
