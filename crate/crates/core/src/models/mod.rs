//! The six analysis models as joint log-posterior targets.
//!
//! Each model owns its design data, exposes the unconstrained log density
//! with analytic gradient for the sampler, and additionally provides
//! per-observation log-likelihoods (for information criteria) and a data
//! simulator (for predictive checks and simulate-then-fit tests).
//!
//! Constrained parameters (`s`, `sigma`, `nu`) are sampled as logs with the
//! Jacobian term folded into the density here, so the sampler itself never
//! sees a constraint.

mod binomial;
mod cox;
mod pairs;
mod relative_improvement;
mod student_t;

pub use binomial::{binomial_model, BinomialInput, BinomialModel, BinomialRow};
pub use cox::{cox_model, CoxModel, SurvivalInput, SurvivalRow};
pub use pairs::{
    bradley_terry_model, davidson_model, davidson_probabilities, BradleyTerryModel,
    DavidsonModel, PairInput, PairOutcome, PairRow,
};
pub use relative_improvement::{
    relative_improvement_model, RelativeImprovementInput, RelativeImprovementModel,
    RelativeImprovementRow,
};
pub use student_t::{student_t_model, CpuTimeInput, CpuTimeRow, StudentTModel};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampler::{PosteriorDraws, SamplerConfig, Target};

/// Identifies one of the shipped analysis models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Binomial,
    RelativeImprovement,
    BradleyTerry,
    Davidson,
    Cox,
    StudentT,
}

impl ModelKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModelKind::Binomial => "binomial",
            ModelKind::RelativeImprovement => "relative-improvement",
            ModelKind::BradleyTerry => "bradley-terry",
            ModelKind::Davidson => "davidson",
            ModelKind::Cox => "cox",
            ModelKind::StudentT => "student-t",
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "binomial" => Ok(ModelKind::Binomial),
            "relative-improvement" => Ok(ModelKind::RelativeImprovement),
            "bradley-terry" => Ok(ModelKind::BradleyTerry),
            "davidson" => Ok(ModelKind::Davidson),
            "cox" => Ok(ModelKind::Cox),
            "student-t" => Ok(ModelKind::StudentT),
            other => Err(Error::validation(format!("unknown model kind: {other}"))),
        }
    }
}

/// One censored or observed survival record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurvivalObs {
    pub y: f64,
    pub event: bool,
}

/// Observed or simulated responses, in input row order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Responses {
    /// Real-valued responses (relative improvement, CPU time).
    Continuous(Vec<f64>),
    /// Success counts, paired with the per-row trial counts in the input.
    Counts(Vec<u64>),
    /// Contest outcomes.
    Outcomes(Vec<PairOutcome>),
    /// Possibly-censored event times.
    Survival(Vec<SurvivalObs>),
}

impl Responses {
    pub fn len(&self) -> usize {
        match self {
            Responses::Continuous(v) => v.len(),
            Responses::Counts(v) => v.len(),
            Responses::Outcomes(v) => v.len(),
            Responses::Survival(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Common surface shared by all six models on top of [`Target`].
pub trait Model: Target {
    fn kind(&self) -> ModelKind;

    /// Number of likelihood rows.
    fn n_obs(&self) -> usize;

    /// Per-observation log-likelihood at one constrained parameter vector,
    /// ordered like the input rows. Excludes prior terms.
    fn pointwise_loglik(&self, params: &[f64]) -> Result<Vec<f64>>;

    /// Draw synthetic responses from the likelihood at constrained `params`.
    fn simulate(&self, params: &[f64], seed: u64) -> Result<Responses>;

    /// The responses the model was built from.
    fn observed(&self) -> Responses;

    /// Run lengths used when a fit request does not override them.
    fn default_sampler(&self) -> SamplerConfig;

    /// Standard deviation (or, for exponential priors, the scale) of each
    /// top-level prior, keyed by the parameter it governs. Hierarchical
    /// effects governed by `s` are excluded.
    fn prior_scales(&self) -> Vec<(String, f64)>;

    /// Per-row trial counts when the responses are success counts.
    fn trial_counts(&self) -> Option<Vec<u64>> {
        None
    }

    /// Algorithm labels in the order of the `a_{label}` effect parameters.
    fn algorithm_labels(&self) -> Vec<String>;
}

/// Log-likelihood matrix, one row per retained draw (all chains pooled in
/// chain order), one column per observation.
pub fn loglik_matrix(model: &dyn Model, draws: &PosteriorDraws) -> Result<Vec<Vec<f64>>> {
    let mut rows = Vec::with_capacity(draws.n_chains() * draws.n_draws_per_chain());
    for chain in &draws.draws {
        for draw in chain {
            rows.push(model.pointwise_loglik(draw)?);
        }
    }
    Ok(rows)
}

pub(crate) fn validate_labels(kind: &str, labels: &[String]) -> Result<()> {
    if labels.is_empty() {
        return Err(Error::validation(format!("{kind} labels are empty")));
    }
    for (i, a) in labels.iter().enumerate() {
        if a.is_empty() {
            return Err(Error::validation(format!("{kind} label {i} is empty")));
        }
        if labels[..i].contains(a) {
            return Err(Error::validation(format!("duplicate {kind} label: {a}")));
        }
    }
    Ok(())
}

pub(crate) fn validate_prior_scale(m: f64) -> Result<()> {
    if !(m.is_finite() && m > 0.0) {
        return Err(Error::validation(format!(
            "prior scale multiplier must be positive and finite, got {m}"
        )));
    }
    Ok(())
}

pub(crate) fn check_params(params: &[f64], expected: usize) -> Result<()> {
    if params.len() != expected {
        return Err(Error::validation(format!(
            "expected {expected} parameters, got {}",
            params.len()
        )));
    }
    if let Some(bad) = params.iter().find(|p| !p.is_finite()) {
        return Err(Error::validation(format!("non-finite parameter: {bad}")));
    }
    Ok(())
}

/// Zero-mean normal prior term: `(log density up to a constant, d/dx)`.
pub(crate) fn normal_prior(x: f64, sd: f64) -> (f64, f64) {
    (-0.5 * (x / sd).powi(2), -x / (sd * sd))
}

/// `x ~ Normal(0, s)` where `s` is itself sampled: returns
/// `(log density, d/dx, d/d log s)`.
pub(crate) fn hierarchical_prior(x: f64, s: f64) -> (f64, f64, f64) {
    let r = x / s;
    (-0.5 * r * r - s.ln(), -x / (s * s), r * r - 1.0)
}

/// `x ~ Exponential(rate)` for `x = exp(log_x)`, Jacobian included:
/// returns `(log density, d/d log_x)`.
pub(crate) fn exponential_prior_log_scale(x: f64, rate: f64, log_x: f64) -> (f64, f64) {
    (rate.ln() - rate * x + log_x, -rate * x + 1.0)
}
