//! Paired-comparison ranking models: Bradley-Terry on win/loss contests and
//! its Davidson generalization admitting ties.
//!
//! Latent strengths get a per-algorithm-per-benchmark random effect, so a
//! contest on benchmark `j` compares `a[i] + a_bm[i][j]` across the two
//! contestants.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{
    check_params, exponential_prior_log_scale, hierarchical_prior, normal_prior, validate_labels,
    validate_prior_scale, Model, ModelKind, Responses,
};
use crate::error::{Error, Result};
use crate::rng::derive_rng;
use crate::sampler::{SamplerConfig, Target};
use crate::util::{inv_logit, log1p_exp, log_sum_exp};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairOutcome {
    Algo0Wins,
    Algo1Wins,
    Tie,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairRow {
    pub algo1: usize,
    pub algo0: usize,
    pub benchmark: usize,
    pub outcome: PairOutcome,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairInput {
    pub algorithms: Vec<String>,
    pub benchmarks: Vec<String>,
    pub rows: Vec<PairRow>,
}

const A_SD: f64 = 2.0;
const NU_SD: f64 = 2.0;
const S_RATE: f64 = 0.1;

fn validate_pairs(input: &PairInput, allow_ties: bool) -> Result<()> {
    validate_labels("algorithm", &input.algorithms)?;
    validate_labels("benchmark", &input.benchmarks)?;
    if input.rows.is_empty() {
        return Err(Error::validation("no contest rows"));
    }
    for (k, row) in input.rows.iter().enumerate() {
        if row.algo1 >= input.algorithms.len() || row.algo0 >= input.algorithms.len() {
            return Err(Error::validation(format!(
                "row {k}: contestant index out of range"
            )));
        }
        if row.benchmark >= input.benchmarks.len() {
            return Err(Error::validation(format!(
                "row {k}: benchmark index out of range"
            )));
        }
        if row.algo1 == row.algo0 {
            return Err(Error::validation(format!(
                "row {k}: algorithm paired with itself"
            )));
        }
        if !allow_ties && row.outcome == PairOutcome::Tie {
            return Err(Error::validation(format!(
                "row {k}: tie rows are not accepted; use the tie-aware model or assign winners"
            )));
        }
    }
    Ok(())
}

/// Outcome probabilities `[algo0 wins, algo1 wins, tie]` for strengths
/// `alpha0`, `alpha1` and tie propensity `nu_tie`.
pub fn davidson_probabilities(alpha0: f64, alpha1: f64, nu_tie: f64) -> [f64; 3] {
    let t = nu_tie + 0.5 * (alpha0 + alpha1);
    let z = log_sum_exp(&[alpha0, alpha1, t]);
    [(alpha0 - z).exp(), (alpha1 - z).exp(), (t - z).exp()]
}

/// Shared layout for both pair models: strengths, per-algorithm-per-benchmark
/// effects (row-major), then model-specific tail parameters.
#[derive(Debug, Clone)]
struct PairLayout {
    input: PairInput,
    prior_scale: f64,
}

impl PairLayout {
    fn n_alg(&self) -> usize {
        self.input.algorithms.len()
    }

    fn n_bm(&self) -> usize {
        self.input.benchmarks.len()
    }

    fn effect_index(&self, alg: usize, bm: usize) -> usize {
        self.n_alg() + alg * self.n_bm() + bm
    }

    fn strength(&self, params: &[f64], alg: usize, bm: usize) -> f64 {
        params[alg] + params[self.effect_index(alg, bm)]
    }

    fn base_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        for a in &self.input.algorithms {
            names.push(format!("a_{a}"));
        }
        for a in &self.input.algorithms {
            for b in &self.input.benchmarks {
                names.push(format!("a_bm_{a}_{b}"));
            }
        }
        names
    }

    /// Strength priors plus the hierarchical block; returns the gradient
    /// contribution for `log_s` and accumulates the rest in place.
    fn prior_terms(&self, z: &[f64], s: f64, logp: &mut f64, grad: &mut [f64]) -> f64 {
        let m = self.prior_scale;
        for i in 0..self.n_alg() {
            let (l, g) = normal_prior(z[i], A_SD * m);
            *logp += l;
            grad[i] += g;
        }
        let mut dlog_s = 0.0;
        for idx in self.n_alg()..self.n_alg() + self.n_alg() * self.n_bm() {
            let (l, g, gs) = hierarchical_prior(z[idx], s);
            *logp += l;
            grad[idx] += g;
            dlog_s += gs;
        }
        dlog_s
    }

    fn strength_prior_scales(&self) -> Vec<(String, f64)> {
        self.input
            .algorithms
            .iter()
            .map(|a| (format!("a_{a}"), A_SD * self.prior_scale))
            .collect()
    }
}

/// Win/loss contests: `P(algo1 wins) = logit^{-1}(strength1 - strength0)`.
///
/// Priors: `a ~ Normal(0,2)`, `a_bm ~ Normal(0,s)`, `s ~ Exponential(0.1)`.
#[derive(Debug, Clone)]
pub struct BradleyTerryModel {
    layout: PairLayout,
}

pub fn bradley_terry_model(input: PairInput) -> Result<BradleyTerryModel> {
    BradleyTerryModel::new(input, 1.0)
}

impl BradleyTerryModel {
    pub fn new(input: PairInput, prior_scale: f64) -> Result<Self> {
        validate_prior_scale(prior_scale)?;
        validate_pairs(&input, false)?;
        Ok(BradleyTerryModel {
            layout: PairLayout { input, prior_scale },
        })
    }

    pub fn input(&self) -> &PairInput {
        &self.layout.input
    }

    fn contest_eta(&self, params: &[f64], row: &PairRow) -> f64 {
        self.layout.strength(params, row.algo1, row.benchmark)
            - self.layout.strength(params, row.algo0, row.benchmark)
    }
}

impl Target for BradleyTerryModel {
    fn dim(&self) -> usize {
        self.layout.n_alg() * (1 + self.layout.n_bm()) + 1
    }

    fn names(&self) -> Vec<String> {
        let mut names = self.layout.base_names();
        names.push("s".to_string());
        names
    }

    fn log_density_grad(&self, z: &[f64]) -> (f64, Vec<f64>) {
        let log_s = z[self.dim() - 1];
        let s = log_s.exp();
        let mut logp = 0.0;
        let mut grad = vec![0.0; z.len()];

        for row in &self.layout.input.rows {
            let eta = self.contest_eta(z, row);
            let y = if row.outcome == PairOutcome::Algo1Wins {
                1.0
            } else {
                0.0
            };
            logp -= if y == 1.0 {
                log1p_exp(-eta)
            } else {
                log1p_exp(eta)
            };
            let d = y - inv_logit(eta);
            grad[row.algo1] += d;
            grad[self.layout.effect_index(row.algo1, row.benchmark)] += d;
            grad[row.algo0] -= d;
            grad[self.layout.effect_index(row.algo0, row.benchmark)] -= d;
        }

        let dlog_s = self.layout.prior_terms(z, s, &mut logp, &mut grad);
        let (l, g) =
            exponential_prior_log_scale(s, S_RATE / self.layout.prior_scale, log_s);
        logp += l;
        grad[self.dim() - 1] = dlog_s + g;

        (logp, grad)
    }

    fn constrain(&self, z: &[f64]) -> Vec<f64> {
        let mut out = z.to_vec();
        let last = out.len() - 1;
        out[last] = out[last].exp();
        out
    }
}

impl Model for BradleyTerryModel {
    fn kind(&self) -> ModelKind {
        ModelKind::BradleyTerry
    }

    fn n_obs(&self) -> usize {
        self.layout.input.rows.len()
    }

    fn pointwise_loglik(&self, params: &[f64]) -> Result<Vec<f64>> {
        check_params(params, self.dim())?;
        Ok(self
            .layout
            .input
            .rows
            .iter()
            .map(|row| {
                let eta = self.contest_eta(params, row);
                if row.outcome == PairOutcome::Algo1Wins {
                    -log1p_exp(-eta)
                } else {
                    -log1p_exp(eta)
                }
            })
            .collect())
    }

    fn simulate(&self, params: &[f64], seed: u64) -> Result<Responses> {
        check_params(params, self.dim())?;
        let mut rng = derive_rng(seed, "simulate/bradley-terry");
        Ok(Responses::Outcomes(
            self.layout
                .input
                .rows
                .iter()
                .map(|row| {
                    let p = inv_logit(self.contest_eta(params, row));
                    if rng.random::<f64>() < p {
                        PairOutcome::Algo1Wins
                    } else {
                        PairOutcome::Algo0Wins
                    }
                })
                .collect(),
        ))
    }

    fn observed(&self) -> Responses {
        Responses::Outcomes(self.layout.input.rows.iter().map(|r| r.outcome).collect())
    }

    fn default_sampler(&self) -> SamplerConfig {
        SamplerConfig {
            warmup: 200,
            draws: 3800,
            ..SamplerConfig::default()
        }
    }

    fn prior_scales(&self) -> Vec<(String, f64)> {
        let mut out = self.layout.strength_prior_scales();
        out.push(("s".to_string(), self.layout.prior_scale / S_RATE));
        out
    }

    fn algorithm_labels(&self) -> Vec<String> {
        self.layout.input.algorithms.clone()
    }
}

/// Three-outcome contests: Bradley-Terry with a tie propensity `nu_tie`.
///
/// `P(tie) = exp(nu_tie + (alpha_i + alpha_j)/2) / Z` with the win
/// probabilities sharing the same normalizer `Z`.
#[derive(Debug, Clone)]
pub struct DavidsonModel {
    layout: PairLayout,
}

pub fn davidson_model(input: PairInput) -> Result<DavidsonModel> {
    DavidsonModel::new(input, 1.0)
}

impl DavidsonModel {
    pub fn new(input: PairInput, prior_scale: f64) -> Result<Self> {
        validate_prior_scale(prior_scale)?;
        validate_pairs(&input, true)?;
        Ok(DavidsonModel {
            layout: PairLayout { input, prior_scale },
        })
    }

    pub fn input(&self) -> &PairInput {
        &self.layout.input
    }

    fn nu_index(&self) -> usize {
        self.dim() - 2
    }

    /// Log outcome probabilities `(lp0, lp1, lp_tie)` for one contest.
    fn contest_logprobs(&self, params: &[f64], row: &PairRow) -> (f64, f64, f64) {
        let a1 = self.layout.strength(params, row.algo1, row.benchmark);
        let a0 = self.layout.strength(params, row.algo0, row.benchmark);
        let t = params[self.nu_index()] + 0.5 * (a1 + a0);
        let z = log_sum_exp(&[a0, a1, t]);
        (a0 - z, a1 - z, t - z)
    }
}

impl Target for DavidsonModel {
    fn dim(&self) -> usize {
        self.layout.n_alg() * (1 + self.layout.n_bm()) + 2
    }

    fn names(&self) -> Vec<String> {
        let mut names = self.layout.base_names();
        names.push("nu_tie".to_string());
        names.push("s".to_string());
        names
    }

    fn log_density_grad(&self, z: &[f64]) -> (f64, Vec<f64>) {
        let nu_idx = self.nu_index();
        let log_s = z[self.dim() - 1];
        let s = log_s.exp();
        let mut logp = 0.0;
        let mut grad = vec![0.0; z.len()];

        for row in &self.layout.input.rows {
            let (lp0, lp1, lpt) = self.contest_logprobs(z, row);
            let (i1, i0, it) = match row.outcome {
                PairOutcome::Algo1Wins => (1.0, 0.0, 0.0),
                PairOutcome::Algo0Wins => (0.0, 1.0, 0.0),
                PairOutcome::Tie => (0.0, 0.0, 1.0),
            };
            logp += i0 * lp0 + i1 * lp1 + it * lpt;
            let (p0, p1, pt) = (lp0.exp(), lp1.exp(), lpt.exp());
            let d1 = i1 + 0.5 * it - (p1 + 0.5 * pt);
            let d0 = i0 + 0.5 * it - (p0 + 0.5 * pt);
            grad[row.algo1] += d1;
            grad[self.layout.effect_index(row.algo1, row.benchmark)] += d1;
            grad[row.algo0] += d0;
            grad[self.layout.effect_index(row.algo0, row.benchmark)] += d0;
            grad[nu_idx] += it - pt;
        }

        let m = self.layout.prior_scale;
        let dlog_s = self.layout.prior_terms(z, s, &mut logp, &mut grad);
        let (l, g) = normal_prior(z[nu_idx], NU_SD * m);
        logp += l;
        grad[nu_idx] += g;
        let (l, g) = exponential_prior_log_scale(s, S_RATE / m, log_s);
        logp += l;
        grad[self.dim() - 1] = dlog_s + g;

        (logp, grad)
    }

    fn constrain(&self, z: &[f64]) -> Vec<f64> {
        let mut out = z.to_vec();
        let last = out.len() - 1;
        out[last] = out[last].exp();
        out
    }
}

impl Model for DavidsonModel {
    fn kind(&self) -> ModelKind {
        ModelKind::Davidson
    }

    fn n_obs(&self) -> usize {
        self.layout.input.rows.len()
    }

    fn pointwise_loglik(&self, params: &[f64]) -> Result<Vec<f64>> {
        check_params(params, self.dim())?;
        Ok(self
            .layout
            .input
            .rows
            .iter()
            .map(|row| {
                let (lp0, lp1, lpt) = self.contest_logprobs(params, row);
                match row.outcome {
                    PairOutcome::Algo0Wins => lp0,
                    PairOutcome::Algo1Wins => lp1,
                    PairOutcome::Tie => lpt,
                }
            })
            .collect())
    }

    fn simulate(&self, params: &[f64], seed: u64) -> Result<Responses> {
        check_params(params, self.dim())?;
        let mut rng = derive_rng(seed, "simulate/davidson");
        Ok(Responses::Outcomes(
            self.layout
                .input
                .rows
                .iter()
                .map(|row| {
                    let (lp0, lp1, _) = self.contest_logprobs(params, row);
                    let u: f64 = rng.random();
                    let p0 = lp0.exp();
                    let p1 = lp1.exp();
                    if u < p0 {
                        PairOutcome::Algo0Wins
                    } else if u < p0 + p1 {
                        PairOutcome::Algo1Wins
                    } else {
                        PairOutcome::Tie
                    }
                })
                .collect(),
        ))
    }

    fn observed(&self) -> Responses {
        Responses::Outcomes(self.layout.input.rows.iter().map(|r| r.outcome).collect())
    }

    fn default_sampler(&self) -> SamplerConfig {
        SamplerConfig {
            warmup: 200,
            draws: 3800,
            ..SamplerConfig::default()
        }
    }

    fn prior_scales(&self) -> Vec<(String, f64)> {
        let m = self.layout.prior_scale;
        let mut out = self.layout.strength_prior_scales();
        out.push(("nu_tie".to_string(), NU_SD * m));
        out.push(("s".to_string(), m / S_RATE));
        out
    }

    fn algorithm_labels(&self) -> Vec<String> {
        self.layout.input.algorithms.clone()
    }
}
