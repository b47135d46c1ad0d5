//! Proportional-hazard model with a constant (exponential) hazard, split
//! into event and right-censored contributions.

use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use super::{
    check_params, exponential_prior_log_scale, hierarchical_prior, normal_prior, validate_labels,
    validate_prior_scale, Model, ModelKind, Responses, SurvivalObs,
};
use crate::error::{Error, Result};
use crate::rng::derive_rng;
use crate::sampler::{SamplerConfig, Target};

/// One time-to-solve record. `y` is the event time when `event` is true and
/// the censoring point otherwise; `censor_limit` is the observation window
/// used when replicating data.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SurvivalRow {
    pub algorithm: usize,
    pub benchmark: usize,
    pub noise: f64,
    pub y: f64,
    pub event: bool,
    pub censor_limit: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SurvivalInput {
    pub algorithms: Vec<String>,
    pub benchmarks: Vec<String>,
    pub rows: Vec<SurvivalRow>,
}

/// `y ~ Exponential(lambda)` for events, `y ~ Exponential-CCDF(lambda)` for
/// censored rows, `log lambda = a_alg + a_bm + b_noise * x_noise`.
///
/// Priors: `a_alg ~ Normal(0,10)`, `b_noise ~ Normal(0,2)`,
/// `a_bm ~ Normal(0,s)`, `s ~ Exponential(0.1)`.
#[derive(Debug, Clone)]
pub struct CoxModel {
    input: SurvivalInput,
    prior_scale: f64,
}

const A_SD: f64 = 10.0;
const B_SD: f64 = 2.0;
const S_RATE: f64 = 0.1;

pub fn cox_model(input: SurvivalInput) -> Result<CoxModel> {
    CoxModel::new(input, 1.0)
}

impl CoxModel {
    pub fn new(input: SurvivalInput, prior_scale: f64) -> Result<Self> {
        validate_prior_scale(prior_scale)?;
        validate_labels("algorithm", &input.algorithms)?;
        validate_labels("benchmark", &input.benchmarks)?;
        if input.rows.is_empty() {
            return Err(Error::validation("no rows in survival input"));
        }
        for (k, row) in input.rows.iter().enumerate() {
            if row.algorithm >= input.algorithms.len() || row.benchmark >= input.benchmarks.len() {
                return Err(Error::validation(format!("row {k}: index out of range")));
            }
            if !(row.y.is_finite() && row.y > 0.0) {
                return Err(Error::validation(format!(
                    "row {k}: event time must be positive, got {}",
                    row.y
                )));
            }
            if !(row.censor_limit.is_finite() && row.censor_limit >= row.y) {
                return Err(Error::validation(format!(
                    "row {k}: censor limit {} below observed time {}",
                    row.censor_limit, row.y
                )));
            }
            if !row.noise.is_finite() {
                return Err(Error::validation(format!("row {k}: non-finite noise")));
            }
        }
        Ok(CoxModel { input, prior_scale })
    }

    pub fn input(&self) -> &SurvivalInput {
        &self.input
    }

    fn n_alg(&self) -> usize {
        self.input.algorithms.len()
    }

    fn n_bm(&self) -> usize {
        self.input.benchmarks.len()
    }

    /// `log lambda` for one row.
    fn log_hazard(&self, params: &[f64], row: &SurvivalRow) -> f64 {
        let na = self.n_alg();
        params[row.algorithm] + params[2 * na + row.benchmark] + params[na + row.algorithm] * row.noise
    }
}

impl Target for CoxModel {
    fn dim(&self) -> usize {
        2 * self.n_alg() + self.n_bm() + 1
    }

    fn names(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(self.dim());
        for a in &self.input.algorithms {
            names.push(format!("a_{a}"));
        }
        for a in &self.input.algorithms {
            names.push(format!("b_noise_{a}"));
        }
        for b in &self.input.benchmarks {
            names.push(format!("a_bm_{b}"));
        }
        names.push("s".to_string());
        names
    }

    fn log_density_grad(&self, z: &[f64]) -> (f64, Vec<f64>) {
        let na = self.n_alg();
        let nb = self.n_bm();
        let log_s = z[2 * na + nb];
        let s = log_s.exp();
        let mut logp = 0.0;
        let mut grad = vec![0.0; z.len()];

        for row in &self.input.rows {
            let eta = self.log_hazard(z, row);
            let lambda_y = eta.exp() * row.y;
            let d = if row.event {
                logp += eta - lambda_y;
                1.0 - lambda_y
            } else {
                logp += -lambda_y;
                -lambda_y
            };
            grad[row.algorithm] += d;
            grad[na + row.algorithm] += d * row.noise;
            grad[2 * na + row.benchmark] += d;
        }

        let m = self.prior_scale;
        for i in 0..na {
            let (l, g) = normal_prior(z[i], A_SD * m);
            logp += l;
            grad[i] += g;
            let (l, g) = normal_prior(z[na + i], B_SD * m);
            logp += l;
            grad[na + i] += g;
        }
        let mut dlog_s = 0.0;
        for j in 0..nb {
            let (l, g, gs) = hierarchical_prior(z[2 * na + j], s);
            logp += l;
            grad[2 * na + j] += g;
            dlog_s += gs;
        }
        let (l, g) = exponential_prior_log_scale(s, S_RATE / m, log_s);
        logp += l;
        grad[2 * na + nb] = dlog_s + g;

        (logp, grad)
    }

    fn constrain(&self, z: &[f64]) -> Vec<f64> {
        let mut out = z.to_vec();
        let last = out.len() - 1;
        out[last] = out[last].exp();
        out
    }
}

impl Model for CoxModel {
    fn kind(&self) -> ModelKind {
        ModelKind::Cox
    }

    fn n_obs(&self) -> usize {
        self.input.rows.len()
    }

    fn pointwise_loglik(&self, params: &[f64]) -> Result<Vec<f64>> {
        check_params(params, self.dim())?;
        Ok(self
            .input
            .rows
            .iter()
            .map(|row| {
                let eta = self.log_hazard(params, row);
                let lambda_y = eta.exp() * row.y;
                if row.event {
                    eta - lambda_y
                } else {
                    -lambda_y
                }
            })
            .collect())
    }

    fn simulate(&self, params: &[f64], seed: u64) -> Result<Responses> {
        check_params(params, self.dim())?;
        let mut rng = derive_rng(seed, "simulate/cox");
        let mut out = Vec::with_capacity(self.n_obs());
        for row in &self.input.rows {
            let lambda = self.log_hazard(params, row).exp();
            let d = rand_distr::Exp::new(lambda)
                .map_err(|e| Error::validation(format!("exponential simulate: {e}")))?;
            let t: f64 = d.sample(&mut rng);
            out.push(if t < row.censor_limit {
                SurvivalObs { y: t, event: true }
            } else {
                SurvivalObs {
                    y: row.censor_limit,
                    event: false,
                }
            });
        }
        Ok(Responses::Survival(out))
    }

    fn observed(&self) -> Responses {
        Responses::Survival(
            self.input
                .rows
                .iter()
                .map(|r| SurvivalObs {
                    y: r.y,
                    event: r.event,
                })
                .collect(),
        )
    }

    fn default_sampler(&self) -> SamplerConfig {
        SamplerConfig {
            warmup: 200,
            draws: 2800,
            ..SamplerConfig::default()
        }
    }

    fn prior_scales(&self) -> Vec<(String, f64)> {
        let m = self.prior_scale;
        let mut out = Vec::new();
        for a in &self.input.algorithms {
            out.push((format!("a_{a}"), A_SD * m));
        }
        for a in &self.input.algorithms {
            out.push((format!("b_noise_{a}"), B_SD * m));
        }
        out.push(("s".to_string(), m / S_RATE));
        out
    }

    fn algorithm_labels(&self) -> Vec<String> {
        self.input.algorithms.clone()
    }
}
