//! Success-count model: aggregated solve counts per cell with a logit link,
//! per-algorithm noise slopes, and benchmark random effects.

use rand_distr::Distribution;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use super::{
    check_params, exponential_prior_log_scale, hierarchical_prior, normal_prior, validate_labels,
    validate_prior_scale, Model, ModelKind, Responses,
};
use crate::error::{Error, Result};
use crate::rng::derive_rng;
use crate::sampler::{SamplerConfig, Target};
use crate::util::{inv_logit, log1p_exp};

/// One aggregated cell: `successes` out of `trials` runs of one algorithm on
/// one benchmark at one noise level.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BinomialRow {
    pub algorithm: usize,
    pub benchmark: usize,
    pub noise: f64,
    pub trials: u64,
    pub successes: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BinomialInput {
    pub algorithms: Vec<String>,
    pub benchmarks: Vec<String>,
    pub rows: Vec<BinomialRow>,
}

/// `y ~ Binomial(N, p)`, `logit(p) = a_alg + a_bm + b_noise * x_noise`.
///
/// Priors: `a_alg ~ Normal(0,5)`, `b_noise ~ Normal(0,5)`,
/// `a_bm ~ Normal(0,s)`, `s ~ Exponential(0.1)`.
#[derive(Debug, Clone)]
pub struct BinomialModel {
    input: BinomialInput,
    prior_scale: f64,
    /// Cached log binomial coefficients, one per row.
    ln_choose: Vec<f64>,
}

const A_SD: f64 = 5.0;
const B_SD: f64 = 5.0;
const S_RATE: f64 = 0.1;

pub fn binomial_model(input: BinomialInput) -> Result<BinomialModel> {
    BinomialModel::new(input, 1.0)
}

impl BinomialModel {
    pub fn new(input: BinomialInput, prior_scale: f64) -> Result<Self> {
        validate_prior_scale(prior_scale)?;
        validate_labels("algorithm", &input.algorithms)?;
        validate_labels("benchmark", &input.benchmarks)?;
        if input.rows.is_empty() {
            return Err(Error::validation("no rows in binomial input"));
        }
        for (k, row) in input.rows.iter().enumerate() {
            if row.algorithm >= input.algorithms.len() {
                return Err(Error::validation(format!(
                    "row {k}: algorithm index {} out of range",
                    row.algorithm
                )));
            }
            if row.benchmark >= input.benchmarks.len() {
                return Err(Error::validation(format!(
                    "row {k}: benchmark index {} out of range",
                    row.benchmark
                )));
            }
            if row.trials == 0 {
                return Err(Error::validation(format!("row {k}: zero trials")));
            }
            if row.successes > row.trials {
                return Err(Error::validation(format!(
                    "row {k}: {} successes exceed {} trials",
                    row.successes, row.trials
                )));
            }
            if !row.noise.is_finite() {
                return Err(Error::validation(format!("row {k}: non-finite noise")));
            }
        }
        let ln_choose = input
            .rows
            .iter()
            .map(|r| {
                ln_gamma(r.trials as f64 + 1.0)
                    - ln_gamma(r.successes as f64 + 1.0)
                    - ln_gamma((r.trials - r.successes) as f64 + 1.0)
            })
            .collect();
        Ok(BinomialModel {
            input,
            prior_scale,
            ln_choose,
        })
    }

    pub fn input(&self) -> &BinomialInput {
        &self.input
    }

    fn n_alg(&self) -> usize {
        self.input.algorithms.len()
    }

    fn n_bm(&self) -> usize {
        self.input.benchmarks.len()
    }

    /// Linear predictor of `row` under a parameter slice laid out like `z`.
    fn eta(&self, params: &[f64], row: &BinomialRow) -> f64 {
        let na = self.n_alg();
        params[row.algorithm] + params[2 * na + row.benchmark] + params[na + row.algorithm] * row.noise
    }
}

impl Target for BinomialModel {
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

        for (row, lnc) in self.input.rows.iter().zip(&self.ln_choose) {
            let eta = self.eta(z, row);
            let y = row.successes as f64;
            let n = row.trials as f64;
            logp += lnc - y * log1p_exp(-eta) - (n - y) * log1p_exp(eta);
            let d = y - n * inv_logit(eta);
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

impl Model for BinomialModel {
    fn kind(&self) -> ModelKind {
        ModelKind::Binomial
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
            .zip(&self.ln_choose)
            .map(|(row, lnc)| {
                let eta = self.eta(params, row);
                let y = row.successes as f64;
                let n = row.trials as f64;
                lnc - y * log1p_exp(-eta) - (n - y) * log1p_exp(eta)
            })
            .collect())
    }

    fn simulate(&self, params: &[f64], seed: u64) -> Result<Responses> {
        check_params(params, self.dim())?;
        let mut rng = derive_rng(seed, "simulate/binomial");
        let mut ys = Vec::with_capacity(self.n_obs());
        for row in &self.input.rows {
            let p = inv_logit(self.eta(params, row));
            let d = rand_distr::Binomial::new(row.trials, p)
                .map_err(|e| Error::validation(format!("binomial simulate: {e}")))?;
            ys.push(d.sample(&mut rng));
        }
        Ok(Responses::Counts(ys))
    }

    fn observed(&self) -> Responses {
        Responses::Counts(self.input.rows.iter().map(|r| r.successes).collect())
    }

    fn trial_counts(&self) -> Option<Vec<u64>> {
        Some(self.input.rows.iter().map(|r| r.trials).collect())
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
