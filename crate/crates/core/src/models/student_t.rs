//! Robust multiple-group comparison of CPU cost per evaluation: Student-T
//! likelihood with per-algorithm scales and a shared degrees-of-freedom
//! parameter.

use rand_distr::Distribution;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{digamma, ln_gamma};

use super::{
    check_params, exponential_prior_log_scale, hierarchical_prior, normal_prior, validate_labels,
    validate_prior_scale, Model, ModelKind, Responses,
};
use crate::error::{Error, Result};
use crate::rng::derive_rng;
use crate::sampler::{SamplerConfig, Target};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CpuTimeRow {
    pub algorithm: usize,
    pub benchmark: usize,
    pub y: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CpuTimeInput {
    pub algorithms: Vec<String>,
    pub benchmarks: Vec<String>,
    pub rows: Vec<CpuTimeRow>,
}

/// `y ~ Student-T(nu, a_alg + a_bm, sigma_alg)`.
///
/// Priors: `a_alg ~ Normal(0,1)`, `sigma_alg ~ Exponential(1)`,
/// `nu ~ Exponential(1/30)`, `a_bm ~ Normal(0,s)`, `s ~ Exponential(1)`.
#[derive(Debug, Clone)]
pub struct StudentTModel {
    input: CpuTimeInput,
    prior_scale: f64,
}

const A_SD: f64 = 1.0;
const SIGMA_RATE: f64 = 1.0;
const NU_RATE: f64 = 1.0 / 30.0;
const S_RATE: f64 = 1.0;
const LN_PI: f64 = 1.144_729_885_849_400_2;

pub fn student_t_model(input: CpuTimeInput) -> Result<StudentTModel> {
    StudentTModel::new(input, 1.0)
}

impl StudentTModel {
    pub fn new(input: CpuTimeInput, prior_scale: f64) -> Result<Self> {
        validate_prior_scale(prior_scale)?;
        validate_labels("algorithm", &input.algorithms)?;
        validate_labels("benchmark", &input.benchmarks)?;
        let mut per_alg = vec![0usize; input.algorithms.len()];
        for (k, row) in input.rows.iter().enumerate() {
            if row.algorithm >= input.algorithms.len() || row.benchmark >= input.benchmarks.len() {
                return Err(Error::validation(format!("row {k}: index out of range")));
            }
            if !row.y.is_finite() {
                return Err(Error::validation(format!("row {k}: non-finite response")));
            }
            per_alg[row.algorithm] += 1;
        }
        if let Some(i) = per_alg.iter().position(|&n| n < 2) {
            return Err(Error::validation(format!(
                "algorithm {} has fewer than 2 observations",
                input.algorithms[i]
            )));
        }
        Ok(StudentTModel { input, prior_scale })
    }

    pub fn input(&self) -> &CpuTimeInput {
        &self.input
    }

    fn n_alg(&self) -> usize {
        self.input.algorithms.len()
    }

    fn n_bm(&self) -> usize {
        self.input.benchmarks.len()
    }

    fn sigma_index(&self, alg: usize) -> usize {
        self.n_alg() + self.n_bm() + alg
    }

    fn nu_index(&self) -> usize {
        2 * self.n_alg() + self.n_bm()
    }

    fn mu(&self, params: &[f64], row: &CpuTimeRow) -> f64 {
        params[row.algorithm] + params[self.n_alg() + row.benchmark]
    }

    /// Student-T log density at standardized residual `r = (y - mu) / sigma`.
    fn t_logpdf(r: f64, sigma: f64, nu: f64) -> f64 {
        let u = 1.0 + r * r / nu;
        ln_gamma((nu + 1.0) / 2.0) - ln_gamma(nu / 2.0) - 0.5 * (nu.ln() + LN_PI) - sigma.ln()
            - 0.5 * (nu + 1.0) * u.ln()
    }
}

impl Target for StudentTModel {
    fn dim(&self) -> usize {
        2 * self.n_alg() + self.n_bm() + 2
    }

    fn names(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(self.dim());
        for a in &self.input.algorithms {
            names.push(format!("a_{a}"));
        }
        for b in &self.input.benchmarks {
            names.push(format!("a_bm_{b}"));
        }
        for a in &self.input.algorithms {
            names.push(format!("sigma_{a}"));
        }
        names.push("nu".to_string());
        names.push("s".to_string());
        names
    }

    fn log_density_grad(&self, z: &[f64]) -> (f64, Vec<f64>) {
        let na = self.n_alg();
        let nb = self.n_bm();
        let nu_idx = self.nu_index();
        let log_nu = z[nu_idx];
        let nu = log_nu.exp();
        let log_s = z[nu_idx + 1];
        let s = log_s.exp();
        let sigmas: Vec<f64> = (0..na).map(|i| z[self.sigma_index(i)].exp()).collect();

        // Per-row terms that depend only on nu.
        let half_dig = 0.5 * digamma((nu + 1.0) / 2.0) - 0.5 * digamma(nu / 2.0);
        let nu_const = ln_gamma((nu + 1.0) / 2.0) - ln_gamma(nu / 2.0) - 0.5 * (nu.ln() + LN_PI);

        let mut logp = 0.0;
        let mut grad = vec![0.0; z.len()];
        let mut dnu = 0.0;

        for row in &self.input.rows {
            let sigma = sigmas[row.algorithm];
            let r = (row.y - self.mu(z, row)) / sigma;
            let u = 1.0 + r * r / nu;
            logp += nu_const - sigmas[row.algorithm].ln() - 0.5 * (nu + 1.0) * u.ln();
            let dmu = (nu + 1.0) * r / (sigma * nu * u);
            grad[row.algorithm] += dmu;
            grad[na + row.benchmark] += dmu;
            grad[self.sigma_index(row.algorithm)] += (nu + 1.0) * r * r / (nu * u) - 1.0;
            dnu += half_dig - 0.5 / nu - 0.5 * u.ln() + (nu + 1.0) * r * r / (2.0 * nu * nu * u);
        }

        let m = self.prior_scale;
        for i in 0..na {
            let (l, g) = normal_prior(z[i], A_SD * m);
            logp += l;
            grad[i] += g;
            let (l, g) = exponential_prior_log_scale(sigmas[i], SIGMA_RATE / m, z[self.sigma_index(i)]);
            logp += l;
            grad[self.sigma_index(i)] += g;
        }
        let mut dlog_s = 0.0;
        for j in 0..nb {
            let (l, g, gs) = hierarchical_prior(z[na + j], s);
            logp += l;
            grad[na + j] += g;
            dlog_s += gs;
        }
        let (l, g) = exponential_prior_log_scale(nu, NU_RATE / m, log_nu);
        logp += l;
        grad[nu_idx] = nu * dnu + g;
        let (l, g) = exponential_prior_log_scale(s, S_RATE / m, log_s);
        logp += l;
        grad[nu_idx + 1] = dlog_s + g;

        (logp, grad)
    }

    fn constrain(&self, z: &[f64]) -> Vec<f64> {
        let mut out = z.to_vec();
        let start = self.n_alg() + self.n_bm();
        for v in out.iter_mut().skip(start) {
            *v = v.exp();
        }
        out
    }
}

impl Model for StudentTModel {
    fn kind(&self) -> ModelKind {
        ModelKind::StudentT
    }

    fn n_obs(&self) -> usize {
        self.input.rows.len()
    }

    fn pointwise_loglik(&self, params: &[f64]) -> Result<Vec<f64>> {
        check_params(params, self.dim())?;
        let nu = params[self.nu_index()];
        if nu <= 0.0 {
            return Err(Error::validation(format!("nu must be positive, got {nu}")));
        }
        let mut out = Vec::with_capacity(self.n_obs());
        for row in &self.input.rows {
            let sigma = params[self.sigma_index(row.algorithm)];
            if sigma <= 0.0 {
                return Err(Error::validation(format!(
                    "sigma must be positive, got {sigma}"
                )));
            }
            let r = (row.y - self.mu(params, row)) / sigma;
            out.push(Self::t_logpdf(r, sigma, nu));
        }
        Ok(out)
    }

    fn simulate(&self, params: &[f64], seed: u64) -> Result<Responses> {
        check_params(params, self.dim())?;
        let nu = params[self.nu_index()];
        if nu <= 0.0 {
            return Err(Error::validation(format!("nu must be positive, got {nu}")));
        }
        let t = rand_distr::StudentT::new(nu)
            .map_err(|e| Error::validation(format!("student-t simulate: {e}")))?;
        let mut rng = derive_rng(seed, "simulate/student-t");
        let mut out = Vec::with_capacity(self.n_obs());
        for row in &self.input.rows {
            let sigma = params[self.sigma_index(row.algorithm)];
            if sigma <= 0.0 {
                return Err(Error::validation(format!(
                    "sigma must be positive, got {sigma}"
                )));
            }
            let draw: f64 = t.sample(&mut rng);
            out.push(self.mu(params, row) + sigma * draw);
        }
        Ok(Responses::Continuous(out))
    }

    fn observed(&self) -> Responses {
        Responses::Continuous(self.input.rows.iter().map(|r| r.y).collect())
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
            out.push((format!("sigma_{a}"), m / SIGMA_RATE));
        }
        out.push(("nu".to_string(), m / NU_RATE));
        out.push(("s".to_string(), m / S_RATE));
        out
    }

    fn algorithm_labels(&self) -> Vec<String> {
        self.input.algorithms.clone()
    }
}
