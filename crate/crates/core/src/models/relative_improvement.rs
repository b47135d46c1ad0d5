//! Linear model for the relative improvement of an algorithm over the
//! random-search baseline, with benchmark random effects.

use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use super::{
    check_params, exponential_prior_log_scale, hierarchical_prior, normal_prior, validate_labels,
    validate_prior_scale, Model, ModelKind, Responses,
};
use crate::error::{Error, Result};
use crate::rng::derive_rng;
use crate::sampler::{SamplerConfig, Target};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RelativeImprovementRow {
    pub algorithm: usize,
    pub benchmark: usize,
    pub y: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RelativeImprovementInput {
    pub algorithms: Vec<String>,
    pub benchmarks: Vec<String>,
    pub rows: Vec<RelativeImprovementRow>,
}

/// `y ~ Normal(a_alg + a_bm, sigma)`.
///
/// Priors: `a_alg ~ Normal(0,1)`, `sigma ~ Exponential(1)`,
/// `a_bm ~ Normal(0,s)`, `s ~ Exponential(0.1)`.
#[derive(Debug, Clone)]
pub struct RelativeImprovementModel {
    input: RelativeImprovementInput,
    prior_scale: f64,
}

const A_SD: f64 = 1.0;
const SIGMA_RATE: f64 = 1.0;
const S_RATE: f64 = 0.1;
const LN_SQRT_TWO_PI: f64 = 0.918_938_533_204_672_8;

pub fn relative_improvement_model(
    input: RelativeImprovementInput,
) -> Result<RelativeImprovementModel> {
    RelativeImprovementModel::new(input, 1.0)
}

impl RelativeImprovementModel {
    pub fn new(input: RelativeImprovementInput, prior_scale: f64) -> Result<Self> {
        validate_prior_scale(prior_scale)?;
        validate_labels("algorithm", &input.algorithms)?;
        validate_labels("benchmark", &input.benchmarks)?;
        if input.rows.is_empty() {
            return Err(Error::validation("no rows in relative-improvement input"));
        }
        for (k, row) in input.rows.iter().enumerate() {
            if row.algorithm >= input.algorithms.len() || row.benchmark >= input.benchmarks.len() {
                return Err(Error::validation(format!("row {k}: index out of range")));
            }
            if !row.y.is_finite() {
                return Err(Error::validation(format!("row {k}: non-finite response")));
            }
        }
        Ok(RelativeImprovementModel { input, prior_scale })
    }

    pub fn input(&self) -> &RelativeImprovementInput {
        &self.input
    }

    fn n_alg(&self) -> usize {
        self.input.algorithms.len()
    }

    fn n_bm(&self) -> usize {
        self.input.benchmarks.len()
    }

    fn mu(&self, params: &[f64], row: &RelativeImprovementRow) -> f64 {
        params[row.algorithm] + params[self.n_alg() + row.benchmark]
    }
}

impl Target for RelativeImprovementModel {
    fn dim(&self) -> usize {
        self.n_alg() + self.n_bm() + 2
    }

    fn names(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(self.dim());
        for a in &self.input.algorithms {
            names.push(format!("a_{a}"));
        }
        for b in &self.input.benchmarks {
            names.push(format!("a_bm_{b}"));
        }
        names.push("sigma".to_string());
        names.push("s".to_string());
        names
    }

    fn log_density_grad(&self, z: &[f64]) -> (f64, Vec<f64>) {
        let na = self.n_alg();
        let nb = self.n_bm();
        let log_sigma = z[na + nb];
        let sigma = log_sigma.exp();
        let log_s = z[na + nb + 1];
        let s = log_s.exp();
        let mut logp = 0.0;
        let mut grad = vec![0.0; z.len()];
        let mut dlog_sigma = 0.0;

        for row in &self.input.rows {
            let r = (row.y - self.mu(z, row)) / sigma;
            logp += -LN_SQRT_TWO_PI - log_sigma - 0.5 * r * r;
            let d = r / sigma;
            grad[row.algorithm] += d;
            grad[na + row.benchmark] += d;
            dlog_sigma += r * r - 1.0;
        }

        let m = self.prior_scale;
        for i in 0..na {
            let (l, g) = normal_prior(z[i], A_SD * m);
            logp += l;
            grad[i] += g;
        }
        let mut dlog_s = 0.0;
        for j in 0..nb {
            let (l, g, gs) = hierarchical_prior(z[na + j], s);
            logp += l;
            grad[na + j] += g;
            dlog_s += gs;
        }
        let (l, g) = exponential_prior_log_scale(sigma, SIGMA_RATE / m, log_sigma);
        logp += l;
        grad[na + nb] = dlog_sigma + g;
        let (l, g) = exponential_prior_log_scale(s, S_RATE / m, log_s);
        logp += l;
        grad[na + nb + 1] = dlog_s + g;

        (logp, grad)
    }

    fn constrain(&self, z: &[f64]) -> Vec<f64> {
        let mut out = z.to_vec();
        let n = out.len();
        out[n - 2] = out[n - 2].exp();
        out[n - 1] = out[n - 1].exp();
        out
    }
}

impl Model for RelativeImprovementModel {
    fn kind(&self) -> ModelKind {
        ModelKind::RelativeImprovement
    }

    fn n_obs(&self) -> usize {
        self.input.rows.len()
    }

    fn pointwise_loglik(&self, params: &[f64]) -> Result<Vec<f64>> {
        check_params(params, self.dim())?;
        let sigma = params[self.dim() - 2];
        if sigma <= 0.0 {
            return Err(Error::validation(format!("sigma must be positive, got {sigma}")));
        }
        Ok(self
            .input
            .rows
            .iter()
            .map(|row| {
                let r = (row.y - self.mu(params, row)) / sigma;
                -LN_SQRT_TWO_PI - sigma.ln() - 0.5 * r * r
            })
            .collect())
    }

    fn simulate(&self, params: &[f64], seed: u64) -> Result<Responses> {
        check_params(params, self.dim())?;
        let sigma = params[self.dim() - 2];
        if sigma <= 0.0 {
            return Err(Error::validation(format!("sigma must be positive, got {sigma}")));
        }
        let mut rng = derive_rng(seed, "simulate/relative-improvement");
        let noise = rand_distr::Normal::new(0.0, sigma)
            .map_err(|e| Error::validation(format!("normal simulate: {e}")))?;
        Ok(Responses::Continuous(
            self.input
                .rows
                .iter()
                .map(|row| self.mu(params, row) + noise.sample(&mut rng))
                .collect(),
        ))
    }

    fn observed(&self) -> Responses {
        Responses::Continuous(self.input.rows.iter().map(|r| r.y).collect())
    }

    fn default_sampler(&self) -> SamplerConfig {
        SamplerConfig {
            warmup: 200,
            draws: 1800,
            ..SamplerConfig::default()
        }
    }

    fn prior_scales(&self) -> Vec<(String, f64)> {
        let m = self.prior_scale;
        let mut out = Vec::new();
        for a in &self.input.algorithms {
            out.push((format!("a_{a}"), A_SD * m));
        }
        out.push(("sigma".to_string(), m / SIGMA_RATE));
        out.push(("s".to_string(), m / S_RATE));
        out
    }

    fn algorithm_labels(&self) -> Vec<String> {
        self.input.algorithms.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::{gradient_check, nuts_sample};
    use approx::assert_relative_eq;
    use rand::Rng;

    fn toy_input() -> RelativeImprovementInput {
        RelativeImprovementInput {
            algorithms: vec!["alpha".into(), "beta".into()],
            benchmarks: vec!["f1".into(), "f2".into()],
            rows: vec![
                RelativeImprovementRow {
                    algorithm: 0,
                    benchmark: 0,
                    y: 0.4,
                },
                RelativeImprovementRow {
                    algorithm: 1,
                    benchmark: 1,
                    y: -0.3,
                },
                RelativeImprovementRow {
                    algorithm: 0,
                    benchmark: 1,
                    y: 0.9,
                },
            ],
        }
    }

    #[test]
    fn rejects_empty_and_non_finite() {
        let mut input = toy_input();
        input.rows.clear();
        assert!(relative_improvement_model(input).is_err());
        let mut input = toy_input();
        input.rows[0].y = f64::NAN;
        assert!(relative_improvement_model(input).is_err());
    }

    #[test]
    fn pointwise_matches_normal_density_oracle() {
        let model = relative_improvement_model(toy_input()).unwrap();
        let params = vec![0.2, -0.1, 0.05, -0.05, 0.7, 0.3];
        let ll = model.pointwise_loglik(&params).unwrap();
        use statrs::distribution::{Continuous, Normal};
        for (term, row) in ll.iter().zip(&model.input.rows) {
            let mu = params[row.algorithm] + params[2 + row.benchmark];
            let oracle = Normal::new(mu, 0.7).unwrap();
            assert_relative_eq!(*term, oracle.ln_pdf(row.y), epsilon = 1e-12);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let model = relative_improvement_model(toy_input()).unwrap();
        let mut rng = derive_rng(12, "test/relimp/grad");
        for _ in 0..20 {
            let z: Vec<f64> = (0..model.dim()).map(|_| rng.random_range(-1.5..1.5)).collect();
            gradient_check(&model, &z, 1e-5).unwrap();
        }
    }

    #[test]
    fn null_data_concentrates_intercept_near_zero() {
        // Exactly-zero responses would let the residual scale collapse and
        // degenerate the posterior, so the null signal carries a small
        // measurement jitter.
        let mut rng = derive_rng(31, "test/relimp/null");
        let jitter = rand_distr::Normal::new(0.0, 0.05).unwrap();
        let rows = (0..60)
            .map(|k| RelativeImprovementRow {
                algorithm: 0,
                benchmark: k % 6,
                y: jitter.sample(&mut rng),
            })
            .collect();
        let input = RelativeImprovementInput {
            algorithms: vec!["alpha".into()],
            benchmarks: (0..6).map(|j| format!("f{j}")).collect(),
            rows,
        };
        let model = relative_improvement_model(input).unwrap();
        let cfg = SamplerConfig {
            chains: 2,
            warmup: 300,
            draws: 400,
            seed: 9,
            ..SamplerConfig::default()
        };
        let draws = nuts_sample(&model, &cfg).unwrap();
        let a = draws.pooled(draws.param_index("a_alpha").unwrap());
        assert!(crate::util::mean(&a).abs() < 0.15);
    }

    #[test]
    fn recovers_simulated_effect() {
        let mut rng = derive_rng(7, "test/relimp/recovery");
        let bm_effects: Vec<f64> = (0..10).map(|_| rng.random_range(-0.2..0.2)).collect();
        let mut rows = Vec::new();
        let dist = rand_distr::Normal::new(0.0, 0.3).unwrap();
        for (j, bm) in bm_effects.iter().enumerate() {
            for _ in 0..12 {
                rows.push(RelativeImprovementRow {
                    algorithm: 0,
                    benchmark: j,
                    y: 0.3 + bm + dist.sample(&mut rng),
                });
            }
        }
        let input = RelativeImprovementInput {
            algorithms: vec!["alpha".into()],
            benchmarks: (0..10).map(|j| format!("f{j}")).collect(),
            rows,
        };
        let model = relative_improvement_model(input).unwrap();
        let cfg = SamplerConfig {
            chains: 2,
            warmup: 300,
            draws: 500,
            seed: 3,
            ..SamplerConfig::default()
        };
        let draws = nuts_sample(&model, &cfg).unwrap();
        let a = draws.pooled(draws.param_index("a_alpha").unwrap());
        let (lo, hi) = crate::posterior::hpd_interval(&a, 0.95).unwrap();
        assert!(lo < 0.3 && 0.3 < hi, "truth outside [{lo}, {hi}]");
    }
}
