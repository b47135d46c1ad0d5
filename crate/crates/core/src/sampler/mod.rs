//! Markov chain Monte Carlo sampling via the no-U-turn sampler, with warmup
//! adaptation and convergence diagnostics.
//!
//! Targets expose an unconstrained log density with analytic gradient;
//! constrained parameters are handled by the model layer (log-scale
//! coordinates with the Jacobian term folded into the density) and mapped
//! back through [`Target::constrain`] when draws are stored.

mod adapt;
mod diagnostics;
mod nuts;

pub use diagnostics::{ess, split_rhat};
pub use nuts::DIVERGENCE_THRESHOLD;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::derive_rng;
use crate::util::{mean, sample_sd};
use adapt::{DualAverage, RunningVariance, WarmupSchedule};
use nuts::{find_reasonable_step_size, transition, ChainState, Hamiltonian};

/// Log-density target over an unconstrained parameter space.
pub trait Target: Sync {
    /// Number of unconstrained coordinates.
    fn dim(&self) -> usize;

    /// Reporting names, one per constrained coordinate.
    fn names(&self) -> Vec<String>;

    /// Log density (up to a constant) and its gradient at `z`.
    fn log_density_grad(&self, z: &[f64]) -> (f64, Vec<f64>);

    /// Map an unconstrained point to the constrained reporting scale.
    fn constrain(&self, z: &[f64]) -> Vec<f64> {
        z.to_vec()
    }
}

/// Run-length and tuning knobs for [`nuts_sample`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub chains: usize,
    /// Adaptation iterations per chain, discarded afterwards.
    pub warmup: usize,
    /// Retained post-warmup iterations per chain.
    pub draws: usize,
    pub target_accept: f64,
    pub max_depth: usize,
    /// Initial values are drawn uniformly from `(-r, r)` per coordinate.
    pub init_radius: f64,
    pub seed: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            chains: 4,
            warmup: 1000,
            draws: 1000,
            target_accept: 0.8,
            max_depth: 10,
            init_radius: 2.0,
            seed: 0,
        }
    }
}

/// Per-chain sampling statistics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChainStats {
    /// Post-warmup divergent transitions.
    pub divergences: usize,
    /// Post-warmup transitions that exhausted the maximum tree depth.
    pub max_depth_hits: usize,
    /// Step size in effect after warmup.
    pub step_size: f64,
    /// Mean post-warmup acceptance statistic.
    pub mean_accept: f64,
}

/// Posterior draws on the constrained scale, kept per chain.
#[derive(Debug, Clone)]
pub struct PosteriorDraws {
    pub names: Vec<String>,
    /// Indexed `[chain][iteration][parameter]`.
    pub draws: Vec<Vec<Vec<f64>>>,
    pub chain_stats: Vec<ChainStats>,
}

impl PosteriorDraws {
    pub fn n_chains(&self) -> usize {
        self.draws.len()
    }

    pub fn n_draws_per_chain(&self) -> usize {
        self.draws.first().map_or(0, |c| c.len())
    }

    pub fn n_params(&self) -> usize {
        self.names.len()
    }

    pub fn param_index(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::validation(format!("unknown parameter: {name}")))
    }

    /// All chains pooled, in chain order.
    pub fn pooled(&self, param: usize) -> Vec<f64> {
        self.draws
            .iter()
            .flat_map(|chain| chain.iter().map(move |draw| draw[param]))
            .collect()
    }

    /// One vector per chain.
    pub fn per_chain(&self, param: usize) -> Vec<Vec<f64>> {
        self.draws
            .iter()
            .map(|chain| chain.iter().map(|draw| draw[param]).collect())
            .collect()
    }

    pub fn total_divergences(&self) -> usize {
        self.chain_stats.iter().map(|s| s.divergences).sum()
    }
}

/// Compare the analytic gradient against central finite differences at `z`.
///
/// The comparison is relative for large components and absolute for small
/// ones: `|fd - grad| <= tol * (1 + max(|fd|, |grad|))`.
pub fn gradient_check(target: &dyn Target, z: &[f64], tol: f64) -> Result<()> {
    let (_, grad) = target.log_density_grad(z);
    let mut zp = z.to_vec();
    for i in 0..target.dim() {
        let h = 1e-5 * (1.0 + z[i].abs());
        zp[i] = z[i] + h;
        let fp = target.log_density_grad(&zp).0;
        zp[i] = z[i] - h;
        let fm = target.log_density_grad(&zp).0;
        zp[i] = z[i];
        let fd = (fp - fm) / (2.0 * h);
        if !fd.is_finite() || !grad[i].is_finite() {
            return Err(Error::validation(format!(
                "non-finite gradient at coordinate {i} (analytic {}, finite difference {fd})",
                grad[i]
            )));
        }
        let scale = 1.0 + fd.abs().max(grad[i].abs());
        if (fd - grad[i]).abs() > tol * scale {
            return Err(Error::validation(format!(
                "gradient mismatch at coordinate {i}: analytic {}, finite difference {fd}",
                grad[i]
            )));
        }
    }
    Ok(())
}

const INIT_ATTEMPTS: usize = 100;
const GRADIENT_CHECK_TOL: f64 = 1e-3;

struct ChainRun {
    draws: Vec<Vec<f64>>,
    stats: ChainStats,
}

fn run_chain(target: &dyn Target, cfg: &SamplerConfig, chain: usize) -> Result<ChainRun> {
    let dim = target.dim();
    let mut rng = derive_rng(cfg.seed, &format!("nuts/chain/{chain}"));

    let mut state: Option<ChainState> = None;
    for _ in 0..INIT_ATTEMPTS {
        let z: Vec<f64> = (0..dim)
            .map(|_| rng.random_range(-cfg.init_radius..cfg.init_radius))
            .collect();
        let (logp, grad) = target.log_density_grad(&z);
        if logp.is_finite() && grad.iter().all(|g| g.is_finite()) {
            state = Some(ChainState { z, logp, grad });
            break;
        }
    }
    let mut state = state.ok_or_else(|| {
        Error::validation(format!(
            "non-finite log density at initialization after {INIT_ATTEMPTS} attempts"
        ))
    })?;
    gradient_check(target, &state.z, GRADIENT_CHECK_TOL)?;

    let mut inv_mass = vec![1.0; dim];
    let mut eps = {
        let ham = Hamiltonian {
            target,
            inv_mass: &inv_mass,
        };
        find_reasonable_step_size(&ham, &state, &mut rng)
    };
    let mut da = DualAverage::new(eps, cfg.target_accept);
    let schedule = WarmupSchedule::new(cfg.warmup);
    let mut welford = RunningVariance::new(dim);

    for m in 0..cfg.warmup {
        let ham = Hamiltonian {
            target,
            inv_mass: &inv_mass,
        };
        let tr = transition(&ham, &state, eps, cfg.max_depth, &mut rng);
        state = tr.state;
        da.update(tr.accept_stat);
        eps = da.current();
        if schedule.collects_mass(m) {
            welford.add(&state.z);
        }
        if schedule.window_closes(m) && welford.count() >= 2 {
            inv_mass = welford.regularized_variance();
            welford.reset();
            let ham = Hamiltonian {
                target,
                inv_mass: &inv_mass,
            };
            eps = find_reasonable_step_size(&ham, &state, &mut rng);
            da = DualAverage::new(eps, cfg.target_accept);
        }
    }
    if cfg.warmup > 0 {
        eps = da.adapted();
    }

    let ham = Hamiltonian {
        target,
        inv_mass: &inv_mass,
    };
    let mut draws = Vec::with_capacity(cfg.draws);
    let mut divergences = 0;
    let mut max_depth_hits = 0;
    let mut accept_sum = 0.0;
    for _ in 0..cfg.draws {
        let tr = transition(&ham, &state, eps, cfg.max_depth, &mut rng);
        state = tr.state;
        if tr.diverged {
            divergences += 1;
        }
        if tr.hit_max_depth {
            max_depth_hits += 1;
        }
        accept_sum += tr.accept_stat;
        draws.push(target.constrain(&state.z));
    }

    Ok(ChainRun {
        draws,
        stats: ChainStats {
            divergences,
            max_depth_hits,
            step_size: eps,
            mean_accept: accept_sum / cfg.draws.max(1) as f64,
        },
    })
}

/// Sample `target` with one NUTS chain per configured chain, in parallel.
///
/// Chains are initialized from independent derived streams, adapted with the
/// windowed warmup schedule, and returned on the constrained scale. The
/// result is deterministic for a given `(target, config)` regardless of
/// thread scheduling.
pub fn nuts_sample(target: &dyn Target, cfg: &SamplerConfig) -> Result<PosteriorDraws> {
    if cfg.chains == 0 || cfg.draws == 0 {
        return Err(Error::validation("need at least one chain and one draw"));
    }
    if !(cfg.target_accept > 0.0 && cfg.target_accept < 1.0) {
        return Err(Error::validation(format!(
            "target acceptance must lie in (0, 1), got {}",
            cfg.target_accept
        )));
    }
    if target.dim() == 0 {
        return Err(Error::validation("target has no parameters"));
    }

    let runs: Result<Vec<ChainRun>> = (0..cfg.chains)
        .into_par_iter()
        .map(|chain| run_chain(target, cfg, chain))
        .collect();
    let runs = runs?;

    let names = target.names();
    let n_constrained = runs[0].draws[0].len();
    if names.len() != n_constrained {
        return Err(Error::validation(format!(
            "target reports {} names for {n_constrained} constrained values",
            names.len()
        )));
    }

    Ok(PosteriorDraws {
        names,
        draws: runs.iter().map(|r| r.draws.clone()).collect(),
        chain_stats: runs.into_iter().map(|r| r.stats).collect(),
    })
}

/// Largest split R-hat accepted by the convergence gate.
pub const RHAT_LIMIT: f64 = 1.05;
/// Smallest per-parameter effective sample size accepted by the gate.
pub const ESS_LIMIT: f64 = 200.0;

/// Per-parameter posterior summary row.
#[derive(Debug, Clone, Serialize)]
pub struct SummaryRow {
    pub name: String,
    pub mean: f64,
    pub sd: f64,
    pub rhat: f64,
    pub ess: f64,
}

/// Posterior summary table with sampler health counters.
#[derive(Debug, Clone, Serialize)]
pub struct PosteriorSummary {
    pub rows: Vec<SummaryRow>,
    pub divergences: usize,
    pub max_depth_hits: usize,
}

/// Mean, sd, split R-hat, and ESS for every parameter.
pub fn summarize(draws: &PosteriorDraws) -> Result<PosteriorSummary> {
    let mut rows = Vec::with_capacity(draws.n_params());
    for (i, name) in draws.names.iter().enumerate() {
        let per_chain = draws.per_chain(i);
        let pooled = draws.pooled(i);
        rows.push(SummaryRow {
            name: name.clone(),
            mean: mean(&pooled),
            sd: sample_sd(&pooled),
            rhat: split_rhat(&per_chain)?,
            ess: ess(&per_chain)?,
        });
    }
    Ok(PosteriorSummary {
        rows,
        divergences: draws.total_divergences(),
        max_depth_hits: draws.chain_stats.iter().map(|s| s.max_depth_hits).sum(),
    })
}

/// Convergence gate: divergence-free draws, split R-hat below
/// [`RHAT_LIMIT`], and ESS above [`ESS_LIMIT`] for every parameter.
/// Returns the list of violations; an empty list means the fit is usable.
pub fn convergence_failures(summary: &PosteriorSummary) -> Vec<String> {
    let mut failures = Vec::new();
    if summary.divergences > 0 {
        failures.push(format!(
            "{} divergent transitions after warmup",
            summary.divergences
        ));
    }
    for row in &summary.rows {
        if !(row.rhat < RHAT_LIMIT) {
            failures.push(format!("{}: split R-hat {:.3} >= {RHAT_LIMIT}", row.name, row.rhat));
        }
        if !(row.ess > ESS_LIMIT) {
            failures.push(format!("{}: ESS {:.0} <= {ESS_LIMIT}", row.name, row.ess));
        }
    }
    failures
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent zero-mean Gaussians with per-coordinate standard deviations.
    struct DiagNormal {
        sds: Vec<f64>,
    }

    impl Target for DiagNormal {
        fn dim(&self) -> usize {
            self.sds.len()
        }

        fn names(&self) -> Vec<String> {
            (0..self.sds.len()).map(|i| format!("x{i}")).collect()
        }

        fn log_density_grad(&self, z: &[f64]) -> (f64, Vec<f64>) {
            let mut logp = 0.0;
            let mut grad = vec![0.0; z.len()];
            for (i, (&x, &sd)) in z.iter().zip(&self.sds).enumerate() {
                logp += -0.5 * (x / sd).powi(2);
                grad[i] = -x / (sd * sd);
            }
            (logp, grad)
        }
    }

    /// Funnel-shaped density: a scale parameter controlling the spread of
    /// the remaining coordinates.
    struct Funnel {
        dim: usize,
    }

    impl Target for Funnel {
        fn dim(&self) -> usize {
            self.dim
        }

        fn names(&self) -> Vec<String> {
            (0..self.dim).map(|i| format!("z{i}")).collect()
        }

        fn log_density_grad(&self, z: &[f64]) -> (f64, Vec<f64>) {
            let v = z[0];
            let mut logp = -v * v / 18.0;
            let mut grad = vec![0.0; self.dim];
            grad[0] = -v / 9.0;
            for i in 1..self.dim {
                let x = z[i];
                logp += -0.5 * x * x * (-v).exp() - 0.5 * v;
                grad[i] = -x * (-v).exp();
                grad[0] += 0.5 * x * x * (-v).exp() - 0.5;
            }
            (logp, grad)
        }
    }

    fn quick_cfg(seed: u64) -> SamplerConfig {
        SamplerConfig {
            chains: 4,
            warmup: 400,
            draws: 600,
            seed,
            ..SamplerConfig::default()
        }
    }

    #[test]
    fn recovers_diag_normal_moments() {
        let target = DiagNormal {
            sds: vec![1.0, 2.0, 0.5],
        };
        let draws = nuts_sample(&target, &quick_cfg(1)).unwrap();
        let summary = summarize(&draws).unwrap();
        assert_eq!(summary.divergences, 0);
        for (row, sd) in summary.rows.iter().zip(&target.sds) {
            assert!(row.mean.abs() < 0.1, "{}: mean {}", row.name, row.mean);
            assert!((row.sd - sd).abs() < 0.1 * sd, "{}: sd {}", row.name, row.sd);
            assert!(row.rhat < 1.02, "{}: rhat {}", row.name, row.rhat);
            assert!(row.ess > 300.0, "{}: ess {}", row.name, row.ess);
        }
        assert!(convergence_failures(&summary).is_empty());
    }

    #[test]
    fn same_seed_reproduces_draws_exactly() {
        let target = DiagNormal {
            sds: vec![1.0, 1.0],
        };
        let cfg = SamplerConfig {
            chains: 2,
            warmup: 100,
            draws: 150,
            seed: 7,
            ..SamplerConfig::default()
        };
        let a = nuts_sample(&target, &cfg).unwrap();
        let b = nuts_sample(&target, &cfg).unwrap();
        assert_eq!(a.draws, b.draws);
        let other = nuts_sample(
            &target,
            &SamplerConfig {
                seed: 8,
                ..cfg.clone()
            },
        )
        .unwrap();
        assert_ne!(a.draws, other.draws);
    }

    #[test]
    fn chains_are_distinct_streams() {
        let target = DiagNormal { sds: vec![1.0] };
        let cfg = SamplerConfig {
            chains: 2,
            warmup: 50,
            draws: 100,
            seed: 3,
            ..SamplerConfig::default()
        };
        let out = nuts_sample(&target, &cfg).unwrap();
        assert_ne!(out.draws[0], out.draws[1]);
    }

    #[test]
    fn init_failure_is_reported() {
        struct Hopeless;
        impl Target for Hopeless {
            fn dim(&self) -> usize {
                1
            }
            fn names(&self) -> Vec<String> {
                vec!["x".into()]
            }
            fn log_density_grad(&self, _z: &[f64]) -> (f64, Vec<f64>) {
                (f64::NEG_INFINITY, vec![0.0])
            }
        }
        let err = nuts_sample(&Hopeless, &quick_cfg(1)).unwrap_err();
        assert!(err.to_string().contains("initialization"));
    }

    #[test]
    fn funnel_with_oversized_step_diverges() {
        let target = Funnel { dim: 6 };
        let cfg = SamplerConfig {
            chains: 2,
            warmup: 0,
            draws: 300,
            seed: 5,
            ..SamplerConfig::default()
        };
        let out = nuts_sample(&target, &cfg).unwrap();
        assert!(out.total_divergences() > 0);
    }

    #[test]
    fn gradient_check_catches_wired_wrong_targets() {
        struct OffByScale;
        impl Target for OffByScale {
            fn dim(&self) -> usize {
                1
            }
            fn names(&self) -> Vec<String> {
                vec!["x".into()]
            }
            fn log_density_grad(&self, z: &[f64]) -> (f64, Vec<f64>) {
                (-0.5 * z[0] * z[0], vec![-2.0 * z[0]])
            }
        }
        assert!(gradient_check(&OffByScale, &[0.7], 1e-4).is_err());
        let fine = DiagNormal { sds: vec![1.5] };
        gradient_check(&fine, &[0.3], 1e-6).unwrap();
    }

    #[test]
    fn log_scale_sampling_matches_grid_posterior() {
        // One-parameter toy model: y ~ Normal(0, sigma), sigma ~ Exp(1),
        // sampled on log(sigma) with the Jacobian folded in. The dense-grid
        // quadrature over sigma is the oracle.
        let ys: Vec<f64> = {
            let mut rng = derive_rng(99, "sampler/test/jacobian");
            let d = rand_distr::Normal::new(0.0, 1.3).unwrap();
            (0..15).map(|_| rand_distr::Distribution::sample(&d, &mut rng)).collect()
        };

        struct LogScaleSigma {
            ys: Vec<f64>,
        }
        impl LogScaleSigma {
            fn log_post_sigma(&self, sigma: f64) -> f64 {
                let ll: f64 = self
                    .ys
                    .iter()
                    .map(|y| -0.5 * (y / sigma).powi(2) - sigma.ln())
                    .sum();
                ll - sigma
            }
        }
        impl Target for LogScaleSigma {
            fn dim(&self) -> usize {
                1
            }
            fn names(&self) -> Vec<String> {
                vec!["sigma".into()]
            }
            fn log_density_grad(&self, z: &[f64]) -> (f64, Vec<f64>) {
                let u = z[0];
                let sigma = u.exp();
                let n = self.ys.len() as f64;
                let ss: f64 = self.ys.iter().map(|y| y * y).sum();
                let logp = -0.5 * ss / (sigma * sigma) - n * u - sigma + u;
                let grad = ss / (sigma * sigma) - n - sigma + 1.0;
                (logp, vec![grad])
            }
            fn constrain(&self, z: &[f64]) -> Vec<f64> {
                vec![z[0].exp()]
            }
        }

        let target = LogScaleSigma { ys: ys.clone() };
        gradient_check(&target, &[0.4], 1e-6).unwrap();
        let cfg = SamplerConfig {
            chains: 4,
            warmup: 500,
            draws: 2500,
            seed: 21,
            ..SamplerConfig::default()
        };
        let out = nuts_sample(&target, &cfg).unwrap();
        let sigma_draws = out.pooled(0);

        // Quadrature oracle on the sigma scale.
        let grid: Vec<f64> = (1..60_000).map(|i| i as f64 * 1e-4).collect();
        let logdens: Vec<f64> = grid.iter().map(|&s| target.log_post_sigma(s)).collect();
        let m = logdens.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = logdens.iter().map(|l| (l - m).exp()).collect();
        let total: f64 = weights.iter().sum();
        let mut cdf = 0.0;
        let mut oracle_q = Vec::new();
        let mut targets = [0.1, 0.25, 0.5, 0.75, 0.9].iter().peekable();
        for (w, &s) in weights.iter().zip(&grid) {
            cdf += w / total;
            while let Some(&&q) = targets.peek() {
                if cdf >= q {
                    oracle_q.push(s);
                    targets.next();
                } else {
                    break;
                }
            }
        }
        assert_eq!(oracle_q.len(), 5);

        for (&q, &oracle) in [0.1, 0.25, 0.5, 0.75, 0.9].iter().zip(&oracle_q) {
            let sampled = crate::util::quantile(&sigma_draws, q);
            assert!(
                (sampled - oracle).abs() < 0.01,
                "quantile {q}: sampled {sampled}, oracle {oracle}"
            );
        }
    }
}
