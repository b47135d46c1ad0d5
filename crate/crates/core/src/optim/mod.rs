//! Stochastic optimizers under a hard evaluation budget.
//!
//! Eight algorithms share one contract: a run spends exactly its budget of
//! objective calls, sees only (possibly noisy) readings, and is judged
//! against the noiseless oracle. `OptRun::best_x` is the best point the run
//! ever visited by true objective value, regardless of what the algorithm
//! itself believed, and the trace records every improvement of that true
//! running best as `(evaluation index, delta to the global minimum)`. Two
//! runs with the same spec, function, noise level, budget, and seed produce
//! identical results; algorithm decisions and observation noise draw from
//! independent seeded streams.

mod algorithms;
mod evaluator;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::benchfns::BenchmarkFn;
use crate::error::{Error, Result};
use crate::rng::derive_rng;

use algorithms::{
    cmaes_lambda, run_cmaes, run_cuckoo, run_de, run_nelder_mead, run_pso, run_random_search,
    run_random_search_pairs, run_sa, CuckooParams, DeParams, NmParams, PsoParams, SaParams,
};
use evaluator::Evaluator;

/// The optimizer roster.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AlgorithmId {
    #[serde(rename = "PSO")]
    Pso,
    CuckooSearch,
    SimulatedAnnealing,
    DifferentialEvolution,
    NelderMead,
    #[serde(rename = "CMAES")]
    Cmaes,
    RandomSearch1,
    RandomSearch2,
}

impl AlgorithmId {
    pub const ALL: [AlgorithmId; 8] = [
        AlgorithmId::Pso,
        AlgorithmId::CuckooSearch,
        AlgorithmId::SimulatedAnnealing,
        AlgorithmId::DifferentialEvolution,
        AlgorithmId::NelderMead,
        AlgorithmId::Cmaes,
        AlgorithmId::RandomSearch1,
        AlgorithmId::RandomSearch2,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AlgorithmId::Pso => "PSO",
            AlgorithmId::CuckooSearch => "CuckooSearch",
            AlgorithmId::SimulatedAnnealing => "SimulatedAnnealing",
            AlgorithmId::DifferentialEvolution => "DifferentialEvolution",
            AlgorithmId::NelderMead => "NelderMead",
            AlgorithmId::Cmaes => "CMAES",
            AlgorithmId::RandomSearch1 => "RandomSearch1",
            AlgorithmId::RandomSearch2 => "RandomSearch2",
        }
    }
}

impl fmt::Display for AlgorithmId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AlgorithmId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AlgorithmId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = AlgorithmId::ALL.iter().map(|id| id.as_str()).collect();
                Error::validation(format!(
                    "unknown algorithm `{s}`; expected one of {}",
                    names.join(", ")
                ))
            })
    }
}

/// An algorithm together with its full parameter set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmSpec {
    pub id: AlgorithmId,
    pub params: BTreeMap<String, f64>,
}

impl AlgorithmSpec {
    /// Replace one parameter value, for overriding a default.
    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.params.insert(name.to_string(), value);
        self
    }

    fn get(&self, name: &str) -> Result<f64> {
        self.params.get(name).copied().ok_or_else(|| {
            Error::validation(format!("{}: missing parameter `{name}`", self.id))
        })
    }

    fn get_count(&self, name: &str) -> Result<usize> {
        let v = self.get(name)?;
        if !v.is_finite() || v < 1.0 || v.fract() != 0.0 {
            return Err(Error::validation(format!(
                "{}: parameter `{name}` must be a positive integer, got {v}",
                self.id
            )));
        }
        Ok(v as usize)
    }

    fn get_probability(&self, name: &str) -> Result<f64> {
        let v = self.get(name)?;
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::validation(format!(
                "{}: parameter `{name}` must lie in [0, 1], got {v}",
                self.id
            )));
        }
        Ok(v)
    }

    fn get_positive(&self, name: &str) -> Result<f64> {
        let v = self.get(name)?;
        if !v.is_finite() || v <= 0.0 {
            return Err(Error::validation(format!(
                "{}: parameter `{name}` must be positive, got {v}",
                self.id
            )));
        }
        Ok(v)
    }

    fn get_finite(&self, name: &str) -> Result<f64> {
        let v = self.get(name)?;
        if !v.is_finite() {
            return Err(Error::validation(format!(
                "{}: parameter `{name}` must be finite, got {v}",
                self.id
            )));
        }
        Ok(v)
    }
}

fn known_params(id: AlgorithmId) -> &'static [&'static str] {
    match id {
        AlgorithmId::Pso => &["c1", "c2", "w", "v_min", "v_max", "pop"],
        AlgorithmId::CuckooSearch => &["p_a", "alpha", "pop"],
        AlgorithmId::SimulatedAnnealing => &["delta", "t0", "delta_t"],
        AlgorithmId::DifferentialEvolution => &["weight", "cr", "pop"],
        AlgorithmId::NelderMead => &["alpha", "gamma", "rho", "sigma"],
        AlgorithmId::Cmaes => &["sigma0"],
        AlgorithmId::RandomSearch1 | AlgorithmId::RandomSearch2 => &[],
    }
}

/// The stock configuration for each algorithm.
pub fn default_params(id: AlgorithmId) -> AlgorithmSpec {
    let pairs: &[(&str, f64)] = match id {
        AlgorithmId::Pso => &[
            ("c1", 2.0),
            ("c2", 2.0),
            ("w", 0.7),
            ("v_min", -1.5),
            ("v_max", 1.5),
            ("pop", 30.0),
        ],
        AlgorithmId::CuckooSearch => &[("p_a", 0.2), ("alpha", 0.5), ("pop", 30.0)],
        AlgorithmId::SimulatedAnnealing => &[("delta", 0.5), ("t0", 2000.0), ("delta_t", 0.8)],
        AlgorithmId::DifferentialEvolution => &[("weight", 1.0), ("cr", 0.8), ("pop", 30.0)],
        AlgorithmId::NelderMead => &[
            ("alpha", 0.1),
            ("gamma", 0.3),
            ("rho", -0.2),
            ("sigma", -0.2),
        ],
        AlgorithmId::Cmaes => &[("sigma0", 0.5)],
        AlgorithmId::RandomSearch1 | AlgorithmId::RandomSearch2 => &[],
    };
    AlgorithmSpec {
        id,
        params: pairs
            .iter()
            .map(|&(k, v)| (k.to_string(), v))
            .collect(),
    }
}

/// Result of one optimization run.
///
/// `best_x` and `best_f_true` are judged by the noiseless objective over
/// every point the run evaluated. `trace` holds each improvement of the
/// running true best as `(1-based evaluation index, f(best) - f_min)`, so
/// its delta values strictly decrease and the last entry corresponds to
/// `best_f_true`. `cpu_seconds` is wall time spent inside the optimizer
/// loop, objective calls included.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptRun {
    pub best_x: Vec<f64>,
    pub best_f_true: f64,
    pub trace: Vec<(usize, f64)>,
    pub evaluations_used: usize,
    pub cpu_seconds: f64,
}

enum Driver {
    Pso(PsoParams),
    Cuckoo(CuckooParams),
    Sa(SaParams),
    De(DeParams),
    Nm(NmParams),
    Cmaes { sigma0: f64 },
    Rs1,
    Rs2,
}

fn build_driver(spec: &AlgorithmSpec, dimension: usize) -> Result<(Driver, usize)> {
    for key in spec.params.keys() {
        if !known_params(spec.id).contains(&key.as_str()) {
            return Err(Error::validation(format!(
                "{}: unknown parameter `{key}`",
                spec.id
            )));
        }
    }
    match spec.id {
        AlgorithmId::Pso => {
            let p = PsoParams {
                c1: spec.get_finite("c1")?,
                c2: spec.get_finite("c2")?,
                w: spec.get_finite("w")?,
                v_min: spec.get_finite("v_min")?,
                v_max: spec.get_finite("v_max")?,
                pop: spec.get_count("pop")?,
            };
            if p.v_min >= p.v_max {
                return Err(Error::validation(format!(
                    "{}: v_min {} must be below v_max {}",
                    spec.id, p.v_min, p.v_max
                )));
            }
            let min = p.pop;
            Ok((Driver::Pso(p), min))
        }
        AlgorithmId::CuckooSearch => {
            let p = CuckooParams {
                p_a: spec.get_probability("p_a")?,
                alpha: spec.get_positive("alpha")?,
                pop: spec.get_count("pop")?,
            };
            let min = p.pop;
            Ok((Driver::Cuckoo(p), min))
        }
        AlgorithmId::SimulatedAnnealing => {
            let p = SaParams {
                delta: spec.get_positive("delta")?,
                t0: spec.get_positive("t0")?,
                delta_t: spec.get_probability("delta_t")?,
            };
            Ok((Driver::Sa(p), 1))
        }
        AlgorithmId::DifferentialEvolution => {
            let p = DeParams {
                weight: spec.get_finite("weight")?,
                cr: spec.get_probability("cr")?,
                pop: spec.get_count("pop")?,
            };
            if p.pop < 4 {
                return Err(Error::validation(format!(
                    "{}: population must be at least 4, got {}",
                    spec.id, p.pop
                )));
            }
            let min = p.pop;
            Ok((Driver::De(p), min))
        }
        AlgorithmId::NelderMead => {
            let p = NmParams {
                alpha: spec.get_finite("alpha")?,
                gamma: spec.get_finite("gamma")?,
                rho: spec.get_finite("rho")?,
                sigma: spec.get_finite("sigma")?,
            };
            Ok((Driver::Nm(p), dimension + 1))
        }
        AlgorithmId::Cmaes => {
            let sigma0 = spec.get_positive("sigma0")?;
            Ok((Driver::Cmaes { sigma0 }, cmaes_lambda(dimension)))
        }
        AlgorithmId::RandomSearch1 => Ok((Driver::Rs1, 1)),
        AlgorithmId::RandomSearch2 => Ok((Driver::Rs2, 2)),
    }
}

/// Run one optimizer against one benchmark function.
///
/// `noise_sd` is the standard deviation of additive Gaussian output noise on
/// every reading the algorithm sees; metrics stay noiseless. `budget` is the
/// exact number of objective evaluations the run will spend. Budgets below
/// the algorithm's minimum viable start (its initial population, simplex, or
/// sample pair) are rejected.
pub fn optimize(
    spec: &AlgorithmSpec,
    f: &BenchmarkFn,
    noise_sd: f64,
    budget: usize,
    seed: u64,
) -> Result<OptRun> {
    if !noise_sd.is_finite() || noise_sd < 0.0 {
        return Err(Error::validation(format!(
            "noise_sd must be finite and nonnegative, got {noise_sd}"
        )));
    }
    if budget == 0 {
        return Err(Error::validation("budget must be at least 1"));
    }
    let (driver, min_budget) = build_driver(spec, f.dimension())?;
    if budget < min_budget {
        return Err(Error::validation(format!(
            "budget {budget} is below the minimum {min_budget} required by {} in dimension {}",
            spec.id,
            f.dimension()
        )));
    }
    let start = Instant::now();
    let mut ev = Evaluator::new(f, noise_sd, budget, seed);
    let mut rng = derive_rng(seed, &format!("optim/{}", spec.id));
    match driver {
        Driver::Pso(p) => run_pso(&p, f, &mut ev, &mut rng),
        Driver::Cuckoo(p) => run_cuckoo(&p, f, &mut ev, &mut rng),
        Driver::Sa(p) => run_sa(&p, f, &mut ev, &mut rng),
        Driver::De(p) => run_de(&p, f, &mut ev, &mut rng),
        Driver::Nm(p) => run_nelder_mead(&p, f, &mut ev, &mut rng),
        Driver::Cmaes { sigma0 } => run_cmaes(sigma0, f, &mut ev, &mut rng),
        Driver::Rs1 => run_random_search(f, &mut ev, &mut rng),
        Driver::Rs2 => run_random_search_pairs(f, &mut ev, &mut rng),
    }
    debug_assert!(ev.exhausted());
    Ok(ev.finish(start.elapsed().as_secs_f64()))
}
