//! Budget-enforcing objective wrapper shared by all optimizers.
//!
//! Algorithms only ever see noisy readings; the wrapper separately tracks
//! the noiseless value of every visited point so metrics never depend on
//! what an algorithm believed.

use rand_chacha::ChaCha8Rng;

use crate::benchfns::BenchmarkFn;
use crate::rng::derive_rng;

use super::OptRun;

pub(crate) struct Evaluator<'a> {
    f: &'a BenchmarkFn,
    noise_sd: f64,
    budget: usize,
    used: usize,
    noise_rng: ChaCha8Rng,
    best_true: f64,
    best_x: Vec<f64>,
    trace: Vec<(usize, f64)>,
}

impl<'a> Evaluator<'a> {
    pub fn new(f: &'a BenchmarkFn, noise_sd: f64, budget: usize, seed: u64) -> Self {
        Evaluator {
            f,
            noise_sd,
            budget,
            used: 0,
            noise_rng: derive_rng(seed, "optim/noise"),
            best_true: f64::INFINITY,
            best_x: Vec::new(),
            trace: Vec::new(),
        }
    }

    /// Clamp `x` to bounds, spend one evaluation, and return the reading the
    /// algorithm sees. `None` once the budget is exhausted.
    pub fn eval(&mut self, x: &[f64]) -> Option<f64> {
        if self.used == self.budget {
            return None;
        }
        self.used += 1;
        let mut xc = x.to_vec();
        self.f.clamp(&mut xc);
        let true_val = self.f.evaluate(&xc).expect("clamped point is in bounds");
        if true_val < self.best_true {
            self.best_true = true_val;
            self.best_x = xc.clone();
            self.trace.push((self.used, true_val - self.f.f_min()));
        }
        Some(
            self.f
                .evaluate_noisy(&xc, self.noise_sd, &mut self.noise_rng)
                .expect("clamped point is in bounds"),
        )
    }

    pub fn remaining(&self) -> usize {
        self.budget - self.used
    }

    pub fn exhausted(&self) -> bool {
        self.remaining() == 0
    }

    pub fn finish(self, cpu_seconds: f64) -> OptRun {
        OptRun {
            best_x: self.best_x,
            best_f_true: self.best_true,
            trace: self.trace,
            evaluations_used: self.used,
            cpu_seconds,
        }
    }
}
