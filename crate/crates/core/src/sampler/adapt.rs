//! Warmup adaptation: dual-averaging step-size search and windowed diagonal
//! mass-matrix estimation.

/// Nesterov-style dual averaging of the log step size, tuned toward a target
/// acceptance statistic (Hoffman & Gelman's schedule: gamma 0.05, t0 10,
/// kappa 0.75).
#[derive(Debug, Clone)]
pub struct DualAverage {
    mu: f64,
    log_eps: f64,
    log_eps_bar: f64,
    h_bar: f64,
    t: f64,
    target_accept: f64,
}

impl DualAverage {
    const GAMMA: f64 = 0.05;
    const T0: f64 = 10.0;
    const KAPPA: f64 = 0.75;

    pub fn new(eps0: f64, target_accept: f64) -> Self {
        DualAverage {
            mu: (10.0 * eps0).ln(),
            log_eps: eps0.ln(),
            log_eps_bar: 0.0,
            h_bar: 0.0,
            t: 0.0,
            target_accept,
        }
    }

    /// Fold in the acceptance statistic of one transition.
    pub fn update(&mut self, accept: f64) {
        self.t += 1.0;
        let eta = 1.0 / (self.t + Self::T0);
        self.h_bar = (1.0 - eta) * self.h_bar + eta * (self.target_accept - accept.min(1.0));
        self.log_eps = self.mu - self.t.sqrt() / Self::GAMMA * self.h_bar;
        let w = self.t.powf(-Self::KAPPA);
        self.log_eps_bar = w * self.log_eps + (1.0 - w) * self.log_eps_bar;
    }

    /// Step size to use for the next warmup transition.
    pub fn current(&self) -> f64 {
        self.log_eps.exp()
    }

    /// Smoothed step size to freeze after warmup.
    pub fn adapted(&self) -> f64 {
        self.log_eps_bar.exp()
    }
}

/// Warmup phase layout: an initial step-size-only buffer (15% of warmup),
/// doubling mass-matrix estimation windows, and a terminal step-size-only
/// buffer (10% of warmup).
#[derive(Debug, Clone)]
pub struct WarmupSchedule {
    mass_start: usize,
    mass_end: usize,
    window_ends: Vec<usize>,
}

impl WarmupSchedule {
    const BASE_WINDOW: usize = 25;

    pub fn new(warmup: usize) -> Self {
        let init_buffer = (0.15 * warmup as f64).floor() as usize;
        let term_buffer = (0.10 * warmup as f64).floor() as usize;
        let mass_start = init_buffer;
        let mass_end = warmup.saturating_sub(term_buffer);
        let mut window_ends = Vec::new();
        if mass_end > mass_start + 1 {
            let mut start = mass_start;
            let mut size = Self::BASE_WINDOW;
            while start < mass_end {
                let mut end = start + size;
                if end + 2 * size > mass_end {
                    end = mass_end;
                }
                window_ends.push(end.min(mass_end));
                start = end;
                size *= 2;
            }
        }
        WarmupSchedule {
            mass_start,
            mass_end,
            window_ends,
        }
    }

    /// Whether warmup iteration `iter` contributes to the mass estimate.
    pub fn collects_mass(&self, iter: usize) -> bool {
        iter >= self.mass_start && iter < self.mass_end
    }

    /// Whether the mass matrix should be re-estimated after iteration `iter`.
    pub fn window_closes(&self, iter: usize) -> bool {
        self.window_ends.contains(&(iter + 1))
    }
}

/// Streaming mean/variance accumulator (Welford).
#[derive(Debug, Clone)]
pub struct RunningVariance {
    n: usize,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl RunningVariance {
    pub fn new(dim: usize) -> Self {
        RunningVariance {
            n: 0,
            mean: vec![0.0; dim],
            m2: vec![0.0; dim],
        }
    }

    pub fn add(&mut self, x: &[f64]) {
        self.n += 1;
        let n = self.n as f64;
        for i in 0..x.len() {
            let delta = x[i] - self.mean[i];
            self.mean[i] += delta / n;
            self.m2[i] += delta * (x[i] - self.mean[i]);
        }
    }

    pub fn count(&self) -> usize {
        self.n
    }

    /// Regularized variance estimate shrunk gently toward unit scale, as is
    /// standard for warmup metric estimation.
    pub fn regularized_variance(&self) -> Vec<f64> {
        let n = self.n as f64;
        self.m2
            .iter()
            .map(|&m2| {
                if self.n < 2 {
                    1.0
                } else {
                    let var = m2 / (n - 1.0);
                    (n / (n + 5.0)) * var + 1e-3 * (5.0 / (n + 5.0))
                }
            })
            .collect()
    }

    pub fn reset(&mut self) {
        self.n = 0;
        self.mean.iter_mut().for_each(|v| *v = 0.0);
        self.m2.iter_mut().for_each(|v| *v = 0.0);
    }
}
