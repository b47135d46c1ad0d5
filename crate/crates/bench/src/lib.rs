//! Shared fixtures for the criterion benchmarks in `benches/`.

use bayesbench_core::sampler::Target;

/// Independent standard normals; the usual sampler throughput yardstick.
pub struct StdNormal {
    pub dim: usize,
}

impl Target for StdNormal {
    fn dim(&self) -> usize {
        self.dim
    }

    fn names(&self) -> Vec<String> {
        (0..self.dim).map(|i| format!("x{i}")).collect()
    }

    fn log_density_grad(&self, z: &[f64]) -> (f64, Vec<f64>) {
        let lp = -0.5 * z.iter().map(|x| x * x).sum::<f64>();
        let grad = z.iter().map(|x| -x).collect();
        (lp, grad)
    }
}
