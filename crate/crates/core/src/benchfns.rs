//! Bounded benchmark functions with known global minima.
//!
//! The registry bundles a fixed set of twelve classic test functions covering
//! separable, ill-conditioned, and multimodal shapes in two and six
//! dimensions. Every entry records its box bounds, the complete list of
//! global minimizers, and the global minimum value, so run metrics can be
//! computed against an exact noiseless oracle. An output-noise wrapper turns
//! any entry into a stochastic objective.

use std::sync::OnceLock;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A benchmark objective with exact knowledge of its optimum.
pub struct BenchmarkFn {
    id: &'static str,
    dimension: usize,
    bounds: Vec<(f64, f64)>,
    minima: Vec<Vec<f64>>,
    f_min: f64,
    eval: fn(&[f64]) -> f64,
}

impl BenchmarkFn {
    pub fn id(&self) -> &'static str {
        self.id
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Per-coordinate `(low, high)` box bounds.
    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    /// All global minimizers.
    pub fn minima(&self) -> &[Vec<f64>] {
        &self.minima
    }

    /// Global minimum value.
    pub fn f_min(&self) -> f64 {
        self.f_min
    }

    /// Noiseless objective value at `x`.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dimension {
            return Err(Error::validation(format!(
                "{}: expected {} coordinates, got {}",
                self.id,
                self.dimension,
                x.len()
            )));
        }
        for (k, (&v, &(lo, hi))) in x.iter().zip(&self.bounds).enumerate() {
            if !(lo..=hi).contains(&v) {
                return Err(Error::validation(format!(
                    "{}: coordinate {} = {} outside [{}, {}]",
                    self.id, k, v, lo, hi
                )));
            }
        }
        Ok((self.eval)(x))
    }

    /// Objective value with additive Gaussian output noise of standard
    /// deviation `noise_sd`. A zero level draws nothing from `rng`.
    pub fn evaluate_noisy<R: Rng>(&self, x: &[f64], noise_sd: f64, rng: &mut R) -> Result<f64> {
        let f = self.evaluate(x)?;
        if noise_sd == 0.0 {
            Ok(f)
        } else {
            let z: f64 = rng.sample(StandardNormal);
            Ok(f + noise_sd * z)
        }
    }

    /// Euclidean distance from `x` to the nearest global minimizer.
    pub fn nearest_minimum_distance(&self, x: &[f64]) -> f64 {
        self.minima
            .iter()
            .map(|m| {
                m.iter()
                    .zip(x)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Clamp `x` into the box bounds in place.
    pub fn clamp(&self, x: &mut [f64]) {
        for (v, &(lo, hi)) in x.iter_mut().zip(&self.bounds) {
            *v = v.clamp(lo, hi);
        }
    }
}

fn cube(dimension: usize, lo: f64, hi: f64) -> Vec<(f64, f64)> {
    vec![(lo, hi); dimension]
}

fn sphere(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

fn zakharov(x: &[f64]) -> f64 {
    let s1: f64 = x.iter().map(|v| v * v).sum();
    let s2: f64 = x
        .iter()
        .enumerate()
        .map(|(i, v)| 0.5 * (i + 1) as f64 * v)
        .sum();
    s1 + s2 * s2 + s2 * s2 * s2 * s2
}

fn bent_cigar(x: &[f64]) -> f64 {
    x[0] * x[0] + 1e6 * x[1..].iter().map(|v| v * v).sum::<f64>()
}

fn discus(x: &[f64]) -> f64 {
    1e6 * x[0] * x[0] + x[1..].iter().map(|v| v * v).sum::<f64>()
}

fn qing(x: &[f64]) -> f64 {
    x.iter()
        .enumerate()
        .map(|(i, v)| {
            let t = v * v - (i + 1) as f64;
            t * t
        })
        .sum()
}

fn salomon(x: &[f64]) -> f64 {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    1.0 - (2.0 * std::f64::consts::PI * norm).cos() + 0.1 * norm
}

fn three_hump_camel(x: &[f64]) -> f64 {
    let (a, b) = (x[0], x[1]);
    2.0 * a * a - 1.05 * a.powi(4) + a.powi(6) / 6.0 + a * b + b * b
}

fn schwefel220(x: &[f64]) -> f64 {
    x.iter().map(|v| v.abs()).sum()
}

fn schwefel221(x: &[f64]) -> f64 {
    x.iter().map(|v| v.abs()).fold(0.0, f64::max)
}

fn schwefel223(x: &[f64]) -> f64 {
    x.iter().map(|v| v.powi(10)).sum()
}

fn exponential(x: &[f64]) -> f64 {
    -(-0.5 * x.iter().map(|v| v * v).sum::<f64>()).exp()
}

fn chung_reynolds(x: &[f64]) -> f64 {
    let s: f64 = x.iter().map(|v| v * v).sum();
    s * s
}

fn build_registry() -> Vec<BenchmarkFn> {
    let origin = |d: usize| vec![vec![0.0; d]];
    vec![
        BenchmarkFn {
            id: "bent_cigar6d",
            dimension: 6,
            bounds: cube(6, -100.0, 100.0),
            minima: origin(6),
            f_min: 0.0,
            eval: bent_cigar,
        },
        BenchmarkFn {
            id: "chung_reynolds2d",
            dimension: 2,
            bounds: cube(2, -100.0, 100.0),
            minima: origin(2),
            f_min: 0.0,
            eval: chung_reynolds,
        },
        BenchmarkFn {
            id: "discus2d",
            dimension: 2,
            bounds: cube(2, -100.0, 100.0),
            minima: origin(2),
            f_min: 0.0,
            eval: discus,
        },
        BenchmarkFn {
            id: "exponential2d",
            dimension: 2,
            bounds: cube(2, -1.0, 1.0),
            minima: origin(2),
            f_min: -1.0,
            eval: exponential,
        },
        BenchmarkFn {
            id: "qing2d",
            dimension: 2,
            bounds: cube(2, -500.0, 500.0),
            minima: {
                let r2 = 2.0_f64.sqrt();
                vec![
                    vec![1.0, r2],
                    vec![1.0, -r2],
                    vec![-1.0, r2],
                    vec![-1.0, -r2],
                ]
            },
            f_min: 0.0,
            eval: qing,
        },
        BenchmarkFn {
            id: "salomon2d",
            dimension: 2,
            bounds: cube(2, -100.0, 100.0),
            minima: origin(2),
            f_min: 0.0,
            eval: salomon,
        },
        BenchmarkFn {
            id: "schwefel220_2d",
            dimension: 2,
            bounds: cube(2, -100.0, 100.0),
            minima: origin(2),
            f_min: 0.0,
            eval: schwefel220,
        },
        BenchmarkFn {
            id: "schwefel221_6d",
            dimension: 6,
            bounds: cube(6, -100.0, 100.0),
            minima: origin(6),
            f_min: 0.0,
            eval: schwefel221,
        },
        BenchmarkFn {
            id: "schwefel223_6d",
            dimension: 6,
            bounds: cube(6, -10.0, 10.0),
            minima: origin(6),
            f_min: 0.0,
            eval: schwefel223,
        },
        BenchmarkFn {
            id: "sphere6d",
            dimension: 6,
            bounds: cube(6, -5.12, 5.12),
            minima: origin(6),
            f_min: 0.0,
            eval: sphere,
        },
        BenchmarkFn {
            id: "three_hump_camel2d",
            dimension: 2,
            bounds: cube(2, -5.0, 5.0),
            minima: origin(2),
            f_min: 0.0,
            eval: three_hump_camel,
        },
        BenchmarkFn {
            id: "zakharov2d",
            dimension: 2,
            bounds: cube(2, -5.0, 10.0),
            minima: origin(2),
            f_min: 0.0,
            eval: zakharov,
        },
    ]
}

fn registry() -> &'static [BenchmarkFn] {
    static REGISTRY: OnceLock<Vec<BenchmarkFn>> = OnceLock::new();
    REGISTRY.get_or_init(build_registry)
}

/// Sorted identifiers of every bundled function.
pub fn list() -> Vec<&'static str> {
    registry().iter().map(|f| f.id).collect()
}

/// Look up a function by identifier.
pub fn get(id: &str) -> Result<&'static BenchmarkFn> {
    registry()
        .iter()
        .find(|f| f.id == id)
        .ok_or_else(|| Error::validation(format!("unknown benchmark function: {id}")))
}

/// One catalog row as exported by [`catalog_json`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub id: String,
    pub dimension: usize,
    pub bounds: Vec<(f64, f64)>,
    pub minima: Vec<Vec<f64>>,
    pub f_min: f64,
}

/// JSON catalog of every bundled function (id, dimension, bounds, minima,
/// global minimum value), in identifier order.
pub fn catalog_json() -> String {
    let entries: Vec<CatalogEntry> = registry()
        .iter()
        .map(|f| CatalogEntry {
            id: f.id.to_string(),
            dimension: f.dimension,
            bounds: f.bounds.clone(),
            minima: f.minima.clone(),
            f_min: f.f_min,
        })
        .collect();
    serde_json::to_string_pretty(&entries).expect("catalog serialization cannot fail")
}
