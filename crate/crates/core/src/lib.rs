//! Benchmark harness for stochastic optimizers paired with a Bayesian
//! analysis toolchain.
//!
//! The crate is organized around a small number of self-contained layers:
//!
//! * [`benchfns`] — bounded test functions with known global minima and an
//!   optional Gaussian output-noise wrapper.
//! * [`optim`] — eight derivative-free optimizers run under a shared
//!   evaluation budget.
//! * [`harness`] — full-factorial experiment execution, per-run metrics, and
//!   CSV persistence, plus the builders that turn raw runs into model inputs.
//! * [`sampler`] — a multinomial no-U-turn sampler with dual-averaging step
//!   size and diagonal mass-matrix adaptation, and convergence diagnostics.
//! * [`models`] — hierarchical log-posterior targets (binomial success,
//!   relative improvement, paired comparison with and without ties, survival,
//!   and robust runtime comparison).
//! * [`posterior`] — interval estimates and derived summaries computed from
//!   posterior draws.
//! * [`modelcheck`] — information criteria, posterior predictive checks, and
//!   prior sensitivity tooling.
//! * [`fit`] — the end-to-end "data in, checked posterior out" pipeline the
//!   command-line interface wraps.

pub mod benchfns;
pub mod error;
pub mod fit;
pub mod harness;
pub mod modelcheck;
pub mod models;
pub mod optim;
pub mod posterior;
pub mod rng;
pub mod sampler;
pub mod util;

pub use error::{Error, Result};
