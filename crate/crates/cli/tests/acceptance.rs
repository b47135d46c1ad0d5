//! Release acceptance checks, one test per criterion.
//!
//! Every test ends with a single `criterion N (...): PASS` line; run with
//! `--nocapture` to see them. A failed assertion names the criterion and the
//! value that broke it.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::sync::atomic::{AtomicUsize, Ordering};

use bayesbench_core::fit::{run_fit, FitReport, FitSpec};
use bayesbench_core::harness::{run_experiment, ExperimentConfig, Filters, TimingMode};
use bayesbench_core::modelcheck::waic;
use bayesbench_core::models::{
    binomial_model, bradley_terry_model, cox_model, davidson_model, davidson_probabilities,
    relative_improvement_model, student_t_model, BinomialInput, BinomialRow, CpuTimeInput,
    CpuTimeRow, Model, ModelKind, PairInput, PairOutcome, PairRow, RelativeImprovementInput,
    RelativeImprovementRow, Responses, SurvivalInput, SurvivalRow,
};
use bayesbench_core::optim::AlgorithmId;
use bayesbench_core::posterior::{hpd_interval, odds_ratio_summary};
use bayesbench_core::rng::{derive_rng, derive_seed};
use bayesbench_core::sampler::{nuts_sample, summarize, SamplerConfig, Target};
use bayesbench_core::util::{log1p_exp, quantile};
use rand::Rng;
use rayon::prelude::*;
use tempfile::TempDir;

fn round_to(x: f64, decimals: i32) -> f64 {
    let p = 10f64.powi(decimals);
    (x * p).round() / p
}

fn standard_normal(rng: &mut impl Rng) -> f64 {
    let u1 = rng.random::<f64>().max(f64::MIN_POSITIVE);
    let u2 = rng.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Posterior-mean odds and hazard ratios published for the full study,
/// matched after rounding to the table's precision.
#[test]
fn criterion_1_deterministic_transforms() {
    let cases = [(-0.10, 0.90), (-4.35, 0.01), (2.44, 11.47)];
    for (coef, expected) in cases {
        let draws = vec![coef; 200];
        let summary = odds_ratio_summary(&draws, 0.95).expect("odds ratio summary");
        let got = round_to(summary.mean, 2);
        assert!(
            (got - expected).abs() <= 0.005,
            "criterion 1: odds ratio for coefficient {coef} came out {got}, table value is {expected}"
        );
        assert!(
            (round_to(summary.hpd_low, 2) - expected).abs() <= 0.005
                && (round_to(summary.hpd_high, 2) - expected).abs() <= 0.005,
            "criterion 1: degenerate draws must give a degenerate interval"
        );
    }
    let hazard = round_to((-5.09f64).exp(), 3);
    assert!(
        (hazard - 0.006).abs() <= 0.005,
        "criterion 1: baseline hazard exp(-5.09) came out {hazard}, table value is 0.006"
    );
    println!(
        "criterion 1 (deterministic transforms): PASS, odds ratios 0.90 / 0.01 / 11.47 and baseline hazard 0.006 reproduced"
    );
}

struct StdNormal {
    dim: usize,
}

impl Target for StdNormal {
    fn dim(&self) -> usize {
        self.dim
    }

    fn names(&self) -> Vec<String> {
        (0..self.dim).map(|i| format!("x{i}")).collect()
    }

    fn log_density_grad(&self, z: &[f64]) -> (f64, Vec<f64>) {
        let lp = -0.5 * z.iter().map(|v| v * v).sum::<f64>();
        (lp, z.iter().map(|v| -v).collect())
    }
}

/// Beta(3, 5) posterior sampled on the logit scale, Jacobian included, so the
/// constrained draws can be checked against analytic quantiles.
struct BetaPosterior;

impl Target for BetaPosterior {
    fn dim(&self) -> usize {
        1
    }

    fn names(&self) -> Vec<String> {
        vec!["p".into()]
    }

    fn log_density_grad(&self, z: &[f64]) -> (f64, Vec<f64>) {
        let lp = -3.0 * log1p_exp(-z[0]) - 5.0 * log1p_exp(z[0]);
        let p = 1.0 / (1.0 + (-z[0]).exp());
        (lp, vec![3.0 - 8.0 * p])
    }

    fn constrain(&self, z: &[f64]) -> Vec<f64> {
        vec![1.0 / (1.0 + (-z[0]).exp())]
    }
}

const BETA35_QUANTILES: [(f64, f64); 9] = [
    (0.1, 0.1696384174),
    (0.2, 0.2283264643),
    (0.3, 0.2763396939),
    (0.4, 0.3205858306),
    (0.5, 0.3641160864),
    (0.6, 0.4092151219),
    (0.7, 0.4585546653),
    (0.8, 0.5167577701),
    (0.9, 0.5961797278),
];

#[test]
fn criterion_2_sampler_oracle() {
    let cfg = SamplerConfig {
        seed: 2,
        ..SamplerConfig::default()
    };
    let draws = nuts_sample(&StdNormal { dim: 5 }, &cfg).expect("standard normal sampling");
    assert_eq!(
        draws.total_divergences(),
        0,
        "criterion 2: divergences on a standard normal"
    );
    let summary = summarize(&draws).expect("summary");
    for row in &summary.rows {
        assert!(
            row.mean.abs() <= 0.05,
            "criterion 2: {} has mean {:.4}, expected within 0.05 of zero",
            row.name,
            row.mean
        );
        assert!(
            (row.sd - 1.0).abs() <= 0.05,
            "criterion 2: {} has sd {:.4}, expected within 0.05 of one",
            row.name,
            row.sd
        );
        assert!(
            row.rhat < 1.01,
            "criterion 2: {} has rhat {:.4}",
            row.name,
            row.rhat
        );
        assert!(
            row.ess > 400.0,
            "criterion 2: {} has ess {:.0}",
            row.name,
            row.ess
        );
    }

    let cfg = SamplerConfig {
        seed: 3,
        ..SamplerConfig::default()
    };
    let draws = nuts_sample(&BetaPosterior, &cfg).expect("beta posterior sampling");
    let pooled = draws.pooled(0);
    for (q, expected) in BETA35_QUANTILES {
        let got = quantile(&pooled, q);
        assert!(
            (got - expected).abs() <= 0.02,
            "criterion 2: Beta(3,5) quantile {q} came out {got:.4}, analytic value is {expected:.4}"
        );
    }
    println!(
        "criterion 2 (sampler oracle): PASS, 5-dim normal moments, rhat, ess, and Beta(3,5) quantiles within bounds"
    );
}

fn gradient_check_models() -> Vec<(&'static str, Box<dyn Model>)> {
    let mut rng = derive_rng(11, "acceptance/gradient-data");
    let algorithms: Vec<String> = ["alpha", "bravo", "casey"].map(String::from).to_vec();
    let benchmarks: Vec<String> = (1..=4).map(|k| format!("f{k}")).collect();

    let mut binomial_rows = Vec::new();
    for a in 0..3 {
        for b in 0..4 {
            for noise in [0.0, 3.0] {
                binomial_rows.push(BinomialRow {
                    algorithm: a,
                    benchmark: b,
                    noise,
                    trials: 20,
                    successes: rng.random_range(0..=20),
                });
            }
        }
    }
    let binomial = binomial_model(BinomialInput {
        algorithms: algorithms.clone(),
        benchmarks: benchmarks.clone(),
        rows: binomial_rows,
    })
    .expect("binomial input");

    fn pair_rows(ties: bool, rng: &mut impl Rng) -> Vec<PairRow> {
        let mut rows = Vec::new();
        for b in 0..4 {
            for (algo1, algo0) in [(1, 0), (2, 0), (2, 1)] {
                for _ in 0..3 {
                    let outcome = match rng.random_range(0..3) {
                        0 => PairOutcome::Algo0Wins,
                        1 => PairOutcome::Algo1Wins,
                        _ if ties => PairOutcome::Tie,
                        _ => PairOutcome::Algo1Wins,
                    };
                    rows.push(PairRow {
                        algo1,
                        algo0,
                        benchmark: b,
                        outcome,
                    });
                }
            }
        }
        rows
    }
    let bradley_terry = bradley_terry_model(PairInput {
        algorithms: algorithms.clone(),
        benchmarks: benchmarks.clone(),
        rows: pair_rows(false, &mut rng),
    })
    .expect("pair input");
    let davidson = davidson_model(PairInput {
        algorithms: algorithms.clone(),
        benchmarks: benchmarks.clone(),
        rows: pair_rows(true, &mut rng),
    })
    .expect("pair input with ties");

    let improvement_rows: Vec<RelativeImprovementRow> = (0..24)
        .map(|k| RelativeImprovementRow {
            algorithm: k % 3,
            benchmark: (k / 3) % 4,
            y: rng.random_range(-1.0..1.0),
        })
        .collect();
    let improvement = relative_improvement_model(RelativeImprovementInput {
        algorithms: algorithms.clone(),
        benchmarks: benchmarks.clone(),
        rows: improvement_rows,
    })
    .expect("improvement input");

    let survival_rows: Vec<SurvivalRow> = (0..24)
        .map(|k| {
            let event = k % 3 != 0;
            let y = if event { rng.random_range(0.1..2.4) } else { 2.5 };
            SurvivalRow {
                algorithm: k % 3,
                benchmark: (k / 3) % 4,
                noise: if k % 2 == 0 { 0.0 } else { 3.0 },
                y,
                event,
                censor_limit: 2.5,
            }
        })
        .collect();
    let cox = cox_model(SurvivalInput {
        algorithms: algorithms.clone(),
        benchmarks: benchmarks.clone(),
        rows: survival_rows,
    })
    .expect("survival input");

    let cpu_rows: Vec<CpuTimeRow> = (0..24)
        .map(|k| CpuTimeRow {
            algorithm: k % 3,
            benchmark: (k / 3) % 4,
            y: rng.random_range(0.5..3.0),
        })
        .collect();
    let student_t = student_t_model(CpuTimeInput {
        algorithms,
        benchmarks,
        rows: cpu_rows,
    })
    .expect("cpu time input");

    vec![
        ("binomial", Box::new(binomial) as Box<dyn Model>),
        ("bradley-terry", Box::new(bradley_terry)),
        ("davidson", Box::new(davidson)),
        ("relative-improvement", Box::new(improvement)),
        ("cox", Box::new(cox)),
        ("student-t", Box::new(student_t)),
    ]
}

#[test]
fn criterion_3_gradient_checks() {
    let mut rng = derive_rng(11, "acceptance/gradient-points");
    for (label, model) in gradient_check_models() {
        for point in 0..20 {
            let z: Vec<f64> = (0..model.dim())
                .map(|_| rng.random_range(-1.0..1.0))
                .collect();
            let (_, grad) = model.log_density_grad(&z);
            for i in 0..z.len() {
                let h = 1e-5 * (1.0 + z[i].abs());
                let mut zp = z.clone();
                zp[i] += h;
                let mut zm = z.clone();
                zm[i] -= h;
                let fd = (model.log_density_grad(&zp).0 - model.log_density_grad(&zm).0)
                    / (2.0 * h);
                let rel = (grad[i] - fd).abs() / grad[i].abs().max(fd.abs()).max(1.0);
                assert!(
                    rel < 1e-4,
                    "criterion 3: {label} point {point} coordinate {i}: analytic {} vs central difference {fd}, relative error {rel:.2e}",
                    grad[i]
                );
            }
        }
    }
    println!(
        "criterion 3 (gradient checks): PASS, six models match central differences at 20 points each"
    );
}

/// Sample the posterior and report, for each focal parameter, whether its 95%
/// HPD interval covers the simulation truth.
fn fit_and_cover(
    target: &dyn Target,
    truth: &[f64],
    focal: &[usize],
    seed: u64,
) -> Vec<(String, bool)> {
    let cfg = SamplerConfig {
        chains: 2,
        warmup: 300,
        draws: 500,
        seed,
        ..SamplerConfig::default()
    };
    let draws = nuts_sample(target, &cfg).expect("recovery fit");
    let names = target.names();
    focal
        .iter()
        .map(|&j| {
            let (lo, hi) = hpd_interval(&draws.pooled(j), 0.95).expect("hpd interval");
            (names[j].clone(), lo <= truth[j] && truth[j] <= hi)
        })
        .collect()
}

fn run_family(label: &str, family: impl Fn(u64) -> Vec<(String, bool)> + Send + Sync) -> usize {
    let per_rep: Vec<Vec<(String, bool)>> = (0..20u64).into_par_iter().map(family).collect();
    let mut min_cover = usize::MAX;
    for (j, (name, _)) in per_rep[0].iter().enumerate() {
        let count = per_rep
            .iter()
            .filter(|rep| {
                assert_eq!(&rep[j].0, name, "focal parameters must line up across runs");
                rep[j].1
            })
            .count();
        assert!(
            count >= 16,
            "criterion 4: {label} parameter {name} covered the truth in {count}/20 runs, need 16"
        );
        min_cover = min_cover.min(count);
    }
    min_cover
}

fn binomial_recovery(rep: u64) -> Vec<(String, bool)> {
    let algorithms: Vec<String> = ["alpha", "bravo", "casey", "delta"].map(String::from).to_vec();
    let benchmarks: Vec<String> = (1..=5).map(|k| format!("f{k}")).collect();
    let mut rows = Vec::new();
    for a in 0..4 {
        for b in 0..5 {
            for noise in [0.0, 3.0] {
                rows.push(BinomialRow {
                    algorithm: a,
                    benchmark: b,
                    noise,
                    trials: 25,
                    successes: 0,
                });
            }
        }
    }
    let template = binomial_model(BinomialInput {
        algorithms: algorithms.clone(),
        benchmarks: benchmarks.clone(),
        rows: rows.clone(),
    })
    .expect("binomial template");
    let mut rng = derive_rng(rep, "acceptance/recovery/binomial");
    let truth: Vec<f64> = template
        .names()
        .iter()
        .map(|n| match n.as_str() {
            "s" => 0.8,
            n if n.starts_with("a_bm_") => rng.random_range(-0.5..0.5),
            n if n.starts_with("b_noise_") => rng.random_range(-0.3..0.3),
            _ => rng.random_range(-1.0..1.0),
        })
        .collect();
    let responses = template
        .simulate(&truth, derive_seed(rep, "acceptance/recovery/binomial/data"))
        .expect("simulate");
    let Responses::Counts(counts) = responses else {
        panic!("binomial simulate must return counts")
    };
    for (row, c) in rows.iter_mut().zip(counts) {
        row.successes = c;
    }
    let refit = binomial_model(BinomialInput {
        algorithms,
        benchmarks,
        rows,
    })
    .expect("binomial refit");
    let focal: Vec<usize> = (0..8).collect();
    fit_and_cover(
        &refit,
        &truth,
        &focal,
        derive_seed(rep, "acceptance/recovery/binomial/fit"),
    )
}

fn contest_grid() -> (Vec<String>, Vec<String>, Vec<PairRow>) {
    let algorithms: Vec<String> = ["alpha", "bravo", "casey"].map(String::from).to_vec();
    let benchmarks: Vec<String> = (1..=5).map(|k| format!("f{k}")).collect();
    let mut rows = Vec::new();
    for b in 0..5 {
        for (algo1, algo0) in [(1usize, 0usize), (2, 0), (2, 1)] {
            for r in 0..35 {
                rows.push(PairRow {
                    algo1,
                    algo0,
                    benchmark: b,
                    outcome: if r % 2 == 0 {
                        PairOutcome::Algo1Wins
                    } else {
                        PairOutcome::Algo0Wins
                    },
                });
            }
        }
    }
    (algorithms, benchmarks, rows)
}

fn bradley_terry_recovery(rep: u64) -> Vec<(String, bool)> {
    let (algorithms, benchmarks, mut rows) = contest_grid();
    let template = bradley_terry_model(PairInput {
        algorithms: algorithms.clone(),
        benchmarks: benchmarks.clone(),
        rows: rows.clone(),
    })
    .expect("contest template");
    let mut rng = derive_rng(rep, "acceptance/recovery/bradley-terry");
    let truth: Vec<f64> = template
        .names()
        .iter()
        .map(|n| match n.as_str() {
            "s" => 0.5,
            n if n.starts_with("a_bm_") => rng.random_range(-0.5..0.5),
            _ => rng.random_range(-1.0..1.0),
        })
        .collect();
    let responses = template
        .simulate(
            &truth,
            derive_seed(rep, "acceptance/recovery/bradley-terry/data"),
        )
        .expect("simulate");
    let Responses::Outcomes(outcomes) = responses else {
        panic!("contest simulate must return outcomes")
    };
    for (row, o) in rows.iter_mut().zip(outcomes) {
        row.outcome = o;
    }
    let refit = bradley_terry_model(PairInput {
        algorithms,
        benchmarks,
        rows,
    })
    .expect("contest refit");
    fit_and_cover(
        &refit,
        &truth,
        &[0, 1, 2],
        derive_seed(rep, "acceptance/recovery/bradley-terry/fit"),
    )
}

fn davidson_recovery(rep: u64) -> Vec<(String, bool)> {
    let (algorithms, benchmarks, mut rows) = contest_grid();
    let template = davidson_model(PairInput {
        algorithms: algorithms.clone(),
        benchmarks: benchmarks.clone(),
        rows: rows.clone(),
    })
    .expect("tie template");
    let mut rng = derive_rng(rep, "acceptance/recovery/davidson");
    let truth: Vec<f64> = template
        .names()
        .iter()
        .map(|n| match n.as_str() {
            "s" => 0.5,
            "nu_tie" => rng.random_range(-1.0..-0.2),
            n if n.starts_with("a_bm_") => rng.random_range(-0.5..0.5),
            _ => rng.random_range(-1.0..1.0),
        })
        .collect();
    let responses = template
        .simulate(&truth, derive_seed(rep, "acceptance/recovery/davidson/data"))
        .expect("simulate");
    let Responses::Outcomes(outcomes) = responses else {
        panic!("tie simulate must return outcomes")
    };
    for (row, o) in rows.iter_mut().zip(outcomes) {
        row.outcome = o;
    }
    let refit = davidson_model(PairInput {
        algorithms,
        benchmarks,
        rows,
    })
    .expect("tie refit");
    let nu_index = template.dim() - 2;
    fit_and_cover(
        &refit,
        &truth,
        &[0, 1, 2, nu_index],
        derive_seed(rep, "acceptance/recovery/davidson/fit"),
    )
}

fn improvement_recovery(rep: u64) -> Vec<(String, bool)> {
    let algorithms: Vec<String> = ["alpha", "bravo", "casey", "delta"].map(String::from).to_vec();
    let benchmarks: Vec<String> = (1..=5).map(|k| format!("f{k}")).collect();
    let mut rows = Vec::new();
    for a in 0..4 {
        for b in 0..5 {
            for _ in 0..20 {
                rows.push(RelativeImprovementRow {
                    algorithm: a,
                    benchmark: b,
                    y: 0.0,
                });
            }
        }
    }
    let template = relative_improvement_model(RelativeImprovementInput {
        algorithms: algorithms.clone(),
        benchmarks: benchmarks.clone(),
        rows: rows.clone(),
    })
    .expect("improvement template");
    let mut rng = derive_rng(rep, "acceptance/recovery/improvement");
    let truth: Vec<f64> = template
        .names()
        .iter()
        .map(|n| match n.as_str() {
            "s" => 0.8,
            "sigma" => rng.random_range(0.3..0.8),
            n if n.starts_with("a_bm_") => rng.random_range(-0.5..0.5),
            _ => rng.random_range(-1.0..1.0),
        })
        .collect();
    let responses = template
        .simulate(
            &truth,
            derive_seed(rep, "acceptance/recovery/improvement/data"),
        )
        .expect("simulate");
    let Responses::Continuous(ys) = responses else {
        panic!("improvement simulate must return continuous responses")
    };
    for (row, y) in rows.iter_mut().zip(ys) {
        row.y = y;
    }
    let refit = relative_improvement_model(RelativeImprovementInput {
        algorithms,
        benchmarks,
        rows,
    })
    .expect("improvement refit");
    let focal: Vec<usize> = (0..4).collect();
    fit_and_cover(
        &refit,
        &truth,
        &focal,
        derive_seed(rep, "acceptance/recovery/improvement/fit"),
    )
}

fn cox_recovery(rep: u64, censored: &AtomicUsize, total: &AtomicUsize) -> Vec<(String, bool)> {
    let algorithms: Vec<String> = ["alpha", "bravo", "casey", "delta"].map(String::from).to_vec();
    let benchmarks: Vec<String> = (1..=5).map(|k| format!("f{k}")).collect();
    let mut rows = Vec::new();
    for a in 0..4 {
        for b in 0..5 {
            for noise in [0.0, 3.0] {
                for _ in 0..10 {
                    rows.push(SurvivalRow {
                        algorithm: a,
                        benchmark: b,
                        noise,
                        y: 0.5,
                        event: true,
                        censor_limit: 1.2,
                    });
                }
            }
        }
    }
    let template = cox_model(SurvivalInput {
        algorithms: algorithms.clone(),
        benchmarks: benchmarks.clone(),
        rows: rows.clone(),
    })
    .expect("survival template");
    let mut rng = derive_rng(rep, "acceptance/recovery/cox");
    let truth: Vec<f64> = template
        .names()
        .iter()
        .map(|n| match n.as_str() {
            "s" => 0.6,
            n if n.starts_with("a_bm_") => rng.random_range(-0.5..0.5),
            n if n.starts_with("b_noise_") => rng.random_range(-0.15..0.15),
            _ => rng.random_range(-0.5..0.5),
        })
        .collect();
    let responses = template
        .simulate(&truth, derive_seed(rep, "acceptance/recovery/cox/data"))
        .expect("simulate");
    let Responses::Survival(obs) = responses else {
        panic!("survival simulate must return event times")
    };
    censored.fetch_add(obs.iter().filter(|o| !o.event).count(), Ordering::Relaxed);
    total.fetch_add(obs.len(), Ordering::Relaxed);
    for (row, o) in rows.iter_mut().zip(obs) {
        row.y = o.y;
        row.event = o.event;
    }
    let refit = cox_model(SurvivalInput {
        algorithms,
        benchmarks,
        rows,
    })
    .expect("survival refit");
    let focal: Vec<usize> = (0..8).collect();
    fit_and_cover(
        &refit,
        &truth,
        &focal,
        derive_seed(rep, "acceptance/recovery/cox/fit"),
    )
}

fn student_t_recovery(rep: u64) -> Vec<(String, bool)> {
    let algorithms: Vec<String> = ["alpha", "bravo", "casey", "delta"].map(String::from).to_vec();
    let benchmarks: Vec<String> = (1..=5).map(|k| format!("f{k}")).collect();
    let mut rows = Vec::new();
    for a in 0..4 {
        for b in 0..5 {
            for _ in 0..20 {
                rows.push(CpuTimeRow {
                    algorithm: a,
                    benchmark: b,
                    y: 0.0,
                });
            }
        }
    }
    let template = student_t_model(CpuTimeInput {
        algorithms: algorithms.clone(),
        benchmarks: benchmarks.clone(),
        rows: rows.clone(),
    })
    .expect("cpu time template");
    let mut rng = derive_rng(rep, "acceptance/recovery/student-t");
    let truth: Vec<f64> = template
        .names()
        .iter()
        .map(|n| match n.as_str() {
            "s" => 0.6,
            "nu" => 10.0,
            n if n.starts_with("sigma_") => rng.random_range(0.3..0.8),
            n if n.starts_with("a_bm_") => rng.random_range(-0.5..0.5),
            _ => rng.random_range(-1.0..1.0),
        })
        .collect();
    let responses = template
        .simulate(
            &truth,
            derive_seed(rep, "acceptance/recovery/student-t/data"),
        )
        .expect("simulate");
    let Responses::Continuous(ys) = responses else {
        panic!("cpu time simulate must return continuous responses")
    };
    for (row, y) in rows.iter_mut().zip(ys) {
        row.y = y;
    }
    let refit = student_t_model(CpuTimeInput {
        algorithms,
        benchmarks,
        rows,
    })
    .expect("cpu time refit");
    let focal: Vec<usize> = (0..4).collect();
    fit_and_cover(
        &refit,
        &truth,
        &focal,
        derive_seed(rep, "acceptance/recovery/student-t/fit"),
    )
}

#[test]
fn criterion_4_parameter_recovery() {
    let censored = AtomicUsize::new(0);
    let total = AtomicUsize::new(0);
    let mins = [
        ("binomial", run_family("binomial", binomial_recovery)),
        (
            "bradley-terry",
            run_family("bradley-terry", bradley_terry_recovery),
        ),
        ("davidson", run_family("davidson", davidson_recovery)),
        (
            "relative-improvement",
            run_family("relative-improvement", improvement_recovery),
        ),
        (
            "cox",
            run_family("cox", |rep| cox_recovery(rep, &censored, &total)),
        ),
        ("student-t", run_family("student-t", student_t_recovery)),
    ];
    let censor_rate = censored.load(Ordering::Relaxed) as f64 / total.load(Ordering::Relaxed) as f64;
    assert!(
        (0.15..=0.45).contains(&censor_rate),
        "criterion 4: survival data should censor roughly 30% of rows, got {censor_rate:.2}"
    );
    let detail: Vec<String> = mins
        .iter()
        .map(|(label, min)| format!("{label} {min}/20"))
        .collect();
    println!(
        "criterion 4 (parameter recovery): PASS, minimum HPD coverage per model: {} (survival censoring {:.0}%)",
        detail.join(", "),
        100.0 * censor_rate
    );
}

#[test]
fn criterion_5_waic_and_tie_probabilities() {
    let loglik = vec![vec![0.5f64.ln()], vec![0.25f64.ln()]];
    let summary = waic(&loglik).expect("waic");
    let expected = 2.442_111_519_941_653_9;
    assert!(
        (summary.waic - expected).abs() <= 1e-9,
        "criterion 5: waic came out {:.12}, hand-computed value is {expected:.12}",
        summary.waic
    );

    let mut rng = derive_rng(5, "acceptance/tie-simplex");
    for k in 0..10_000 {
        let a0 = rng.random_range(-5.0..5.0);
        let a1 = rng.random_range(-5.0..5.0);
        let nu = rng.random_range(-5.0..5.0);
        let probs = davidson_probabilities(a0, a1, nu);
        let sum: f64 = probs.iter().sum();
        assert!(
            (sum - 1.0).abs() <= 1e-12,
            "criterion 5: triple {k} ({a0:.3}, {a1:.3}, {nu:.3}) has outcome probabilities summing to {sum:.15}"
        );
        assert!(
            probs.iter().all(|p| *p >= 0.0),
            "criterion 5: negative outcome probability at triple {k}"
        );
    }
    println!(
        "criterion 5 (waic and tie probabilities): PASS, waic matches to 1e-9 and 10^4 outcome triples sum to one"
    );
}

#[test]
fn criterion_6_hpd_intervals() {
    let mut rng = derive_rng(6, "acceptance/hpd-normal");
    let draws: Vec<f64> = (0..100_000).map(|_| standard_normal(&mut rng)).collect();
    let (lo, hi) = hpd_interval(&draws, 0.95).expect("hpd");
    assert!(
        (lo + 1.96).abs() <= 0.05 && (hi - 1.96).abs() <= 0.05,
        "criterion 6: 95% interval on 1e5 normal draws came out ({lo:.3}, {hi:.3})"
    );

    for k in 0..10u64 {
        let mut rng = derive_rng(k, "acceptance/hpd-skew");
        let sample: Vec<f64> = (0..2000)
            .map(|_| (0.8 * standard_normal(&mut rng)).exp())
            .collect();
        let (lo, hi) = hpd_interval(&sample, 0.95).expect("hpd");
        let mut sorted = sample.clone();
        sorted.sort_by(f64::total_cmp);
        let keep = (0.95 * sorted.len() as f64).ceil() as usize;
        let narrowest = (0..=sorted.len() - keep)
            .map(|i| sorted[i + keep - 1] - sorted[i])
            .fold(f64::INFINITY, f64::min);
        assert!(
            hi - lo <= narrowest + 1e-12,
            "criterion 6: sample {k}: scan found a window of width {narrowest:.6}, interval has width {:.6}",
            hi - lo
        );
        let inside = sample.iter().filter(|&&x| lo <= x && x <= hi).count();
        assert!(
            inside >= keep,
            "criterion 6: sample {k}: interval holds {inside} points, needs {keep}"
        );
    }
    println!(
        "criterion 6 (hpd intervals): PASS, normal interval near (-1.96, 1.96) and no shorter window on 10 skewed samples"
    );
}

fn posterior_mean(report: &FitReport, name: &str) -> f64 {
    report
        .rows
        .iter()
        .find(|r| r.parameter == name)
        .unwrap_or_else(|| panic!("no parameter named {name}"))
        .mean
}

#[test]
fn criterion_7_qualitative_reproduction() {
    let config = ExperimentConfig {
        algorithms: vec![
            AlgorithmId::DifferentialEvolution,
            AlgorithmId::Pso,
            AlgorithmId::CuckooSearch,
            AlgorithmId::Cmaes,
            AlgorithmId::SimulatedAnnealing,
            AlgorithmId::NelderMead,
        ],
        benchmarks: [
            "sphere6d",
            "bent_cigar6d",
            "schwefel221_6d",
            "schwefel223_6d",
            "discus2d",
            "zakharov2d",
            "salomon2d",
            "three_hump_camel2d",
        ]
        .map(String::from)
        .to_vec(),
        noise_levels: vec![0.0, 3.0],
        budgets_per_dim: vec![100, 1000],
        repetitions: 5,
        epsilons: vec![1.0, 0.1, 0.001],
        master_seed: 2026,
        timing: TimingMode::Deterministic,
    };
    let dataset = run_experiment(&config).expect("reduced experiment");
    assert_eq!(dataset.records.len(), 960);

    let mut spec = FitSpec::new(ModelKind::Binomial);
    spec.epsilon = Some(0.1);
    spec.seed = 7;
    let success = run_fit(&dataset, &spec).expect("success-rate fit");

    let mut spec = FitSpec::new(ModelKind::BradleyTerry);
    spec.filters = Filters::none().noise_levels(&[0.0]).budgets_per_dim(&[1000]);
    spec.seed = 7;
    let contests = run_fit(&dataset, &spec).expect("contest fit");

    for (label, report) in [("success model", &success), ("contest model", &contests)] {
        for strong in ["a_DifferentialEvolution", "a_PSO"] {
            for weak in ["a_SimulatedAnnealing", "a_NelderMead"] {
                let s = posterior_mean(report, strong);
                let w = posterior_mean(report, weak);
                assert!(
                    s > w,
                    "criterion 7: {label}: {strong} ({s:.2}) should beat {weak} ({w:.2})"
                );
            }
        }
    }

    let noise_slopes: Vec<_> = success
        .rows
        .iter()
        .filter(|r| r.parameter.starts_with("b_noise_"))
        .collect();
    assert_eq!(noise_slopes.len(), 6);
    for row in &noise_slopes {
        let or = row.ratio.expect("noise slopes carry an odds ratio");
        assert!(
            or < 1.0,
            "criterion 7: noise slope {} has odds ratio {or:.3}, expected below one",
            row.parameter
        );
    }
    println!(
        "criterion 7 (qualitative reproduction): PASS, DE and PSO beat SA and Nelder-Mead in both models ({} divergences tolerated), all 6 noise odds ratios below one",
        success.divergences + contests.divergences
    );
}

const PIPELINE_CONFIG: &str = r#"{
  "algorithms": ["DifferentialEvolution", "SimulatedAnnealing", "RandomSearch1"],
  "benchmarks": ["discus2d", "zakharov2d", "three_hump_camel2d"],
  "noise_levels": [0.0],
  "budgets_per_dim": [250],
  "repetitions": 10,
  "epsilons": [1.0, 0.1, 0.001],
  "master_seed": 31,
  "timing": "deterministic"
}"#;

fn pipeline(dir: &Path) {
    let run = |args: &[&str]| {
        let out = Command::new(env!("CARGO_BIN_EXE_bayesbench"))
            .args(args)
            .current_dir(dir)
            .env_remove("BAYESBENCH_SEED")
            .output()
            .expect("spawn bayesbench");
        assert!(
            out.status.success(),
            "criterion 8: {args:?} failed: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    };
    run(&["bench", "--config", "config.json", "--out", "data"]);
    run(&[
        "fit",
        "binomial",
        "data/runs.csv",
        "--out",
        "fit",
        "--epsilon",
        "0.1",
        "--chains",
        "2",
        "--warmup",
        "300",
        "--iters",
        "1600",
        "--seed",
        "5",
    ]);
    run(&["report", "fit", "--out", "report", "--seed", "9"]);
}

#[test]
fn criterion_8_end_to_end_determinism() {
    let tmp = TempDir::new().expect("tempdir");
    for sub in ["a", "b"] {
        let dir = tmp.path().join(sub);
        fs::create_dir(&dir).expect("subdir");
        fs::write(dir.join("config.json"), PIPELINE_CONFIG).expect("config");
        pipeline(&dir);
    }
    for artifact in [
        "data/runs.csv",
        "data/manifest.json",
        "fit/draws.csv",
        "fit/summary.md",
        "report/report.md",
    ] {
        let a = fs::read(tmp.path().join("a").join(artifact)).expect(artifact);
        let b = fs::read(tmp.path().join("b").join(artifact)).expect(artifact);
        assert_eq!(
            a, b,
            "criterion 8: {artifact} differs between identically seeded runs"
        );
    }
    println!(
        "criterion 8 (end-to-end determinism): PASS, bench, fit, and report artifacts byte-identical across reruns"
    );
}
