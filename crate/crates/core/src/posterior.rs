//! Interval estimates and derived summaries computed from posterior draws.
//!
//! All functions here operate on flat sample vectors (one parameter, all
//! chains pooled) so they are equally usable on raw draws and on draw-wise
//! transformed quantities.

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::derive_rng;
use crate::util::{mean, quantile_sorted};

/// Minimum sample count accepted by the interval estimators.
pub const MIN_INTERVAL_SAMPLES: usize = 100;

fn check_interval_input(samples: &[f64], mass: f64) -> Result<()> {
    if samples.len() < MIN_INTERVAL_SAMPLES {
        return Err(Error::validation(format!(
            "interval estimate needs at least {MIN_INTERVAL_SAMPLES} samples, got {}",
            samples.len()
        )));
    }
    if !(mass > 0.0 && mass < 1.0) {
        return Err(Error::validation(format!(
            "interval mass must lie in (0, 1), got {mass}"
        )));
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(Error::validation("interval estimate on non-finite samples"));
    }
    Ok(())
}

/// Highest posterior density interval: the shortest contiguous window of
/// sorted samples containing `ceil(mass * n)` of them. Ties in width resolve
/// to the leftmost window.
pub fn hpd_interval(samples: &[f64], mass: f64) -> Result<(f64, f64)> {
    check_interval_input(samples, mass)?;
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let k = ((mass * n as f64).ceil() as usize).clamp(1, n);
    let mut best = (sorted[0], sorted[k - 1]);
    let mut best_width = best.1 - best.0;
    for i in 1..=(n - k) {
        let width = sorted[i + k - 1] - sorted[i];
        if width < best_width {
            best_width = width;
            best = (sorted[i], sorted[i + k - 1]);
        }
    }
    Ok(best)
}

/// Central interval with equal tail probabilities outside it.
pub fn equal_tail_interval(samples: &[f64], mass: f64) -> Result<(f64, f64)> {
    check_interval_input(samples, mass)?;
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let tail = (1.0 - mass) / 2.0;
    Ok((
        quantile_sorted(&sorted, tail),
        quantile_sorted(&sorted, 1.0 - tail),
    ))
}

/// Posterior mean and HPD bounds of a draw-wise transformed quantity.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformSummary {
    pub mean: f64,
    pub hpd_low: f64,
    pub hpd_high: f64,
}

fn map_summary(samples: &[f64], mass: f64, f: impl Fn(f64) -> f64) -> Result<TransformSummary> {
    let mapped: Vec<f64> = samples.iter().map(|&x| f(x)).collect();
    let (lo, hi) = hpd_interval(&mapped, mass)?;
    Ok(TransformSummary {
        mean: mean(&mapped),
        hpd_low: lo,
        hpd_high: hi,
    })
}

/// Odds ratio (equivalently hazard ratio or baseline hazard) from draws of a
/// log-odds/log-hazard parameter: `exp` applied draw-wise, then summarized.
pub fn odds_ratio_summary(log_odds_draws: &[f64], mass: f64) -> Result<TransformSummary> {
    map_summary(log_odds_draws, mass, f64::exp)
}

/// Expected event time from draws of a log-rate parameter: `1 / exp(x)`
/// applied draw-wise, then summarized.
pub fn expected_time_summary(log_rate_draws: &[f64], mass: f64) -> Result<TransformSummary> {
    map_summary(log_rate_draws, mass, |x| (-x).exp())
}

/// Differences between two parameters' posteriors, resampled draw-paired.
///
/// Both inputs must come from the same fit (equal length); each resample
/// picks one draw index and takes `a[i] - b[i]`, so swapping the arguments
/// negates the output exactly under the same seed.
pub fn group_difference(a: &[f64], b: &[f64], n_samples: usize, seed: u64) -> Result<Vec<f64>> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::validation(format!(
            "group difference needs equally many draws from one fit, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    if n_samples == 0 {
        return Err(Error::validation("group difference needs n_samples > 0"));
    }
    let mut rng = derive_rng(seed, "posterior/group_difference");
    Ok((0..n_samples)
        .map(|_| {
            let i = rng.random_range(0..a.len());
            a[i] - b[i]
        })
        .collect())
}

/// Decision label from comparing an HPD interval to a region of practical
/// equivalence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RopeDecision {
    /// Practically all of the HPD interval lies inside the ROPE.
    AcceptNegligible,
    /// The HPD interval lies entirely above the ROPE.
    RejectAbove,
    /// The HPD interval lies entirely below the ROPE.
    RejectBelow,
    /// The HPD interval straddles a ROPE boundary.
    Undecided,
}

impl RopeDecision {
    pub fn label(self) -> &'static str {
        match self {
            RopeDecision::AcceptNegligible => "accept-negligible",
            RopeDecision::RejectAbove => "reject-above",
            RopeDecision::RejectBelow => "reject-below",
            RopeDecision::Undecided => "undecided",
        }
    }
}

/// ROPE comparison: fraction of the HPD interval's length inside the region,
/// plus the resulting decision.
#[derive(Debug, Clone, PartialEq)]
pub struct RopeSummary {
    pub hpd_low: f64,
    pub hpd_high: f64,
    pub fraction_in_rope: f64,
    pub decision: RopeDecision,
}

/// Fraction of decision mass required for [`RopeDecision::AcceptNegligible`].
pub const ROPE_ACCEPT_FRACTION: f64 = 0.95;

/// Compare the `mass`-HPD interval of `samples` against the ROPE
/// `(rope_low, rope_high)`.
pub fn rope_summary(
    samples: &[f64],
    rope_low: f64,
    rope_high: f64,
    mass: f64,
) -> Result<RopeSummary> {
    if !(rope_low < rope_high) {
        return Err(Error::validation(format!(
            "ROPE bounds must satisfy low < high, got ({rope_low}, {rope_high})"
        )));
    }
    let (lo, hi) = hpd_interval(samples, mass)?;
    let overlap = (hi.min(rope_high) - lo.max(rope_low)).max(0.0);
    let width = hi - lo;
    let fraction = if width > 0.0 {
        overlap / width
    } else if (rope_low..=rope_high).contains(&lo) {
        1.0
    } else {
        0.0
    };
    let decision = if fraction >= ROPE_ACCEPT_FRACTION {
        RopeDecision::AcceptNegligible
    } else if lo >= rope_high {
        RopeDecision::RejectAbove
    } else if hi <= rope_low {
        RopeDecision::RejectBelow
    } else {
        RopeDecision::Undecided
    };
    Ok(RopeSummary {
        hpd_low: lo,
        hpd_high: hi,
        fraction_in_rope: fraction,
        decision,
    })
}

/// Posterior over competition ranks (rank 1 = strongest).
#[derive(Debug, Clone)]
pub struct RankSummary {
    pub labels: Vec<String>,
    /// `rank_probs[i][r]` is the probability that entry `i` holds rank `r + 1`.
    pub rank_probs: Vec<Vec<f64>>,
    pub median_rank: Vec<f64>,
    pub rank_variance: Vec<f64>,
}

/// Sample the posterior rank distribution of strength parameters.
///
/// Each of `n_samples` samples picks one posterior draw uniformly and, when
/// per-benchmark effects are supplied, one benchmark uniformly; entries are
/// then ranked by strength (plus that benchmark's effect) in descending
/// order. Ranks are reported 1-based.
pub fn rank_posterior(
    labels: &[String],
    strength_draws: &[Vec<f64>],
    bm_effect_draws: Option<&[Vec<Vec<f64>>]>,
    n_samples: usize,
    seed: u64,
) -> Result<RankSummary> {
    let k = labels.len();
    if k == 0 || strength_draws.len() != k {
        return Err(Error::validation(
            "rank posterior needs one strength draw vector per label",
        ));
    }
    let n_draws = strength_draws[0].len();
    if n_draws == 0 || strength_draws.iter().any(|d| d.len() != n_draws) {
        return Err(Error::validation(
            "rank posterior needs equally many draws per label",
        ));
    }
    let n_bms = match bm_effect_draws {
        Some(effects) => {
            if effects.len() != k || effects.is_empty() || effects[0].is_empty() {
                return Err(Error::validation(
                    "benchmark effects must be indexed [label][benchmark][draw]",
                ));
            }
            let j = effects[0].len();
            for per_label in effects {
                if per_label.len() != j || per_label.iter().any(|d| d.len() != n_draws) {
                    return Err(Error::validation(
                        "benchmark effect draws must align with strength draws",
                    ));
                }
            }
            j
        }
        None => 0,
    };
    if n_samples == 0 {
        return Err(Error::validation("rank posterior needs n_samples > 0"));
    }

    let mut rng = derive_rng(seed, "posterior/rank");
    let mut counts = vec![vec![0u64; k]; k];
    let mut ranks_seen = vec![Vec::with_capacity(n_samples); k];
    let mut order: Vec<usize> = (0..k).collect();
    for _ in 0..n_samples {
        let d = rng.random_range(0..n_draws);
        let j = if n_bms > 0 {
            rng.random_range(0..n_bms)
        } else {
            0
        };
        let strength = |i: usize| {
            strength_draws[i][d]
                + bm_effect_draws
                    .map(|effects| effects[i][j][d])
                    .unwrap_or(0.0)
        };
        order.sort_by(|&a, &b| strength(b).total_cmp(&strength(a)));
        for (rank0, &i) in order.iter().enumerate() {
            counts[i][rank0] += 1;
            ranks_seen[i].push((rank0 + 1) as f64);
        }
    }

    let rank_probs: Vec<Vec<f64>> = counts
        .iter()
        .map(|row| row.iter().map(|&c| c as f64 / n_samples as f64).collect())
        .collect();
    let median_rank: Vec<f64> = ranks_seen.iter().map(|r| crate::util::quantile(r, 0.5)).collect();
    let rank_variance: Vec<f64> = ranks_seen
        .iter()
        .map(|r| {
            let m = mean(r);
            r.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / r.len() as f64
        })
        .collect();
    Ok(RankSummary {
        labels: labels.to_vec(),
        rank_probs,
        median_rank,
        rank_variance,
    })
}
