//! Convergence diagnostics for multi-chain posterior draws: split R-hat and
//! autocorrelation-based effective sample size.

use crate::error::{Error, Result};
use crate::util::{mean, sample_var};

/// Split each chain in half, dropping the middle element of odd-length
/// chains, so within-chain drift registers as between-chain disagreement.
fn split_chains(chains: &[Vec<f64>]) -> Vec<&[f64]> {
    let mut halves = Vec::with_capacity(chains.len() * 2);
    for c in chains {
        let n = c.len();
        let half = n / 2;
        halves.push(&c[..half]);
        halves.push(&c[n - half..]);
    }
    halves
}

/// Potential scale reduction factor on split chains.
///
/// With between-chain variance `B` and mean within-chain variance `W` over
/// `m` split chains of length `n`, returns `sqrt(((n-1)/n * W + B/n) / W)`.
/// Identical chains therefore give `sqrt((n-1)/n)`, approaching one from
/// below as chains grow.
pub fn split_rhat(chains: &[Vec<f64>]) -> Result<f64> {
    if chains.len() < 2 {
        return Err(Error::validation("R-hat needs at least two chains"));
    }
    let halves = split_chains(chains);
    let n = halves[0].len();
    if n < 2 || halves.iter().any(|h| h.len() != n) {
        return Err(Error::validation(
            "R-hat needs equal-length chains with at least four draws",
        ));
    }
    let means: Vec<f64> = halves.iter().map(|h| mean(h)).collect();
    let w = mean(
        &halves
            .iter()
            .map(|h| sample_var(h))
            .collect::<Vec<f64>>(),
    );
    let b = n as f64 * sample_var(&means);
    if w == 0.0 {
        // Constant chains: identical constants are trivially converged,
        // distinct constants never mix.
        return Ok(if b == 0.0 { 1.0 } else { f64::INFINITY });
    }
    let var_plus = (n as f64 - 1.0) / n as f64 * w + b / n as f64;
    Ok((var_plus / w).sqrt())
}

/// Biased (1/n) autocovariance of `x` at `lag`, against the chain mean.
fn autocovariance(x: &[f64], chain_mean: f64, lag: usize) -> f64 {
    let n = x.len();
    if lag >= n {
        return 0.0;
    }
    let mut acc = 0.0;
    for t in 0..(n - lag) {
        acc += (x[t] - chain_mean) * (x[t + lag] - chain_mean);
    }
    acc / n as f64
}

/// Effective sample size from combined-chain autocorrelations.
///
/// Autocorrelations are estimated per chain, combined through the pooled
/// variance estimate, summed in Geyer pairs until the first non-positive
/// pair, with the monotone initial-sequence adjustment. The result is capped
/// at the total number of draws.
pub fn ess(chains: &[Vec<f64>]) -> Result<f64> {
    let m = chains.len();
    if m == 0 {
        return Err(Error::validation("ESS needs at least one chain"));
    }
    let n = chains[0].len();
    if n < 4 || chains.iter().any(|c| c.len() != n) {
        return Err(Error::validation(
            "ESS needs equal-length chains with at least four draws",
        ));
    }
    let total = (m * n) as f64;
    let chain_means: Vec<f64> = chains.iter().map(|c| mean(c)).collect();
    let chain_vars: Vec<f64> = chains.iter().map(|c| sample_var(c)).collect();
    let w = mean(&chain_vars);
    if w == 0.0 {
        return Ok(total);
    }
    let b_over_n = if m > 1 { sample_var(&chain_means) } else { 0.0 };
    let var_plus = (n as f64 - 1.0) / n as f64 * w + b_over_n;

    let rho = |lag: usize| -> f64 {
        let mean_acov = chains
            .iter()
            .zip(&chain_means)
            .map(|(c, &cm)| autocovariance(c, cm, lag))
            .sum::<f64>()
            / m as f64;
        1.0 - (w - mean_acov) / var_plus
    };

    let rho0 = rho(0);
    let max_pairs = (n - 2) / 2;
    let mut sum_pairs = 0.0;
    let mut prev_pair = f64::INFINITY;
    for k in 0..max_pairs {
        let pair = rho(2 * k) + rho(2 * k + 1);
        if pair <= 0.0 {
            break;
        }
        let pair = pair.min(prev_pair);
        prev_pair = pair;
        sum_pairs += pair;
    }
    let tau = (1.0 - 2.0 * rho0 + 2.0 * sum_pairs).max(1.0 / total);
    Ok((total / tau).min(total))
}
