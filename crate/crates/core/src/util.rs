//! Small numeric helpers used throughout the crate.

/// log(exp(a) + exp(b)) without overflow.
pub fn log_sum_exp2(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// log(sum(exp(xs))) without overflow; empty input yields -inf.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY || m.is_nan() {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// log(1 + exp(x)), stable for large |x|.
pub fn log1p_exp(x: f64) -> f64 {
    if x > 33.0 {
        x
    } else if x < -33.0 {
        x.exp()
    } else {
        x.exp().ln_1p()
    }
}

/// Logistic function 1 / (1 + exp(-x)).
pub fn inv_logit(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Arithmetic mean; empty input yields NaN.
pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance (n - 1 denominator); fewer than two values yield NaN.
pub fn sample_var(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return f64::NAN;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64
}

/// Standard deviation from [`sample_var`].
pub fn sample_sd(xs: &[f64]) -> f64 {
    sample_var(xs).sqrt()
}

/// Quantile of `sorted` (ascending) by linear interpolation between order
/// statistics, matching the common "type 7" definition.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty slice");
    assert!((0.0..=1.0).contains(&q), "quantile level out of [0, 1]");
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = q * (n - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Quantile of an unsorted sample; sorts a copy.
pub fn quantile(xs: &[f64], q: f64) -> f64 {
    let mut ys = xs.to_vec();
    ys.sort_by(f64::total_cmp);
    quantile_sorted(&ys, q)
}
