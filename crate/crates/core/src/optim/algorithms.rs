//! The eight optimizer loops.
//!
//! Every driver runs until the evaluator refuses to spend another call, so a
//! run always uses its full budget. Candidate points are clamped into the
//! box before evaluation and before being stored back into algorithm state.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use statrs::function::gamma::gamma;

use crate::benchfns::BenchmarkFn;

use super::evaluator::Evaluator;

/// Spend one evaluation or end the driver once the budget is gone.
macro_rules! try_eval {
    ($ev:expr, $x:expr) => {
        match $ev.eval($x) {
            Some(v) => v,
            None => return,
        }
    };
}

fn uniform_point<R: Rng>(f: &BenchmarkFn, rng: &mut R) -> Vec<f64> {
    f.bounds()
        .iter()
        .map(|&(lo, hi)| rng.random_range(lo..=hi))
        .collect()
}

fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

pub(crate) struct PsoParams {
    pub c1: f64,
    pub c2: f64,
    pub w: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub pop: usize,
}

pub(crate) fn run_pso(p: &PsoParams, f: &BenchmarkFn, ev: &mut Evaluator, rng: &mut ChaCha8Rng) {
    let d = f.dimension();
    let mut xs: Vec<Vec<f64>> = (0..p.pop).map(|_| uniform_point(f, rng)).collect();
    let mut vs = vec![vec![0.0; d]; p.pop];
    let mut pbest = xs.clone();
    let mut pbest_val = vec![f64::INFINITY; p.pop];
    let mut gbest = xs[0].clone();
    let mut gbest_val = f64::INFINITY;
    for i in 0..p.pop {
        let v = try_eval!(ev, &xs[i]);
        pbest_val[i] = v;
        if v < gbest_val {
            gbest_val = v;
            gbest = xs[i].clone();
        }
    }
    loop {
        for i in 0..p.pop {
            for k in 0..d {
                let r1: f64 = rng.random();
                let r2: f64 = rng.random();
                let pull = p.c1 * r1 * (pbest[i][k] - xs[i][k]) + p.c2 * r2 * (gbest[k] - xs[i][k]);
                vs[i][k] = (p.w * vs[i][k] + pull).clamp(p.v_min, p.v_max);
                xs[i][k] += vs[i][k];
            }
            f.clamp(&mut xs[i]);
            let v = try_eval!(ev, &xs[i]);
            if v < pbest_val[i] {
                pbest_val[i] = v;
                pbest[i] = xs[i].clone();
            }
            if v < gbest_val {
                gbest_val = v;
                gbest = xs[i].clone();
            }
        }
    }
}

pub(crate) struct DeParams {
    pub weight: f64,
    pub cr: f64,
    pub pop: usize,
}

pub(crate) fn run_de(p: &DeParams, f: &BenchmarkFn, ev: &mut Evaluator, rng: &mut ChaCha8Rng) {
    let d = f.dimension();
    let mut xs: Vec<Vec<f64>> = (0..p.pop).map(|_| uniform_point(f, rng)).collect();
    let mut vals = vec![f64::INFINITY; p.pop];
    for i in 0..p.pop {
        vals[i] = try_eval!(ev, &xs[i]);
    }
    loop {
        for i in 0..p.pop {
            let mut picks = [0usize; 3];
            let mut taken = 0;
            while taken < 3 {
                let j = rng.random_range(0..p.pop);
                if j != i && !picks[..taken].contains(&j) {
                    picks[taken] = j;
                    taken += 1;
                }
            }
            let [r1, r2, r3] = picks;
            let j_rand = rng.random_range(0..d);
            let mut trial = xs[i].clone();
            for k in 0..d {
                if k == j_rand || rng.random::<f64>() < p.cr {
                    trial[k] = xs[r1][k] + p.weight * (xs[r2][k] - xs[r3][k]);
                }
            }
            f.clamp(&mut trial);
            let v = try_eval!(ev, &trial);
            if v <= vals[i] {
                xs[i] = trial;
                vals[i] = v;
            }
        }
    }
}

pub(crate) struct SaParams {
    pub delta: f64,
    pub t0: f64,
    pub delta_t: f64,
}

pub(crate) fn run_sa(p: &SaParams, f: &BenchmarkFn, ev: &mut Evaluator, rng: &mut ChaCha8Rng) {
    let mut x = uniform_point(f, rng);
    let mut fx = try_eval!(ev, &x);
    // Linear cooling: spread a total drop of delta_t * t0 across the run.
    let steps = ev.remaining().max(1);
    let dec = p.delta_t * p.t0 / steps as f64;
    let mut t = p.t0;
    loop {
        let mut cand = x.clone();
        for item in cand.iter_mut() {
            *item += rng.random_range(-p.delta..p.delta);
        }
        f.clamp(&mut cand);
        let fc = try_eval!(ev, &cand);
        if fc < fx || rng.random::<f64>() < ((fx - fc) / t).exp() {
            x = cand;
            fx = fc;
        }
        t = (t - dec).max(f64::MIN_POSITIVE);
    }
}

pub(crate) struct CuckooParams {
    pub p_a: f64,
    pub alpha: f64,
    pub pop: usize,
}

const LEVY_BETA: f64 = 1.5;

/// Scale of the numerator normal in Mantegna's algorithm for stable index
/// `LEVY_BETA`.
fn mantegna_sigma() -> f64 {
    let b = LEVY_BETA;
    let num = gamma(1.0 + b) * (std::f64::consts::PI * b / 2.0).sin();
    let den = gamma((1.0 + b) / 2.0) * b * 2f64.powf((b - 1.0) / 2.0);
    (num / den).powf(1.0 / b)
}

fn levy_step<R: Rng>(rng: &mut R, sigma_u: f64) -> f64 {
    let u = standard_normal(rng) * sigma_u;
    let v = standard_normal(rng);
    u / v.abs().powf(1.0 / LEVY_BETA)
}

pub(crate) fn run_cuckoo(
    p: &CuckooParams,
    f: &BenchmarkFn,
    ev: &mut Evaluator,
    rng: &mut ChaCha8Rng,
) {
    let sigma_u = mantegna_sigma();
    let mut nests: Vec<Vec<f64>> = (0..p.pop).map(|_| uniform_point(f, rng)).collect();
    let mut vals = vec![f64::INFINITY; p.pop];
    for i in 0..p.pop {
        vals[i] = try_eval!(ev, &nests[i]);
    }
    let n_abandon = ((p.p_a * p.pop as f64).ceil() as usize).min(p.pop);
    loop {
        for i in 0..p.pop {
            let mut cand = nests[i].clone();
            for item in cand.iter_mut() {
                *item += p.alpha * levy_step(rng, sigma_u);
            }
            f.clamp(&mut cand);
            let v = try_eval!(ev, &cand);
            let j = rng.random_range(0..p.pop);
            if v < vals[j] {
                nests[j] = cand;
                vals[j] = v;
            }
        }
        let mut order: Vec<usize> = (0..p.pop).collect();
        order.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]));
        for &i in order.iter().take(n_abandon) {
            let fresh = uniform_point(f, rng);
            let v = try_eval!(ev, &fresh);
            nests[i] = fresh;
            vals[i] = v;
        }
    }
}

pub(crate) struct NmParams {
    pub alpha: f64,
    pub gamma: f64,
    pub rho: f64,
    pub sigma: f64,
}

pub(crate) fn run_nelder_mead(
    p: &NmParams,
    f: &BenchmarkFn,
    ev: &mut Evaluator,
    rng: &mut ChaCha8Rng,
) {
    let d = f.dimension();
    let v0 = uniform_point(f, rng);
    let mut simplex = vec![v0.clone()];
    for k in 0..d {
        let (lo, hi) = f.bounds()[k];
        let step = 0.1 * (hi - lo);
        let mut v = v0.clone();
        v[k] = if v0[k] + step <= hi {
            v0[k] + step
        } else {
            v0[k] - step
        };
        simplex.push(v);
    }
    let mut vals = vec![f64::INFINITY; d + 1];
    for i in 0..=d {
        vals[i] = try_eval!(ev, &simplex[i]);
    }
    loop {
        let mut order: Vec<usize> = (0..=d).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        let best = order[0];
        let second_worst = order[d - 1];
        let worst = order[d];
        let worst_vertex = simplex[worst].clone();
        let mut centroid = vec![0.0; d];
        for &i in order.iter().take(d) {
            for k in 0..d {
                centroid[k] += simplex[i][k] / d as f64;
            }
        }
        let toward = |coef: f64| -> Vec<f64> {
            let mut v: Vec<f64> = (0..d)
                .map(|k| centroid[k] + coef * (centroid[k] - worst_vertex[k]))
                .collect();
            f.clamp(&mut v);
            v
        };
        let xr = toward(p.alpha);
        let fr = try_eval!(ev, &xr);
        if fr < vals[second_worst] && fr >= vals[best] {
            simplex[worst] = xr;
            vals[worst] = fr;
            continue;
        }
        if fr < vals[best] {
            let xe = toward(p.gamma);
            let fe = try_eval!(ev, &xe);
            if fe < fr {
                simplex[worst] = xe;
                vals[worst] = fe;
            } else {
                simplex[worst] = xr;
                vals[worst] = fr;
            }
            continue;
        }
        let xc = toward(p.rho);
        let fc = try_eval!(ev, &xc);
        if fc < vals[worst] {
            simplex[worst] = xc;
            vals[worst] = fc;
            continue;
        }
        let anchor = simplex[best].clone();
        for &i in order.iter().skip(1) {
            let mut v: Vec<f64> = (0..d)
                .map(|k| anchor[k] + p.sigma * (simplex[i][k] - anchor[k]))
                .collect();
            f.clamp(&mut v);
            vals[i] = try_eval!(ev, &v);
            simplex[i] = v;
        }
    }
}

/// Offspring count for the default CMA-ES population rule.
pub(crate) fn cmaes_lambda(d: usize) -> usize {
    4 + (3.0 * (d as f64).ln()).floor() as usize
}

pub(crate) fn run_cmaes(sigma0: f64, f: &BenchmarkFn, ev: &mut Evaluator, rng: &mut ChaCha8Rng) {
    let d = f.dimension();
    let dim = d as f64;
    let lambda = cmaes_lambda(d);
    let mu = lambda / 2;
    let raw: Vec<f64> = (0..mu)
        .map(|i| (mu as f64 + 0.5).ln() - ((i + 1) as f64).ln())
        .collect();
    let wsum: f64 = raw.iter().sum();
    let weights: Vec<f64> = raw.iter().map(|w| w / wsum).collect();
    let mueff = 1.0 / weights.iter().map(|w| w * w).sum::<f64>();
    let cc = (4.0 + mueff / dim) / (dim + 4.0 + 2.0 * mueff / dim);
    let cs = (mueff + 2.0) / (dim + mueff + 5.0);
    let c1 = 2.0 / ((dim + 1.3) * (dim + 1.3) + mueff);
    let cmu = (2.0 * (mueff - 2.0 + 1.0 / mueff) / ((dim + 2.0) * (dim + 2.0) + mueff))
        .min(1.0 - c1);
    let damps = 1.0 + 2.0 * ((mueff - 1.0) / (dim + 1.0)).sqrt().max(0.0) + cs;
    let chi_n = dim.sqrt() * (1.0 - 1.0 / (4.0 * dim) + 1.0 / (21.0 * dim * dim));

    let mut mean = DVector::from_vec(uniform_point(f, rng));
    let mut sigma = sigma0;
    let mut cov = DMatrix::<f64>::identity(d, d);
    let mut ps = DVector::<f64>::zeros(d);
    let mut pc = DVector::<f64>::zeros(d);
    let mut generation = 0i32;
    loop {
        let eig = cov.clone().symmetric_eigen();
        let scales = eig.eigenvalues.map(|e| e.max(1e-20).sqrt());
        let basis = eig.eigenvectors;
        let mut scored: Vec<(f64, DVector<f64>, DVector<f64>)> = Vec::with_capacity(lambda);
        for _ in 0..lambda {
            let z = DVector::from_fn(d, |_, _| standard_normal(rng));
            let y = &basis * z.component_mul(&scales);
            let mut x: Vec<f64> = (&mean + sigma * &y).iter().copied().collect();
            f.clamp(&mut x);
            // Use the clamped point in the update so the mean stays in play
            // near the boundary.
            let y_rep = (DVector::from_vec(x.clone()) - &mean) / sigma;
            let z_rep = (basis.transpose() * &y_rep).component_div(&scales);
            let val = match ev.eval(&x) {
                Some(v) => v,
                None => return,
            };
            scored.push((val, y_rep, z_rep));
        }
        generation += 1;
        scored.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut yw = DVector::<f64>::zeros(d);
        let mut zw = DVector::<f64>::zeros(d);
        for (w, (_, y, z)) in weights.iter().zip(&scored) {
            yw += *w * y;
            zw += *w * z;
        }
        mean += sigma * &yw;
        ps = (1.0 - cs) * &ps + (cs * (2.0 - cs) * mueff).sqrt() * (&basis * &zw);
        let ps_norm = ps.norm();
        let hsig = ps_norm / (1.0 - (1.0 - cs).powi(2 * generation)).sqrt() / chi_n
            < 1.4 + 2.0 / (dim + 1.0);
        let input = if hsig {
            (cc * (2.0 - cc) * mueff).sqrt()
        } else {
            0.0
        };
        pc = (1.0 - cc) * &pc + input * &yw;
        let mut rank_mu = DMatrix::<f64>::zeros(d, d);
        for (w, (_, y, _)) in weights.iter().zip(&scored) {
            rank_mu += *w * (y * y.transpose());
        }
        let stall = if hsig { 0.0 } else { cc * (2.0 - cc) };
        cov = (1.0 - c1 - cmu) * &cov + c1 * (&pc * pc.transpose() + stall * &cov) + cmu * rank_mu;
        sigma *= ((cs / damps) * (ps_norm / chi_n - 1.0)).exp();
        if !sigma.is_finite() || sigma <= 0.0 {
            sigma = sigma0;
        }
    }
}

pub(crate) fn run_random_search(f: &BenchmarkFn, ev: &mut Evaluator, rng: &mut ChaCha8Rng) {
    loop {
        let x = uniform_point(f, rng);
        if ev.eval(&x).is_none() {
            return;
        }
    }
}

/// Random search that reads every sampled point twice. The duplicate reading
/// only sharpens the value the algorithm would report under noise (the
/// better of the two); it changes nothing about which points get visited.
pub(crate) fn run_random_search_pairs(f: &BenchmarkFn, ev: &mut Evaluator, rng: &mut ChaCha8Rng) {
    loop {
        let x = uniform_point(f, rng);
        let Some(first) = ev.eval(&x) else { return };
        let Some(second) = ev.eval(&x) else { return };
        let _ = first.min(second);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;

    #[test]
    fn mantegna_scale_matches_published_constant() {
        // For a stable index of 1.5 the closed form evaluates to about 0.6966.
        assert_relative_eq!(mantegna_sigma(), 0.696_575, epsilon = 1e-5);
    }

    #[test]
    fn levy_steps_have_heavy_tails() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let sigma_u = mantegna_sigma();
        let n = 20_000;
        let steps: Vec<f64> = (0..n).map(|_| levy_step(&mut rng, sigma_u)).collect();
        let big = steps.iter().filter(|s| s.abs() > 10.0).count();
        let small = steps.iter().filter(|s| s.abs() < 1.0).count();
        // Most mass near zero but a real fraction of long jumps, unlike a
        // Gaussian where |step| > 10 would essentially never happen.
        assert!(small > n / 2, "small steps: {small}");
        assert!(big > n / 200, "big steps: {big}");
    }

    #[test]
    fn cmaes_population_rule() {
        assert_eq!(cmaes_lambda(2), 6);
        assert_eq!(cmaes_lambda(6), 9);
    }
}
