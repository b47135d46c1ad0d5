//! Multinomial no-U-turn transitions.
//!
//! One transition draws a momentum, then grows a binary tree of leapfrog
//! trajectories outward in random directions, doubling until the trajectory
//! turns back on itself or a leaf diverges. Candidate states are selected by
//! multinomial sampling with Boltzmann weights `exp(-(H - H0))`: unbiased
//! within a subtree, biased toward the newer subtree when merging into the
//! growing trajectory. Turning is detected with the generalized criterion on
//! the accumulated momentum sum, including the cross-checks between subtree
//! boundaries that guard against skipping over a U-turn.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::Target;
use crate::util::log_sum_exp2;

/// A leaf whose energy drifts from the initial energy by more than this is a
/// divergent transition.
pub const DIVERGENCE_THRESHOLD: f64 = 1000.0;

/// Position with cached log density and gradient.
#[derive(Debug, Clone)]
pub(crate) struct ChainState {
    pub z: Vec<f64>,
    pub logp: f64,
    pub grad: Vec<f64>,
}

/// Phase-space point during tree construction.
#[derive(Debug, Clone)]
struct PhasePoint {
    z: Vec<f64>,
    p: Vec<f64>,
    logp: f64,
    grad: Vec<f64>,
}

pub(crate) struct Hamiltonian<'a> {
    pub target: &'a dyn Target,
    /// Diagonal of the inverse mass matrix (estimated posterior variances).
    pub inv_mass: &'a [f64],
}

impl Hamiltonian<'_> {
    fn energy(&self, point: &PhasePoint) -> f64 {
        let kinetic: f64 = point
            .p
            .iter()
            .zip(self.inv_mass)
            .map(|(&p, &im)| 0.5 * im * p * p)
            .sum();
        -point.logp + kinetic
    }

    /// Momentum with the metric applied; the velocity `dz/dt`.
    fn p_sharp(&self, p: &[f64]) -> Vec<f64> {
        p.iter().zip(self.inv_mass).map(|(&p, &im)| im * p).collect()
    }

    pub(crate) fn draw_momentum(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        self.inv_mass
            .iter()
            .map(|&im| {
                let n: f64 = rng.sample(StandardNormal);
                n / im.sqrt()
            })
            .collect()
    }

    fn leapfrog(&self, from: &PhasePoint, eps: f64) -> PhasePoint {
        let half = 0.5 * eps;
        let p_half: Vec<f64> = from
            .p
            .iter()
            .zip(&from.grad)
            .map(|(&p, &g)| p + half * g)
            .collect();
        let z: Vec<f64> = from
            .z
            .iter()
            .zip(p_half.iter().zip(self.inv_mass))
            .map(|(&z, (&p, &im))| z + eps * im * p)
            .collect();
        let (mut logp, mut grad) = self.target.log_density_grad(&z);
        if !logp.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            logp = f64::NEG_INFINITY;
            grad.iter_mut().for_each(|g| *g = 0.0);
        }
        let p: Vec<f64> = p_half
            .iter()
            .zip(&grad)
            .map(|(&p, &g)| p + half * g)
            .collect();
        PhasePoint { z, p, logp, grad }
    }
}

fn uturn(p_sharp_beg: &[f64], p_sharp_end: &[f64], rho: &[f64]) -> bool {
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    dot(rho, p_sharp_beg) <= 0.0 || dot(rho, p_sharp_end) <= 0.0
}

fn vec_add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// Aggregates over all leapfrog steps of one transition.
#[derive(Debug, Default)]
struct TreeStats {
    n_leapfrog: usize,
    sum_accept: f64,
}

struct Subtree {
    /// Usable for continued doubling: no divergence, no internal U-turn.
    valid: bool,
    diverged: bool,
    /// Momentum at the leaf adjacent to the growth origin.
    inner_p: Vec<f64>,
    inner_p_sharp: Vec<f64>,
    /// Far end of the subtree; integration continues from here.
    outer: PhasePoint,
    outer_p_sharp: Vec<f64>,
    /// Sum of momenta over all leaves.
    rho: Vec<f64>,
    /// Multinomial-selected candidate within the subtree.
    proposal: ChainState,
    log_sum_w: f64,
}

#[allow(clippy::too_many_arguments)]
fn build_tree(
    ham: &Hamiltonian,
    depth: usize,
    from: &PhasePoint,
    dir: f64,
    eps: f64,
    h0: f64,
    rng: &mut ChaCha8Rng,
    stats: &mut TreeStats,
) -> Subtree {
    if depth == 0 {
        let next = ham.leapfrog(from, dir * eps);
        let h = ham.energy(&next);
        let delta_h = h - h0;
        let diverged = !delta_h.is_finite() || delta_h.abs() > DIVERGENCE_THRESHOLD;
        stats.n_leapfrog += 1;
        stats.sum_accept += if delta_h.is_finite() {
            (-delta_h).exp().min(1.0)
        } else {
            0.0
        };
        let p_sharp = ham.p_sharp(&next.p);
        return Subtree {
            valid: !diverged,
            diverged,
            inner_p: next.p.clone(),
            inner_p_sharp: p_sharp.clone(),
            rho: next.p.clone(),
            proposal: ChainState {
                z: next.z.clone(),
                logp: next.logp,
                grad: next.grad.clone(),
            },
            log_sum_w: if diverged { f64::NEG_INFINITY } else { -delta_h },
            outer: next,
            outer_p_sharp: p_sharp,
        };
    }

    let first = build_tree(ham, depth - 1, from, dir, eps, h0, rng, stats);
    if !first.valid {
        return first;
    }
    let second = build_tree(ham, depth - 1, &first.outer, dir, eps, h0, rng, stats);

    let log_sum_w = log_sum_exp2(first.log_sum_w, second.log_sum_w);
    let take_second = rng.random::<f64>() < (second.log_sum_w - log_sum_w).exp();
    let proposal = if take_second {
        second.proposal.clone()
    } else {
        first.proposal.clone()
    };

    let rho = vec_add(&first.rho, &second.rho);
    // Time-ordered boundary bookkeeping: when integrating backward, the
    // second-built subtree holds the earlier states.
    let turned = if dir > 0.0 {
        uturn(&first.inner_p_sharp, &second.outer_p_sharp, &rho)
            || uturn(
                &first.inner_p_sharp,
                &second.inner_p_sharp,
                &vec_add(&first.rho, &second.inner_p),
            )
            || uturn(
                &first.outer_p_sharp,
                &second.outer_p_sharp,
                &vec_add(&second.rho, &first.outer.p),
            )
    } else {
        uturn(&second.outer_p_sharp, &first.inner_p_sharp, &rho)
            || uturn(
                &second.outer_p_sharp,
                &first.outer_p_sharp,
                &vec_add(&second.rho, &first.outer.p),
            )
            || uturn(
                &second.inner_p_sharp,
                &first.inner_p_sharp,
                &vec_add(&first.rho, &second.inner_p),
            )
    };

    Subtree {
        valid: second.valid && !turned,
        diverged: first.diverged || second.diverged,
        inner_p: first.inner_p,
        inner_p_sharp: first.inner_p_sharp,
        outer: second.outer,
        outer_p_sharp: second.outer_p_sharp,
        rho,
        proposal,
        log_sum_w,
    }
}

/// Outcome of one NUTS transition.
pub(crate) struct Transition {
    pub state: ChainState,
    pub accept_stat: f64,
    pub diverged: bool,
    pub hit_max_depth: bool,
}

pub(crate) fn transition(
    ham: &Hamiltonian,
    current: &ChainState,
    eps: f64,
    max_depth: usize,
    rng: &mut ChaCha8Rng,
) -> Transition {
    let p0 = ham.draw_momentum(rng);
    let init = PhasePoint {
        z: current.z.clone(),
        p: p0,
        logp: current.logp,
        grad: current.grad.clone(),
    };
    let h0 = ham.energy(&init);
    let init_p_sharp = ham.p_sharp(&init.p);

    let mut fwd = init.clone();
    let mut bwd = init.clone();
    let mut ps_fwd = init_p_sharp.clone();
    let mut ps_bwd = init_p_sharp;
    let mut rho = init.p.clone();
    let mut proposal = current.clone();
    let mut log_sum_w = 0.0;
    let mut stats = TreeStats::default();
    let mut diverged = false;
    let mut hit_max_depth = true;

    for depth in 0..max_depth {
        let dir: f64 = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let from = if dir > 0.0 { &fwd } else { &bwd };
        let sub = build_tree(ham, depth, from, dir, eps, h0, rng, &mut stats);
        if sub.diverged {
            diverged = true;
        }
        if !sub.valid {
            hit_max_depth = false;
            break;
        }

        // Progressive multinomial selection, biased toward the new subtree.
        let p_take = (sub.log_sum_w - log_sum_w).exp().min(1.0);
        if rng.random::<f64>() < p_take {
            proposal = sub.proposal.clone();
        }
        log_sum_w = log_sum_exp2(log_sum_w, sub.log_sum_w);

        let rho_merged = vec_add(&rho, &sub.rho);
        let turned = if dir > 0.0 {
            uturn(&ps_bwd, &sub.outer_p_sharp, &rho_merged)
                || uturn(&ps_bwd, &sub.inner_p_sharp, &vec_add(&rho, &sub.inner_p))
                || uturn(&ps_fwd, &sub.outer_p_sharp, &vec_add(&sub.rho, &fwd.p))
        } else {
            uturn(&sub.outer_p_sharp, &ps_fwd, &rho_merged)
                || uturn(&sub.outer_p_sharp, &ps_bwd, &vec_add(&sub.rho, &bwd.p))
                || uturn(&sub.inner_p_sharp, &ps_fwd, &vec_add(&rho, &sub.inner_p))
        };

        rho = rho_merged;
        if dir > 0.0 {
            ps_fwd = sub.outer_p_sharp.clone();
            fwd = sub.outer;
        } else {
            ps_bwd = sub.outer_p_sharp.clone();
            bwd = sub.outer;
        }

        if turned {
            hit_max_depth = false;
            break;
        }
    }

    Transition {
        state: proposal,
        accept_stat: if stats.n_leapfrog > 0 {
            stats.sum_accept / stats.n_leapfrog as f64
        } else {
            0.0
        },
        diverged,
        hit_max_depth,
    }
}

/// Crude but robust initial step size: double or halve until the one-step
/// acceptance probability crosses one half.
pub(crate) fn find_reasonable_step_size(
    ham: &Hamiltonian,
    state: &ChainState,
    rng: &mut ChaCha8Rng,
) -> f64 {
    let mut eps = 1.0_f64;
    let p = ham.draw_momentum(rng);
    let init = PhasePoint {
        z: state.z.clone(),
        p,
        logp: state.logp,
        grad: state.grad.clone(),
    };
    let h0 = ham.energy(&init);
    let ratio = |eps: f64| -> f64 {
        let next = ham.leapfrog(&init, eps);
        let dh = h0 - ham.energy(&next);
        if dh.is_nan() {
            0.0
        } else {
            dh.exp()
        }
    };
    let up = ratio(eps) > 0.5;
    for _ in 0..100 {
        eps = if up { eps * 2.0 } else { eps * 0.5 };
        if !(1e-10..=1e6).contains(&eps) {
            break;
        }
        let r = ratio(eps);
        if (up && r <= 0.5) || (!up && r > 0.5) {
            break;
        }
    }
    eps.clamp(1e-10, 1e6)
}
