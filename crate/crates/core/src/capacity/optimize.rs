use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::objective::{softmax_into, RateTree};
use super::policy::CausalPolicy;
use crate::channel::UnifilarChannel;
use crate::error::{Error, Result};
use crate::info::{causal_product, directed_information};

/// Optimizer knobs; also readable from the `settings` block of a channel file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerSettings {
    pub restarts: usize,
    pub max_iters: usize,
    /// Stop once the rate improves by less than this over `plateau_window` iterations.
    pub tol: f64,
    pub plateau_window: usize,
    /// Stop once the max-norm of the rate gradient falls below this.
    pub grad_tol: f64,
    pub seed: u64,
    /// Horizon guard: `(|X||Y|)^N` may not exceed this (4096 allows N = 6 on binary alphabets).
    pub max_leaves: usize,
    /// Step for the finite-difference check of the gradient at the returned policy.
    pub fd_step: f64,
    /// Skip the finite-difference check above this many parameters.
    pub fd_max_params: usize,
    pub parallel: bool,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        OptimizerSettings {
            restarts: 8,
            max_iters: 20_000,
            tol: 1e-10,
            plateau_window: 50,
            grad_tol: 1e-8,
            seed: 0,
            max_leaves: 4096,
            fd_step: 1e-6,
            fd_max_params: 6000,
            parallel: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    Fixed(usize),
    MinOver,
    MaxOver,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizerDiagnostics {
    pub restarts: usize,
    pub best_restart: usize,
    pub iterations: Vec<usize>,
    /// Max-norm of the rate gradient (softmax coordinates) at the returned policy.
    pub final_gradient_norm: f64,
    /// Max deviation between analytic and central-difference gradients at the returned policy.
    pub fd_max_error: Option<f64>,
    /// Rate of the uniform iid policy.
    pub baseline: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacityEstimate {
    /// Bits per channel use: `(1/N) I(X^N -> Y^N | s_0)` at the best policy found.
    pub value: f64,
    pub horizon: usize,
    pub initial_state: InitialState,
    /// `false` flags a best-found value whose restart hit the iteration cap.
    pub converged: bool,
    pub diagnostics: OptimizerDiagnostics,
    #[serde(skip)]
    pub policy: CausalPolicy,
}

fn guard(u: &UnifilarChannel, horizon: usize, max_leaves: usize) -> Result<()> {
    if horizon == 0 {
        return Err(Error::Domain("horizon 0".into()));
    }
    let needed = ((u.x_size() * u.y_size()) as u128).saturating_pow(horizon as u32);
    if needed > max_leaves as u128 {
        return Err(Error::Resource {
            what: "history tree",
            needed,
            limit: max_leaves as u128,
        });
    }
    Ok(())
}

fn check_policy(u: &UnifilarChannel, s0: usize, policy: &CausalPolicy) -> Result<()> {
    if s0 >= u.s_size() {
        return Err(Error::Index {
            what: "initial state",
            index: s0,
            size: u.s_size(),
        });
    }
    if (policy.x_size(), policy.y_size()) != (u.x_size(), u.y_size()) {
        return Err(Error::Dimension(format!(
            "policy alphabets {}x{} vs channel {}x{}",
            policy.x_size(),
            policy.y_size(),
            u.x_size(),
            u.y_size()
        )));
    }
    Ok(())
}

/// `(1/N) I(X^N -> Y^N | s_0)` from the dense joint law of `(x^N, y^N)`.
pub fn evaluate_rate(u: &UnifilarChannel, s0: usize, policy: &CausalPolicy) -> Result<f64> {
    check_policy(u, s0, policy)?;
    let n = policy.horizon();
    let joint = causal_product(policy.kernel(), &u.compose().output_kernel(s0, n)?)?;
    Ok(directed_information(&joint, n)? / n as f64)
}

/// Same quantity on the history tree, without materializing the joint law.
pub fn tree_rate(u: &UnifilarChannel, s0: usize, policy: &CausalPolicy) -> Result<f64> {
    check_policy(u, s0, policy)?;
    let n = policy.horizon();
    Ok(RateTree::new(u, s0, n).value(&policy.flat()) / n as f64)
}

struct RestartOutcome {
    rate: f64,
    theta: Vec<f64>,
    iterations: usize,
    converged: bool,
}

/// Mirror ascent on the softmax parameters: each node moves along
/// `Q(h, x) - V(h)`, which is the gradient rescaled by `1 / (P(h) pi(x|h))` and
/// therefore an ascent direction. Step sizes adapt by backtracking.
fn ascend(tree: &RateTree, mut theta: Vec<f64>, cfg: &OptimizerSettings) -> RestartOutcome {
    let (xs, n) = (tree.x_size(), tree.horizon() as f64);
    let mut probs = vec![0.0; theta.len()];
    softmax_into(&theta, xs, &mut probs);
    let mut sweep = tree.sweep(&probs);
    let mut history = vec![sweep.value / n];
    let mut step = std::f64::consts::LN_2;
    let mut trial = theta.clone();
    let mut trial_probs = probs.clone();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < cfg.max_iters {
        let grad_norm = sweep.grad.iter().fold(0.0f64, |m, g| m.max(g.abs())) / n;
        if grad_norm < cfg.grad_tol {
            converged = true;
            break;
        }
        let current = sweep.value;
        let mut accepted = false;
        while step > 1e-14 {
            for ((t, th), d) in trial.iter_mut().zip(&theta).zip(&sweep.direction) {
                *t = th + step * d;
            }
            softmax_into(&trial, xs, &mut trial_probs);
            if tree.value(&trial_probs) >= current {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            converged = true;
            break;
        }
        std::mem::swap(&mut theta, &mut trial);
        std::mem::swap(&mut probs, &mut trial_probs);
        step = (step * 1.5).min(1e3);
        sweep = tree.sweep(&probs);
        iterations += 1;
        history.push(sweep.value / n);
        if iterations >= cfg.plateau_window {
            let then = history[iterations - cfg.plateau_window];
            if sweep.value / n - then < cfg.tol {
                converged = true;
                break;
            }
        }
    }
    RestartOutcome {
        rate: sweep.value / n,
        theta,
        iterations,
        converged,
    }
}

fn initial_theta(len: usize, seed: u64, restart: usize) -> Vec<f64> {
    if restart == 0 {
        return vec![0.0; len];
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    (0..len).map(|_| rng.gen_range(-2.0..2.0)).collect()
}

/// Largest |analytic - central difference| over all softmax parameters, in rate units.
pub(crate) fn gradient_check(tree: &RateTree, theta: &[f64], h: f64) -> f64 {
    let xs = tree.x_size();
    let n = tree.horizon() as f64;
    let mut probs = vec![0.0; theta.len()];
    softmax_into(theta, xs, &mut probs);
    let analytic = tree.sweep(&probs).grad;
    let mut scratch = theta.to_vec();
    let mut worst = 0.0f64;
    for i in 0..theta.len() {
        scratch[i] = theta[i] + h;
        softmax_into(&scratch, xs, &mut probs);
        let up = tree.value(&probs);
        scratch[i] = theta[i] - h;
        softmax_into(&scratch, xs, &mut probs);
        let down = tree.value(&probs);
        scratch[i] = theta[i];
        worst = worst.max(((up - down) / (2.0 * h) - analytic[i]).abs() / n);
    }
    worst
}

/// Multi-start maximization of `(1/N) I(X^N -> Y^N | s_0)` over causal policies.
///
/// Restart 0 starts from the uniform iid policy and only ever ascends, so the
/// result is never below that baseline.
pub fn optimize_rate(
    u: &UnifilarChannel,
    s0: usize,
    horizon: usize,
    cfg: &OptimizerSettings,
) -> Result<CapacityEstimate> {
    guard(u, horizon, cfg.max_leaves)?;
    if s0 >= u.s_size() {
        return Err(Error::Index {
            what: "initial state",
            index: s0,
            size: u.s_size(),
        });
    }
    let tree = RateTree::new(u, s0, horizon);
    let len = tree.param_len();
    let restarts = cfg.restarts.max(1);
    let run = |r: usize| ascend(&tree, initial_theta(len, cfg.seed, r), cfg);
    let outcomes: Vec<RestartOutcome> = if cfg.parallel {
        (0..restarts).into_par_iter().map(run).collect()
    } else {
        (0..restarts).map(run).collect()
    };
    let mut best = 0;
    for (i, o) in outcomes.iter().enumerate() {
        if o.rate > outcomes[best].rate {
            best = i;
        }
    }
    let winner = &outcomes[best];
    let mut probs = vec![0.0; len];
    softmax_into(&winner.theta, u.x_size(), &mut probs);
    let final_gradient_norm = tree.sweep(&probs).grad.iter().fold(0.0f64, |m, g| m.max(g.abs())) / horizon as f64;
    let fd_max_error = (len <= cfg.fd_max_params).then(|| gradient_check(&tree, &winner.theta, cfg.fd_step));
    let baseline_policy = CausalPolicy::uniform(horizon, u.x_size(), u.y_size())?;
    let baseline = tree.value(&baseline_policy.flat()) / horizon as f64;
    Ok(CapacityEstimate {
        value: winner.rate,
        horizon,
        initial_state: InitialState::Fixed(s0),
        converged: winner.converged,
        diagnostics: OptimizerDiagnostics {
            restarts,
            best_restart: best,
            iterations: outcomes.iter().map(|o| o.iterations).collect(),
            final_gradient_norm,
            fd_max_error,
            baseline,
        },
        policy: CausalPolicy::from_flat(horizon, u.x_size(), u.y_size(), &probs)?,
    })
}

/// Per-initial-state maxima and their extremes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacityBracket {
    pub horizon: usize,
    pub per_state: Vec<CapacityEstimate>,
    pub min: f64,
    pub max: f64,
    pub argmin_state: usize,
    pub argmax_state: usize,
    /// Always `true`: `min` is the minimum of per-state maxima, which upper-bounds
    /// the max-min lower capacity at this horizon rather than solving it.
    pub min_is_upper_bound_on_max_min: bool,
}

impl CapacityBracket {
    pub fn gap(&self) -> f64 {
        self.max - self.min
    }

    pub fn min_estimate(&self) -> CapacityEstimate {
        let mut e = self.per_state[self.argmin_state].clone();
        e.initial_state = InitialState::MinOver;
        e
    }

    pub fn max_estimate(&self) -> CapacityEstimate {
        let mut e = self.per_state[self.argmax_state].clone();
        e.initial_state = InitialState::MaxOver;
        e
    }
}

pub fn finite_n_bracket(u: &UnifilarChannel, horizon: usize, cfg: &OptimizerSettings) -> Result<CapacityBracket> {
    let per_state = (0..u.s_size())
        .map(|s0| optimize_rate(u, s0, horizon, cfg))
        .collect::<Result<Vec<_>>>()?;
    let (mut argmin, mut argmax) = (0, 0);
    for (s, e) in per_state.iter().enumerate() {
        if e.value < per_state[argmin].value {
            argmin = s;
        }
        if e.value > per_state[argmax].value {
            argmax = s;
        }
    }
    Ok(CapacityBracket {
        horizon,
        min: per_state[argmin].value,
        max: per_state[argmax].value,
        argmin_state: argmin,
        argmax_state: argmax,
        per_state,
        min_is_upper_bound_on_max_min: true,
    })
}
