//! Exact `I(X^N -> Y^N | s_0)` on the history tree of a unifilar channel and its
//! gradient with respect to per-node softmax parameters.
//!
//! Because the state is a function of `(s_0, x^n, y^n)`, the directed information is
//!
//! ```text
//! H(Y^N) - sum_n E[ H(W(. | X_n, S_{n-1})) ]
//! ```
//!
//! which needs only the output-sequence law `q(y^N)` and the expected per-step
//! row entropies. The reverse pass carries, for each history node `h`, the
//! conditional value `V(h)` of the objective's derivative below it; the softmax
//! gradient at node `h` is `P(h) pi(x|h) (Q(h, x) - V(h))`.

use crate::channel::UnifilarChannel;
use crate::info::entropy;

pub(crate) struct RateTree<'a> {
    channel: &'a UnifilarChannel,
    s0: usize,
    horizon: usize,
    xs: usize,
    ys: usize,
    /// First node of each step; node `offsets[k] + h` owns `probs[node * X .. node * X + X]`.
    offsets: Vec<usize>,
    /// `H(W(. | x, s'))`, indexed `s' * X + x`.
    row_entropy: Vec<f64>,
}

/// Outputs of one forward-and-reverse sweep.
pub(crate) struct Sweep {
    /// Directed information in bits (not normalized by the horizon).
    pub value: f64,
    /// Gradient of the directed information in softmax coordinates.
    pub grad: Vec<f64>,
    /// `Q(h, x) - V(h)` at nodes of positive probability, zero elsewhere.
    pub direction: Vec<f64>,
}

impl<'a> RateTree<'a> {
    pub fn new(channel: &'a UnifilarChannel, s0: usize, horizon: usize) -> Self {
        let (xs, ys) = (channel.x_size(), channel.y_size());
        let pair = xs * ys;
        let mut offsets = Vec::with_capacity(horizon + 1);
        let mut total = 0;
        for k in 0..=horizon {
            offsets.push(total);
            total += pair.pow(k as u32);
        }
        let row_entropy = (0..channel.s_size())
            .flat_map(|s| (0..xs).map(move |x| (s, x)))
            .map(|(s, x)| entropy(channel.row(s, x)))
            .collect();
        RateTree {
            channel,
            s0,
            horizon,
            xs,
            ys,
            offsets,
            row_entropy,
        }
    }

    pub fn param_len(&self) -> usize {
        self.offsets[self.horizon] * self.xs
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn x_size(&self) -> usize {
        self.xs
    }

    fn node(&self, step: usize, hist: usize) -> usize {
        self.offsets[step] + hist
    }

    /// Output-sequence law and expected conditional entropy.
    fn forward(&self, probs: &[f64]) -> (Vec<f64>, f64) {
        let mut q = vec![0.0; self.ys.pow(self.horizon as u32)];
        let mut cost = 0.0;
        self.forward_node(probs, 0, 0, self.s0, 1.0, 0, &mut q, &mut cost);
        (q, cost)
    }

    #[allow(clippy::too_many_arguments)]
    fn forward_node(
        &self,
        probs: &[f64],
        step: usize,
        hist: usize,
        s: usize,
        mass: f64,
        y_idx: usize,
        q: &mut [f64],
        cost: &mut f64,
    ) {
        let base = self.node(step, hist) * self.xs;
        for x in 0..self.xs {
            let mx = mass * probs[base + x];
            if mx == 0.0 {
                continue;
            }
            *cost += mx * self.row_entropy[s * self.xs + x];
            for (y, &w) in self.channel.row(s, x).iter().enumerate() {
                if w == 0.0 {
                    continue;
                }
                let child = y_idx * self.ys + y;
                if step + 1 == self.horizon {
                    q[child] += mx * w;
                } else {
                    let next = self.channel.next_state(s, x, y);
                    let h = (hist * self.xs + x) * self.ys + y;
                    self.forward_node(probs, step + 1, h, next, mx * w, child, q, cost);
                }
            }
        }
    }

    pub fn value(&self, probs: &[f64]) -> f64 {
        let (q, cost) = self.forward(probs);
        entropy(&q) - cost
    }

    pub fn sweep(&self, probs: &[f64]) -> Sweep {
        let (q, cost) = self.forward(probs);
        let value = entropy(&q) - cost;
        let leaf: Vec<f64> = q.iter().map(|&p| if p > 0.0 { -p.log2() } else { 0.0 }).collect();
        let mut grad = vec![0.0; probs.len()];
        let mut direction = vec![0.0; probs.len()];
        self.reverse_node(probs, &leaf, 0, 0, self.s0, 1.0, 0, &mut grad, &mut direction);
        Sweep {
            value,
            grad,
            direction,
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn reverse_node(
        &self,
        probs: &[f64],
        leaf: &[f64],
        step: usize,
        hist: usize,
        s: usize,
        mass: f64,
        y_idx: usize,
        grad: &mut [f64],
        direction: &mut [f64],
    ) -> f64 {
        let base = self.node(step, hist) * self.xs;
        let mut qx = vec![0.0; self.xs];
        for (x, qv) in qx.iter_mut().enumerate() {
            let mut acc = -self.row_entropy[s * self.xs + x];
            let child_mass = mass * probs[base + x];
            for (y, &w) in self.channel.row(s, x).iter().enumerate() {
                if w == 0.0 {
                    continue;
                }
                let child = y_idx * self.ys + y;
                let v = if step + 1 == self.horizon {
                    leaf[child]
                } else {
                    let next = self.channel.next_state(s, x, y);
                    let h = (hist * self.xs + x) * self.ys + y;
                    self.reverse_node(probs, leaf, step + 1, h, next, child_mass * w, child, grad, direction)
                };
                acc += w * v;
            }
            *qv = acc;
        }
        let v: f64 = qx.iter().zip(&probs[base..base + self.xs]).map(|(q, p)| q * p).sum();
        if mass > 0.0 {
            for x in 0..self.xs {
                let adv = qx[x] - v;
                grad[base + x] = mass * probs[base + x] * adv;
                direction[base + x] = adv;
            }
        }
        v
    }
}

/// Per-node softmax of free parameters.
pub(crate) fn softmax_into(theta: &[f64], xs: usize, out: &mut [f64]) {
    for (t, o) in theta.chunks(xs).zip(out.chunks_mut(xs)) {
        let m = t.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut z = 0.0;
        for (ti, oi) in t.iter().zip(o.iter_mut()) {
            *oi = (ti - m).exp();
            z += *oi;
        }
        o.iter_mut().for_each(|v| *v /= z);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capacity::CausalPolicy;
    use crate::info::{causal_product, directed_information};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn channel() -> UnifilarChannel {
        const F: [[[usize; 2]; 2]; 2] = [[[0, 1], [1, 0]], [[1, 1], [0, 1]]];
        let w = [[[0.9, 0.1], [0.2, 0.8]], [[0.75, 0.25], [0.0, 1.0]]];
        UnifilarChannel::from_fn(2, 2, 2, |s, x, y| w[s][x][y], |s, x, y| F[s][x][y]).unwrap()
    }

    #[test]
    fn tree_value_matches_dense_joint() {
        let u = channel();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..=4 {
            for s0 in 0..2 {
                let p = CausalPolicy::random(n, 2, 2, &mut rng).unwrap();
                let tree = RateTree::new(&u, s0, n);
                let joint = causal_product(p.kernel(), &u.compose().output_kernel(s0, n).unwrap()).unwrap();
                let dense = directed_information(&joint, n).unwrap();
                assert!((tree.value(&p.flat()) - dense).abs() < 1e-12, "n={n} s0={s0}");
            }
        }
    }

    #[test]
    fn analytic_gradient_matches_central_differences() {
        let u = channel();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 3;
        let tree = RateTree::new(&u, 1, n);
        let theta: Vec<f64> = (0..tree.param_len()).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let mut probs = vec![0.0; theta.len()];
        softmax_into(&theta, 2, &mut probs);
        let sweep = tree.sweep(&probs);
        let h = 1e-6;
        let mut scratch = theta.clone();
        for i in 0..theta.len() {
            scratch[i] = theta[i] + h;
            softmax_into(&scratch, 2, &mut probs);
            let up = tree.value(&probs);
            scratch[i] = theta[i] - h;
            softmax_into(&scratch, 2, &mut probs);
            let down = tree.value(&probs);
            scratch[i] = theta[i];
            let fd = (up - down) / (2.0 * h);
            assert!((fd - sweep.grad[i]).abs() < 1e-7, "param {i}: {fd} vs {}", sweep.grad[i]);
        }
    }
}
