use super::{JointLaw, MAX_JOINT_ENTRIES};
use crate::channel::FiniteStateChannel;
use crate::error::{Error, Result};

const KERNEL_TOL: f64 = 1e-12;

/// Which sequence a causal kernel generates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelDirection {
    /// `p(x^N || y^{N-1}) = prod_n p(x_n | x^{n-1}, y^{n-1})`: an encoder with feedback.
    InputsGivenPastOutputs,
    /// `p(y^N || x^N) = prod_n p(y_n | x^n, y^{n-1})`: a channel.
    OutputsGivenInputs,
}

/// Per-step conditional tables of a causally conditioned law.
///
/// Histories are encoded as base-`|X||Y|` numbers whose digits are the pairs
/// `x_i * |Y| + y_i`, oldest first. For outputs-given-inputs kernels the
/// current input is appended as a final base-`|X|` digit.
#[derive(Debug, Clone, PartialEq)]
pub struct CausalKernel {
    horizon: usize,
    direction: KernelDirection,
    x_size: usize,
    y_size: usize,
    tables: Vec<Vec<f64>>,
}

impl CausalKernel {
    pub fn new(
        direction: KernelDirection,
        horizon: usize,
        x_size: usize,
        y_size: usize,
        tables: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if horizon == 0 || x_size == 0 || y_size == 0 {
            return Err(Error::Domain("causal kernel with an empty horizon or alphabet".into()));
        }
        if tables.len() != horizon {
            return Err(Error::Dimension(format!("{} step tables for horizon {horizon}", tables.len())));
        }
        let kernel = CausalKernel {
            horizon,
            direction,
            x_size,
            y_size,
            tables,
        };
        let z = kernel.target_size();
        for (step, table) in kernel.tables.iter().enumerate() {
            let expected = kernel.contexts(step) * z;
            if table.len() != expected {
                return Err(Error::Dimension(format!(
                    "step {} table has {} entries, expected {expected}",
                    step + 1,
                    table.len()
                )));
            }
            for (ctx, dist) in table.chunks(z).enumerate() {
                let sum: f64 = dist.iter().sum();
                if dist.iter().any(|p| !(p.is_finite() && *p >= -KERNEL_TOL)) || (sum - 1.0).abs() > KERNEL_TOL {
                    return Err(Error::Contract(format!(
                        "step {} context {ctx}: conditional sums to {sum}",
                        step + 1
                    )));
                }
            }
        }
        Ok(kernel)
    }

    /// Builds a kernel from a closure that receives the 0-based step, the past
    /// `(x_i, y_i)` pairs and (for channel kernels) the current input.
    pub fn from_fn(
        direction: KernelDirection,
        horizon: usize,
        x_size: usize,
        y_size: usize,
        mut dist: impl FnMut(usize, &[(usize, usize)], Option<usize>) -> Vec<f64>,
    ) -> Result<Self> {
        let pair = x_size * y_size;
        let mut tables = Vec::with_capacity(horizon);
        let mut past = Vec::with_capacity(horizon);
        for step in 0..horizon {
            let mut table = Vec::new();
            for h in 0..pair.pow(step as u32) {
                past.clear();
                let mut rest = h;
                for _ in 0..step {
                    let d = rest % pair;
                    past.push((d / y_size, d % y_size));
                    rest /= pair;
                }
                past.reverse();
                match direction {
                    KernelDirection::InputsGivenPastOutputs => table.extend(dist(step, &past, None)),
                    KernelDirection::OutputsGivenInputs => {
                        for x in 0..x_size {
                            table.extend(dist(step, &past, Some(x)));
                        }
                    }
                }
            }
            tables.push(table);
        }
        Self::new(direction, horizon, x_size, y_size, tables)
    }

    /// Inputs drawn iid from `p`, ignoring feedback.
    pub fn iid_inputs(horizon: usize, y_size: usize, p: &[f64]) -> Result<Self> {
        Self::from_fn(
            KernelDirection::InputsGivenPastOutputs,
            horizon,
            p.len(),
            y_size,
            |_, _, _| p.to_vec(),
        )
    }

    /// A memoryless channel `w[x][y]` used at every step.
    pub fn memoryless_channel(horizon: usize, w: &[Vec<f64>]) -> Result<Self> {
        let y_size = w.first().map_or(0, Vec::len);
        Self::from_fn(KernelDirection::OutputsGivenInputs, horizon, w.len(), y_size, |_, _, x| {
            w[x.unwrap_or(0)].clone()
        })
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn direction(&self) -> KernelDirection {
        self.direction
    }

    pub fn x_size(&self) -> usize {
        self.x_size
    }

    pub fn y_size(&self) -> usize {
        self.y_size
    }

    /// Size of the alphabet the kernel generates.
    pub fn target_size(&self) -> usize {
        match self.direction {
            KernelDirection::InputsGivenPastOutputs => self.x_size,
            KernelDirection::OutputsGivenInputs => self.y_size,
        }
    }

    /// Number of conditioning contexts at a 0-based step.
    pub fn contexts(&self, step: usize) -> usize {
        let hist = (self.x_size * self.y_size).pow(step as u32);
        match self.direction {
            KernelDirection::InputsGivenPastOutputs => hist,
            KernelDirection::OutputsGivenInputs => hist * self.x_size,
        }
    }

    pub fn tables(&self) -> &[Vec<f64>] {
        &self.tables
    }

    /// Conditional distribution at a 0-based step for an encoded context.
    pub fn dist(&self, step: usize, context: usize) -> &[f64] {
        let z = self.target_size();
        &self.tables[step][context * z..(context + 1) * z]
    }

    fn shape_matches(&self, other: &Self) -> bool {
        (self.horizon, self.x_size, self.y_size) == (other.horizon, other.x_size, other.y_size)
    }
}

/// `p(x^N, y^N) = p(x^N || y^{N-1}) p(y^N || x^N)`, laid out with axes `x_1..x_N, y_1..y_N`.
pub fn causal_product(inputs: &CausalKernel, channel: &CausalKernel) -> Result<JointLaw> {
    if inputs.direction != KernelDirection::InputsGivenPastOutputs
        || channel.direction != KernelDirection::OutputsGivenInputs
    {
        return Err(Error::Dimension(
            "causal product needs an input kernel and a channel kernel".into(),
        ));
    }
    if !inputs.shape_matches(channel) {
        return Err(Error::Dimension(format!(
            "kernel shapes differ: horizon {} vs {}, alphabets {}x{} vs {}x{}",
            inputs.horizon, channel.horizon, inputs.x_size, inputs.y_size, channel.x_size, channel.y_size
        )));
    }
    let (n, xs, ys) = (inputs.horizon, inputs.x_size, inputs.y_size);
    let entries = (xs * ys).checked_pow(n as u32).filter(|&e| e <= MAX_JOINT_ENTRIES);
    let entries = entries.ok_or(Error::Resource {
        what: "dense joint law",
        needed: ((xs * ys) as u128).saturating_pow(n as u32),
        limit: MAX_JOINT_ENTRIES as u128,
    })?;
    let mut table = vec![0.0; entries];
    let y_block = ys.pow(n as u32);
    fill_product(inputs, channel, 0, 0, 0, 0, 1.0, y_block, &mut table);
    let mut dims = vec![xs; n];
    dims.extend(std::iter::repeat_n(ys, n));
    JointLaw::new(dims, table)
}

#[allow(clippy::too_many_arguments)]
fn fill_product(
    inputs: &CausalKernel,
    channel: &CausalKernel,
    step: usize,
    hist: usize,
    x_idx: usize,
    y_idx: usize,
    mass: f64,
    y_block: usize,
    out: &mut [f64],
) {
    let (xs, ys) = (inputs.x_size, inputs.y_size);
    let px = inputs.dist(step, hist);
    for x in 0..xs {
        let mx = mass * px[x];
        let py = channel.dist(step, hist * xs + x);
        for y in 0..ys {
            let m = mx * py[y];
            if step + 1 == inputs.horizon {
                out[(x_idx * xs + x) * y_block + y_idx * ys + y] = m;
            } else {
                fill_product(
                    inputs,
                    channel,
                    step + 1,
                    hist * xs * ys + x * ys + y,
                    x_idx * xs + x,
                    y_idx * ys + y,
                    m,
                    y_block,
                    out,
                );
            }
        }
    }
}

impl FiniteStateChannel {
    /// `p(y^N || x^N | s_0)` by filtering the state belief along each history.
    ///
    /// Histories of probability zero get the uniform output distribution; they
    /// carry no mass in any joint law built from this kernel.
    pub fn output_kernel(&self, s0: usize, horizon: usize) -> Result<CausalKernel> {
        self.state_alphabet().check("initial state", s0)?;
        if horizon == 0 {
            return Err(Error::Domain("horizon 0".into()));
        }
        let (xs, ys, ss) = (self.x_size(), self.y_size(), self.s_size());
        let needed = ((xs * ys) as u128).saturating_pow(horizon as u32);
        if needed > MAX_JOINT_ENTRIES as u128 {
            return Err(Error::Resource {
                what: "channel kernel",
                needed,
                limit: MAX_JOINT_ENTRIES as u128,
            });
        }
        let mut tables: Vec<Vec<f64>> = (0..horizon)
            .map(|k| vec![0.0; (xs * ys).pow(k as u32) * xs * ys])
            .collect();
        let mut belief = vec![0.0; ss];
        belief[s0] = 1.0;
        self.fill_kernel(&belief, 0, 0, &mut tables);
        CausalKernel::new(KernelDirection::OutputsGivenInputs, horizon, xs, ys, tables)
    }

    fn fill_kernel(&self, belief: &[f64], step: usize, hist: usize, tables: &mut [Vec<f64>]) {
        let (xs, ys, ss) = (self.x_size(), self.y_size(), self.s_size());
        for x in 0..xs {
            // joint[y][s] = sum_{s'} b(s') P(y, s | x, s')
            let mut joint = vec![0.0; ys * ss];
            for (sp, &b) in belief.iter().enumerate() {
                if b > 0.0 {
                    for (j, &l) in joint.iter_mut().zip(self.row(sp, x)) {
                        *j += b * l;
                    }
                }
            }
            let base = (hist * xs + x) * ys;
            for y in 0..ys {
                let block = &joint[y * ss..(y + 1) * ss];
                let py: f64 = block.iter().sum();
                tables[step][base + y] = py;
                if step + 1 < tables.len() {
                    let next: Vec<f64> = if py > 0.0 {
                        block.iter().map(|v| v / py).collect()
                    } else {
                        belief.to_vec()
                    };
                    self.fill_kernel(&next, step + 1, hist * xs * ys + x * ys + y, tables);
                }
            }
            let row = &mut tables[step][base..base + ys];
            let total: f64 = row.iter().sum();
            if total > 0.0 {
                row.iter_mut().for_each(|v| *v /= total);
            } else {
                row.iter_mut().for_each(|v| *v = 1.0 / ys as f64);
            }
        }
    }
}
