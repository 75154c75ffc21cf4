use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::info::{CausalKernel, KernelDirection};

/// Feedback encoder `p(x^N || y^{N-1})`: one input distribution per step and per
/// past `(x^{n-1}, y^{n-1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct CausalPolicy {
    kernel: CausalKernel,
}

impl CausalPolicy {
    pub fn from_kernel(kernel: CausalKernel) -> Result<Self> {
        if kernel.direction() != KernelDirection::InputsGivenPastOutputs {
            return Err(Error::Dimension("a policy must generate inputs".into()));
        }
        Ok(CausalPolicy { kernel })
    }

    pub fn from_fn(
        horizon: usize,
        x_size: usize,
        y_size: usize,
        dist: impl FnMut(usize, &[(usize, usize)], Option<usize>) -> Vec<f64>,
    ) -> Result<Self> {
        CausalKernel::from_fn(KernelDirection::InputsGivenPastOutputs, horizon, x_size, y_size, dist)
            .map(|kernel| CausalPolicy { kernel })
    }

    pub fn uniform(horizon: usize, x_size: usize, y_size: usize) -> Result<Self> {
        let u = vec![1.0 / x_size as f64; x_size];
        Self::iid(horizon, y_size, &u)
    }

    pub fn iid(horizon: usize, y_size: usize, p: &[f64]) -> Result<Self> {
        CausalKernel::iid_inputs(horizon, y_size, p).map(|kernel| CausalPolicy { kernel })
    }

    /// Every conditional drawn independently, uniform on the simplex.
    pub fn random(horizon: usize, x_size: usize, y_size: usize, rng: &mut impl Rng) -> Result<Self> {
        Self::from_fn(horizon, x_size, y_size, |_, _, _| {
            let e: Vec<f64> = (0..x_size).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
            let total: f64 = e.iter().sum();
            e.into_iter().map(|v| v / total).collect()
        })
    }

    /// Built from flat probabilities laid out step by step, history by history.
    pub(crate) fn from_flat(horizon: usize, x_size: usize, y_size: usize, flat: &[f64]) -> Result<Self> {
        let pair = x_size * y_size;
        let mut tables = Vec::with_capacity(horizon);
        let mut start = 0;
        for step in 0..horizon {
            let len = pair.pow(step as u32) * x_size;
            tables.push(flat[start..start + len].to_vec());
            start += len;
        }
        CausalKernel::new(KernelDirection::InputsGivenPastOutputs, horizon, x_size, y_size, tables)
            .map(|kernel| CausalPolicy { kernel })
    }

    pub(crate) fn flat(&self) -> Vec<f64> {
        self.kernel.tables().concat()
    }

    pub fn kernel(&self) -> &CausalKernel {
        &self.kernel
    }

    pub fn horizon(&self) -> usize {
        self.kernel.horizon()
    }

    pub fn x_size(&self) -> usize {
        self.kernel.x_size()
    }

    pub fn y_size(&self) -> usize {
        self.kernel.y_size()
    }

    /// Free parameters: `sum_n (|X||Y|)^{n-1} (|X| - 1)`.
    pub fn parameter_count(&self) -> usize {
        let pair = self.x_size() * self.y_size();
        (0..self.horizon())
            .map(|k| pair.pow(k as u32) * (self.x_size() - 1))
            .sum()
    }

    /// Input distribution after the given past `(x_i, y_i)` pairs.
    pub fn dist(&self, past: &[(usize, usize)]) -> &[f64] {
        let ys = self.y_size();
        let pair = self.x_size() * ys;
        let h = past.iter().fold(0, |acc, &(x, y)| acc * pair + x * ys + y);
        self.kernel.dist(past.len(), h)
    }

    /// Most likely input after a history; ties go to the lowest symbol.
    pub fn modal_input(&self, past: &[(usize, usize)]) -> usize {
        let d = self.dist(past);
        let mut best = 0;
        for (x, &p) in d.iter().enumerate() {
            if p > d[best] {
                best = x;
            }
        }
        best
    }

    /// Applies input and output relabelings `x -> x_map[x]`, `y -> y_map[y]`.
    pub fn relabel(&self, x_map: &[usize], y_map: &[usize]) -> Result<Self> {
        let (xs, ys) = (self.x_size(), self.y_size());
        let mut x_inv = vec![0; xs];
        let mut y_inv = vec![0; ys];
        for (a, &b) in x_map.iter().enumerate() {
            x_inv[b] = a;
        }
        for (a, &b) in y_map.iter().enumerate() {
            y_inv[b] = a;
        }
        Self::from_fn(self.horizon(), xs, ys, |_, past, _| {
            let orig: Vec<(usize, usize)> = past.iter().map(|&(x, y)| (x_inv[x], y_inv[y])).collect();
            let d = self.dist(&orig);
            (0..xs).map(|x| d[x_inv[x]]).collect()
        })
    }
}

/// On-disk form: `steps[k][history]` is the input distribution at step `k + 1`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolicyFile {
    pub horizon: usize,
    pub x_size: usize,
    pub y_size: usize,
    pub steps: Vec<Vec<Vec<f64>>>,
}

impl From<&CausalPolicy> for PolicyFile {
    fn from(p: &CausalPolicy) -> Self {
        PolicyFile {
            horizon: p.horizon(),
            x_size: p.x_size(),
            y_size: p.y_size(),
            steps: p
                .kernel
                .tables()
                .iter()
                .map(|t| t.chunks(p.x_size()).map(<[f64]>::to_vec).collect())
                .collect(),
        }
    }
}

impl TryFrom<PolicyFile> for CausalPolicy {
    type Error = Error;

    fn try_from(f: PolicyFile) -> Result<Self> {
        if f.steps.iter().flatten().any(|d| d.len() != f.x_size) {
            return Err(Error::Dimension("policy distribution of the wrong length".into()));
        }
        let tables = f.steps.into_iter().map(|s| s.concat()).collect();
        CausalKernel::new(KernelDirection::InputsGivenPastOutputs, f.horizon, f.x_size, f.y_size, tables)
            .map(|kernel| CausalPolicy { kernel })
    }
}
