use serde::Serialize;

use crate::channel::STOCHASTIC_TOL;
use crate::error::{Error, Result};
use crate::info::binary_entropy;

/// Width of the Blahut-Arimoto capacity bracket at termination.
pub const BRACKET_TOL: f64 = 1e-10;
const MAX_BA_ITERS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DmcCapacity {
    /// Midpoint of the final bracket, in bits.
    pub capacity: f64,
    pub lower: f64,
    pub upper: f64,
    pub input: Vec<f64>,
    pub iterations: usize,
}

/// Capacity of a memoryless channel `w[x][y]` by Blahut-Arimoto.
///
/// Each round computes `D_x = D(W(.|x) || q)` for the current output law `q`;
/// `log2 sum_x p(x) 2^{D_x}` and `max_x D_x` bracket the capacity, and
/// `p(x) <- p(x) 2^{D_x}` (renormalized) is the update.
pub fn dmc_capacity(w: &[Vec<f64>]) -> Result<DmcCapacity> {
    let xs = w.len();
    let ys = w.first().map_or(0, Vec::len);
    if xs == 0 || ys == 0 || w.iter().any(|r| r.len() != ys) {
        return Err(Error::Dimension("DMC needs a non-empty rectangular table".into()));
    }
    for (x, row) in w.iter().enumerate() {
        let sum: f64 = row.iter().sum();
        if row.iter().any(|p| !(0.0..=1.0).contains(p)) || (sum - 1.0).abs() > STOCHASTIC_TOL {
            return Err(Error::NotStochastic { s_prev: 0, x, sum });
        }
    }

    let mut p = vec![1.0 / xs as f64; xs];
    let mut q = vec![0.0; ys];
    let mut d = vec![0.0; xs];
    let mut iterations = 0;
    loop {
        q.iter_mut().for_each(|v| *v = 0.0);
        for (px, row) in p.iter().zip(w) {
            for (qy, wy) in q.iter_mut().zip(row) {
                *qy += px * wy;
            }
        }
        for (dx, row) in d.iter_mut().zip(w) {
            *dx = row
                .iter()
                .zip(&q)
                .filter(|(&wy, _)| wy > 0.0)
                .map(|(&wy, &qy)| wy * (wy / qy).log2())
                .sum();
        }
        let z: f64 = p.iter().zip(&d).map(|(px, dx)| px * dx.exp2()).sum();
        let lower = z.log2();
        let upper = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if upper - lower < BRACKET_TOL || iterations >= MAX_BA_ITERS {
            return Ok(DmcCapacity {
                capacity: 0.5 * (lower + upper),
                lower,
                upper,
                input: p,
                iterations,
            });
        }
        for (px, dx) in p.iter_mut().zip(&d) {
            *px *= dx.exp2() / z;
        }
        iterations += 1;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZChannelOptimum {
    pub capacity: f64,
    /// `[p(0), p(1)]`.
    pub input: [f64; 2],
}

/// Closed form for the Z-channel that flips input 0 with probability `eps`:
/// capacity `log2(1 + 2^{-g})` with `g = H_2(eps) / (1 - eps)`, and
/// `p(0) = 1 / ((1 - eps)(1 + 2^g))`.
pub fn z_channel_closed_form(eps: f64) -> Result<ZChannelOptimum> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::Domain(format!("Z-channel crossover {eps} (needs 0 < eps < 1/2)")));
    }
    let g = binary_entropy(eps)? / (1.0 - eps);
    let p0 = 1.0 / ((1.0 - eps) * (1.0 + g.exp2()));
    Ok(ZChannelOptimum {
        capacity: (1.0 + (-g).exp2()).log2(),
        input: [p0, 1.0 - p0],
    })
}

pub fn z_channel(eps: f64) -> Vec<Vec<f64>> {
    vec![vec![1.0 - eps, eps], vec![0.0, 1.0]]
}
