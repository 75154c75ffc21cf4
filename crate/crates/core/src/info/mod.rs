//! Exact entropic quantities over dense finite joint laws.
//!
//! All logarithms are base 2. Terms with zero probability contribute zero.

mod directed;
mod kernel;

pub use directed::{directed_information, directed_information_routes, single_letter_bound_check, DirectedRoutes, SingleLetterCheck};
pub use kernel::{causal_product, CausalKernel, KernelDirection};

use crate::error::{Error, Result};

/// Normalization tolerance for joint laws.
pub const JOINT_TOL: f64 = 1e-10;
/// Largest dense joint table accepted (`4^10`, i.e. horizon 10 on binary alphabets).
pub const MAX_JOINT_ENTRIES: usize = 1 << 20;

/// `p log2 (1/p)` with the `0 log 0 = 0` convention.
#[inline]
pub(crate) fn surprisal_term(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}

/// Shannon entropy in bits of a (possibly unnormalized) nonnegative vector.
pub fn entropy(dist: &[f64]) -> f64 {
    dist.iter().map(|&p| surprisal_term(p)).sum()
}

/// `H_2(p) = -p log2 p - (1-p) log2 (1-p)`.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("binary entropy argument {p}")));
    }
    Ok(surprisal_term(p) + surprisal_term(1.0 - p))
}

/// `I(X;Y)` for input distribution `p` and channel rows `w[x][y]`.
pub fn mutual_information(p: &[f64], w: &[Vec<f64>]) -> f64 {
    let ys = w.first().map_or(0, Vec::len);
    let mut q = vec![0.0; ys];
    for (px, row) in p.iter().zip(w) {
        for (qy, wy) in q.iter_mut().zip(row) {
            *qy += px * wy;
        }
    }
    entropy(&q) - p.iter().zip(w).map(|(px, row)| px * entropy(row)).sum::<f64>()
}

/// Dense probability table over a product of finite alphabets, last axis fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct JointLaw {
    dims: Vec<usize>,
    table: Vec<f64>,
}

impl JointLaw {
    pub fn new(dims: Vec<usize>, table: Vec<f64>) -> Result<Self> {
        let expected = dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d));
        match expected {
            Some(len) if len == table.len() && dims.iter().all(|&d| d > 0) => {}
            _ => {
                return Err(Error::Dimension(format!(
                    "table of {} entries does not match dims {dims:?}",
                    table.len()
                )))
            }
        }
        if let Some(&bad) = table.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::OutOfUnitInterval {
                what: "joint law entry".into(),
                value: bad,
            });
        }
        let total: f64 = table.iter().sum();
        if (total - 1.0).abs() > JOINT_TOL {
            return Err(Error::NotNormalized(total));
        }
        Ok(JointLaw { dims, table })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn prob(&self, index: &[usize]) -> f64 {
        let flat = index.iter().zip(&self.dims).fold(0, |acc, (&i, &d)| acc * d + i);
        self.table[flat]
    }

    pub fn entropy(&self) -> f64 {
        entropy(&self.table)
    }

    /// Marginal over the listed axes, kept in the given order.
    pub fn marginal(&self, axes: &[usize]) -> JointLaw {
        let table = marginal_table(&self.dims, &self.table, axes);
        JointLaw {
            dims: axes.iter().map(|&a| self.dims[a]).collect(),
            table,
        }
    }
}

/// Sums `table` down to the listed axes. Walks the source with an odometer and
/// keeps the destination offset in step with it.
pub(crate) fn marginal_table(dims: &[usize], table: &[f64], axes: &[usize]) -> Vec<f64> {
    let mut dst_stride = vec![0usize; dims.len()];
    let mut stride = 1;
    for &a in axes.iter().rev() {
        dst_stride[a] = stride;
        stride *= dims[a];
    }
    let mut out = vec![0.0; stride];
    let mut digits = vec![0usize; dims.len()];
    let mut offset = 0usize;
    for &p in table {
        out[offset] += p;
        for axis in (0..dims.len()).rev() {
            digits[axis] += 1;
            offset += dst_stride[axis];
            if digits[axis] < dims[axis] {
                break;
            }
            digits[axis] = 0;
            offset -= dims[axis] * dst_stride[axis];
        }
    }
    out
}
