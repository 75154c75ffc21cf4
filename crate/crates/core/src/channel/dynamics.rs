use super::{FiniteStateChannel, COMPOSED_TOL};
use crate::error::{Error, Result};

/// Default cap on `|X|^n * |S|^2` for the exhaustive indecomposability sweep.
pub const DEFAULT_GAP_BUDGET: u128 = 10_000_000;

/// Cap on `|Y|^n * |S|` for dense n-fold output/state tables.
const OUTPUT_TABLE_BUDGET: u128 = 1 << 24;

/// `P^n(y^n, s_n | x^n, s_0)` over all output sequences and final states.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputStateLaw {
    n: usize,
    y_size: usize,
    s_size: usize,
    /// Indexed `y_index(y^n) * S + s_n`, with `y_1` the most significant digit.
    table: Vec<f64>,
}

impl OutputStateLaw {
    pub fn horizon(&self) -> usize {
        self.n
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn get(&self, y_seq: &[usize], s: usize) -> f64 {
        debug_assert_eq!(y_seq.len(), self.n);
        let idx = y_seq.iter().fold(0, |acc, &y| acc * self.y_size + y);
        self.table[idx * self.s_size + s]
    }

    /// Sums out `y^n`.
    pub fn state_marginal(&self) -> StateBeliefTable {
        let mut values = vec![0.0; self.s_size];
        for chunk in self.table.chunks(self.s_size) {
            for (v, p) in values.iter_mut().zip(chunk) {
                *v += p;
            }
        }
        StateBeliefTable { values }
    }
}

/// `q^n(s_n | x^n, s_0)` for one fixed conditioning.
#[derive(Debug, Clone, PartialEq)]
pub struct StateBeliefTable {
    pub values: Vec<f64>,
}

impl StateBeliefTable {
    pub fn point_mass(s_size: usize, s: usize) -> Self {
        let mut values = vec![0.0; s_size];
        values[s] = 1.0;
        StateBeliefTable { values }
    }

    pub fn get(&self, s: usize) -> f64 {
        self.values[s]
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }
}

impl FiniteStateChannel {
    fn check_inputs(&self, x_seq: &[usize], s0: usize) -> Result<()> {
        self.s.check("initial state", s0)?;
        x_seq.iter().try_for_each(|&x| self.x.check("input symbol", x))
    }

    /// One step of the state filter: `q'(s) = sum_{s', y} P(y, s | x, s') q(s')`.
    pub(crate) fn propagate_belief(&self, belief: &[f64], x: usize, out: &mut [f64]) {
        let (ys, ss) = (self.y_size(), self.s_size());
        out.iter_mut().for_each(|v| *v = 0.0);
        for (sp, &b) in belief.iter().enumerate() {
            if b == 0.0 {
                continue;
            }
            let row = self.row(sp, x);
            for y in 0..ys {
                for (o, &p) in out.iter_mut().zip(&row[y * ss..(y + 1) * ss]) {
                    *o += b * p;
                }
            }
        }
    }

    /// Joint law of `(y^n, s_n)` given `x^n` and `s_0`, built by the forward recursion over `s_{n-1}`.
    pub fn n_fold_law(&self, x_seq: &[usize], s0: usize) -> Result<OutputStateLaw> {
        if x_seq.is_empty() {
            return Err(Error::Domain("horizon n = 0 for n-fold law".into()));
        }
        self.check_inputs(x_seq, s0)?;
        let (ys, ss) = (self.y_size(), self.s_size());
        let needed = (ys as u128).saturating_pow(x_seq.len() as u32).saturating_mul(ss as u128);
        if needed > OUTPUT_TABLE_BUDGET {
            return Err(Error::Resource {
                what: "n-fold output table",
                needed,
                limit: OUTPUT_TABLE_BUDGET,
            });
        }
        let mut table = vec![0.0; ss];
        table[s0] = 1.0;
        for &x in x_seq {
            let mut next = vec![0.0; table.len() * ys];
            for (prefix, chunk) in table.chunks(ss).enumerate() {
                for (sp, &p) in chunk.iter().enumerate() {
                    if p == 0.0 {
                        continue;
                    }
                    let row = self.row(sp, x);
                    for y in 0..ys {
                        let dst = &mut next[(prefix * ys + y) * ss..(prefix * ys + y + 1) * ss];
                        for (d, &l) in dst.iter_mut().zip(&row[y * ss..(y + 1) * ss]) {
                            *d += p * l;
                        }
                    }
                }
            }
            table = next;
        }
        let total: f64 = table.iter().sum();
        if (total - 1.0).abs() > COMPOSED_TOL {
            return Err(Error::NotNormalized(total));
        }
        Ok(OutputStateLaw {
            n: x_seq.len(),
            y_size: ys,
            s_size: ss,
            table,
        })
    }

    /// `q^n(s_n | x^n, s_0)`; the empty input sequence gives the point mass on `s_0`.
    pub fn state_marginal(&self, x_seq: &[usize], s0: usize) -> Result<StateBeliefTable> {
        self.check_inputs(x_seq, s0)?;
        let mut belief = StateBeliefTable::point_mass(self.s_size(), s0).values;
        let mut scratch = vec![0.0; self.s_size()];
        for &x in x_seq {
            self.propagate_belief(&belief, x, &mut scratch);
            std::mem::swap(&mut belief, &mut scratch);
        }
        Ok(StateBeliefTable { values: belief })
    }

    /// `max |q^n(s_n | x^n, s_0) - q^n(s_n | x^n, s_0')|` over every `s_n`, `x^n`, `s_0`, `s_0'`.
    pub fn indecomposability_gap(&self, n: usize) -> Result<f64> {
        self.indecomposability_gap_with_budget(n, DEFAULT_GAP_BUDGET)
    }

    pub fn indecomposability_gap_with_budget(&self, n: usize, budget: u128) -> Result<f64> {
        if n == 0 {
            return Err(Error::Domain("horizon n = 0 for indecomposability gap".into()));
        }
        let (xs, ss) = (self.x_size(), self.s_size());
        let needed = (xs as u128).saturating_pow(n as u32).saturating_mul((ss * ss) as u128);
        if needed > budget {
            return Err(Error::Resource {
                what: "indecomposability sweep",
                needed,
                limit: budget,
            });
        }
        if ss == 1 {
            return Ok(0.0);
        }
        // One belief row per initial state, carried down the input prefix tree.
        let mut start = vec![0.0; ss * ss];
        for s0 in 0..ss {
            start[s0 * ss + s0] = 1.0;
        }
        let mut gap = 0.0f64;
        self.gap_sweep(&start, n, &mut gap);
        Ok(gap)
    }

    fn gap_sweep(&self, beliefs: &[f64], remaining: usize, gap: &mut f64) {
        let ss = self.s_size();
        let mut next = vec![0.0; ss * ss];
        for x in 0..self.x_size() {
            for s0 in 0..ss {
                self.propagate_belief(&beliefs[s0 * ss..(s0 + 1) * ss], x, &mut next[s0 * ss..(s0 + 1) * ss]);
            }
            if remaining == 1 {
                for s in 0..ss {
                    let (lo, hi) = (0..ss)
                        .map(|s0| next[s0 * ss + s])
                        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
                    *gap = gap.max(hi - lo);
                }
            } else {
                self.gap_sweep(&next, remaining - 1, gap);
            }
        }
    }
}
