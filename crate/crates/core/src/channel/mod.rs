//! Finite-state channels and their unifilar special case.
//!
//! A [`FiniteStateChannel`] stores the full law `P(y, s | x, s')` as a dense
//! table indexed `(s', x, y, s)`. A [`UnifilarChannel`] stores the per-state
//! channel `W(y | x, s')` together with the deterministic next-state map
//! `s = f(s', x, y)`. Both are validated on construction and immutable after.

mod dynamics;
mod structure;

pub use dynamics::{OutputStateLaw, StateBeliefTable, DEFAULT_GAP_BUDGET};
pub use structure::{tv_distance, Connectivity};

use crate::error::{Error, Result};

/// Row-sum tolerance at validation time.
pub const STOCHASTIC_TOL: f64 = 1e-12;
/// Tolerance after n-fold composition.
pub const COMPOSED_TOL: f64 = 1e-10;

/// Size of a finite alphabet; symbols are `0..size`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Alphabet(usize);

impl Alphabet {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::Domain("alphabet size 0".into()));
        }
        Ok(Alphabet(size))
    }

    pub fn size(self) -> usize {
        self.0
    }

    pub fn symbols(self) -> std::ops::Range<usize> {
        0..self.0
    }

    pub fn check(self, what: &'static str, symbol: usize) -> Result<()> {
        if symbol < self.0 {
            Ok(())
        } else {
            Err(Error::Index {
                what,
                index: symbol,
                size: self.0,
            })
        }
    }
}

fn check_unit(what: impl FnOnce() -> String, value: f64) -> Result<()> {
    if value.is_finite() && (-STOCHASTIC_TOL..=1.0 + STOCHASTIC_TOL).contains(&value) {
        Ok(())
    } else {
        Err(Error::OutOfUnitInterval {
            what: what(),
            value,
        })
    }
}

/// General FSC law `P(y_n, s_n | x_n, s_{n-1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteStateChannel {
    x: Alphabet,
    y: Alphabet,
    s: Alphabet,
    law: Vec<f64>,
}

impl FiniteStateChannel {
    /// `law` is indexed `((s' * X + x) * Y + y) * S + s`.
    pub fn new(x_size: usize, y_size: usize, s_size: usize, law: Vec<f64>) -> Result<Self> {
        let (x, y, s) = (Alphabet::new(x_size)?, Alphabet::new(y_size)?, Alphabet::new(s_size)?);
        let expected = s_size * x_size * y_size * s_size;
        if law.len() != expected {
            return Err(Error::Dimension(format!(
                "law has {} entries, expected {expected}",
                law.len()
            )));
        }
        let block = y_size * s_size;
        for (row, chunk) in law.chunks(block).enumerate() {
            let (s_prev, xi) = (row / x_size, row % x_size);
            for (k, &p) in chunk.iter().enumerate() {
                check_unit(
                    || format!("P(y={}, s={} | x={xi}, s'={s_prev})", k / s_size, k % s_size),
                    p,
                )?;
            }
            let sum: f64 = chunk.iter().sum();
            if (sum - 1.0).abs() > STOCHASTIC_TOL {
                return Err(Error::NotStochastic { s_prev, x: xi, sum });
            }
        }
        Ok(FiniteStateChannel { x, y, s, law })
    }

    pub fn from_fn(
        x_size: usize,
        y_size: usize,
        s_size: usize,
        mut law: impl FnMut(usize, usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let mut table = Vec::with_capacity(s_size * x_size * y_size * s_size);
        for sp in 0..s_size {
            for x in 0..x_size {
                for y in 0..y_size {
                    for s in 0..s_size {
                        table.push(law(sp, x, y, s));
                    }
                }
            }
        }
        Self::new(x_size, y_size, s_size, table)
    }

    pub fn x_size(&self) -> usize {
        self.x.size()
    }

    pub fn y_size(&self) -> usize {
        self.y.size()
    }

    pub fn s_size(&self) -> usize {
        self.s.size()
    }

    pub fn input_alphabet(&self) -> Alphabet {
        self.x
    }

    pub fn output_alphabet(&self) -> Alphabet {
        self.y
    }

    pub fn state_alphabet(&self) -> Alphabet {
        self.s
    }

    #[inline]
    pub fn law(&self, s_prev: usize, x: usize, y: usize, s: usize) -> f64 {
        self.law[((s_prev * self.x.size() + x) * self.y.size() + y) * self.s.size() + s]
    }

    /// The `(y, s)` block for a given `(s', x)`, indexed `y * S + s`.
    pub fn row(&self, s_prev: usize, x: usize) -> &[f64] {
        let block = self.y.size() * self.s.size();
        let start = (s_prev * self.x.size() + x) * block;
        &self.law[start..start + block]
    }

    pub fn table(&self) -> &[f64] {
        &self.law
    }

    pub(crate) fn same_shape(&self, other: &Self) -> Result<()> {
        if (self.x, self.y, self.s) == (other.x, other.y, other.s) {
            Ok(())
        } else {
            Err(Error::Dimension(format!(
                "channel shapes differ: {}x{}x{} vs {}x{}x{}",
                self.x_size(),
                self.y_size(),
                self.s_size(),
                other.x_size(),
                other.y_size(),
                other.s_size()
            )))
        }
    }
}

/// Unifilar FSC `(W, f)`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnifilarChannel {
    x: Alphabet,
    y: Alphabet,
    s: Alphabet,
    w: Vec<f64>,
    f: Vec<usize>,
}

impl UnifilarChannel {
    /// `w` and `f` are both indexed `(s' * X + x) * Y + y`.
    pub fn new(x_size: usize, y_size: usize, s_size: usize, w: Vec<f64>, f: Vec<usize>) -> Result<Self> {
        let (x, y, s) = (Alphabet::new(x_size)?, Alphabet::new(y_size)?, Alphabet::new(s_size)?);
        let expected = s_size * x_size * y_size;
        if w.len() != expected || f.len() != expected {
            return Err(Error::Dimension(format!(
                "w has {} and f has {} entries, expected {expected}",
                w.len(),
                f.len()
            )));
        }
        for (row, chunk) in w.chunks(y_size).enumerate() {
            let (s_prev, xi) = (row / x_size, row % x_size);
            for (yi, &p) in chunk.iter().enumerate() {
                check_unit(|| format!("W(y={yi} | x={xi}, s'={s_prev})"), p)?;
            }
            let sum: f64 = chunk.iter().sum();
            if (sum - 1.0).abs() > STOCHASTIC_TOL {
                return Err(Error::NotStochastic { s_prev, x: xi, sum });
            }
        }
        for (idx, &next) in f.iter().enumerate() {
            if next >= s_size {
                return Err(Error::BadNextState {
                    s_prev: idx / (x_size * y_size),
                    x: (idx / y_size) % x_size,
                    y: idx % y_size,
                    next,
                    s_size,
                });
            }
        }
        Ok(UnifilarChannel { x, y, s, w, f })
    }

    pub fn from_fn(
        x_size: usize,
        y_size: usize,
        s_size: usize,
        mut w: impl FnMut(usize, usize, usize) -> f64,
        mut f: impl FnMut(usize, usize, usize) -> usize,
    ) -> Result<Self> {
        let n = s_size * x_size * y_size;
        let (mut wt, mut ft) = (Vec::with_capacity(n), Vec::with_capacity(n));
        for sp in 0..s_size {
            for x in 0..x_size {
                for y in 0..y_size {
                    wt.push(w(sp, x, y));
                    ft.push(f(sp, x, y));
                }
            }
        }
        Self::new(x_size, y_size, s_size, wt, ft)
    }

    /// A discrete memoryless channel as a single-state unifilar FSC; `rows[x][y] = W(y|x)`.
    pub fn memoryless(rows: &[Vec<f64>]) -> Result<Self> {
        let x_size = rows.len();
        let y_size = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != y_size) {
            return Err(Error::Dimension("ragged DMC rows".into()));
        }
        Self::from_fn(x_size, y_size, 1, |_, x, y| rows[x][y], |_, _, _| 0)
    }

    pub fn x_size(&self) -> usize {
        self.x.size()
    }

    pub fn y_size(&self) -> usize {
        self.y.size()
    }

    pub fn s_size(&self) -> usize {
        self.s.size()
    }

    #[inline]
    pub fn w(&self, s_prev: usize, x: usize, y: usize) -> f64 {
        self.w[(s_prev * self.x.size() + x) * self.y.size() + y]
    }

    #[inline]
    pub fn next_state(&self, s_prev: usize, x: usize, y: usize) -> usize {
        self.f[(s_prev * self.x.size() + x) * self.y.size() + y]
    }

    /// `W(. | x, s')`.
    pub fn row(&self, s_prev: usize, x: usize) -> &[f64] {
        let start = (s_prev * self.x.size() + x) * self.y.size();
        &self.w[start..start + self.y.size()]
    }

    pub fn w_table(&self) -> &[f64] {
        &self.w
    }

    pub fn f_table(&self) -> &[usize] {
        &self.f
    }

    /// The per-state DMC `W(. | ., s')` as rows indexed by input.
    pub fn state_dmc(&self, s_prev: usize) -> Result<Vec<Vec<f64>>> {
        self.s.check("state", s_prev)?;
        Ok(self.x.symbols().map(|x| self.row(s_prev, x).to_vec()).collect())
    }

    /// Full law `P(y, s | x, s') = W(y | x, s') * 1{s = f(s', x, y)}`.
    pub fn compose(&self) -> FiniteStateChannel {
        let (xs, ys, ss) = (self.x_size(), self.y_size(), self.s_size());
        let mut law = vec![0.0; ss * xs * ys * ss];
        for sp in 0..ss {
            for x in 0..xs {
                for y in 0..ys {
                    let idx = (sp * xs + x) * ys + y;
                    law[idx * ss + self.f[idx]] = self.w[idx];
                }
            }
        }
        FiniteStateChannel {
            x: self.x,
            y: self.y,
            s: self.s,
            law,
        }
    }
}

/// Free-function form of [`UnifilarChannel::compose`].
pub fn compose_unifilar(u: &UnifilarChannel) -> FiniteStateChannel {
    u.compose()
}
