//! Versioned JSON channel files.
//!
//! ```json
//! {
//!   "version": 1,
//!   "x_size": 2, "y_size": 2, "s_size": 2,
//!   "w": [[["1", "0"], ["0", "1"]], [["3/4", "1/4"], ["0", "1"]]],
//!   "f": [[[0, 1], [1, 0]], [[1, 1], [0, 1]]],
//!   "s0": 0
//! }
//! ```
//!
//! A unifilar channel carries `w[s'][x][y]` and `f[s'][x][y]`; a general one
//! carries `law[s'][x][y][s]` instead. Probabilities are JSON numbers or
//! strings holding a decimal or an exact fraction `"p/q"`. Optional fields:
//! `s0`, `label`, `params` and an optimizer `settings` block.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::capacity::OptimizerSettings;
use crate::channel::{FiniteStateChannel, UnifilarChannel};
use crate::error::{Error, Result};
use crate::prob::Probability;

pub const FORMAT_VERSION: u32 = 1;

/// Optimizer overrides carried by a channel file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileSettings {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restarts: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl FileSettings {
    pub fn apply(&self, cfg: &mut OptimizerSettings) {
        if let Some(r) = self.restarts {
            cfg.restarts = r;
        }
        if let Some(m) = self.max_iters {
            cfg.max_iters = m;
        }
        if let Some(t) = self.tol {
            cfg.tol = t;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelFile {
    pub version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, String>,
    pub x_size: usize,
    pub y_size: usize,
    pub s_size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<Vec<Vec<Vec<Probability>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<Vec<Vec<Vec<usize>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub law: Option<Vec<Vec<Vec<Vec<Probability>>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s0: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub settings: Option<FileSettings>,
}

/// A parsed and validated channel.
#[derive(Debug, Clone, PartialEq)]
pub enum LoadedChannel {
    Unifilar(UnifilarChannel),
    General(FiniteStateChannel),
}

impl LoadedChannel {
    pub fn law(&self) -> FiniteStateChannel {
        match self {
            LoadedChannel::Unifilar(u) => u.compose(),
            LoadedChannel::General(c) => c.clone(),
        }
    }

    /// The unifilar form, recovered from a general law when every supported
    /// `(s', x, y)` leads to a single next state.
    pub fn unifilar(&self) -> Option<UnifilarChannel> {
        match self {
            LoadedChannel::Unifilar(u) => Some(u.clone()),
            LoadedChannel::General(c) => {
                let (xs, ys, ss) = (c.x_size(), c.y_size(), c.s_size());
                let mut w = Vec::with_capacity(ss * xs * ys);
                let mut f = Vec::with_capacity(ss * xs * ys);
                for sp in 0..ss {
                    for x in 0..xs {
                        for y in 0..ys {
                            let targets: Vec<usize> = (0..ss).filter(|&s| c.law(sp, x, y, s) > 0.0).collect();
                            match targets.as_slice() {
                                [] => {
                                    w.push(0.0);
                                    f.push(sp);
                                }
                                [s] => {
                                    w.push(c.law(sp, x, y, *s));
                                    f.push(*s);
                                }
                                _ => return None,
                            }
                        }
                    }
                }
                UnifilarChannel::new(xs, ys, ss, w, f).ok()
            }
        }
    }

    pub fn is_unifilar(&self) -> bool {
        self.unifilar().is_some()
    }
}

fn shape_error(what: &str, coords: &[usize], got: usize, want: usize) -> Error {
    let idx: String = coords.iter().map(|c| format!("[{c}]")).collect();
    Error::Dimension(format!("{what}{idx} has {got} entries, expected {want}"))
}

fn check_len<T>(v: &[T], what: &str, coords: &[usize], want: usize) -> Result<()> {
    if v.len() != want {
        return Err(shape_error(what, coords, v.len(), want));
    }
    Ok(())
}

/// Exact rows must sum to exactly one; mixed or decimal rows fall back to the float tolerance.
fn check_exact_row<'a>(row: impl Iterator<Item = &'a Probability>, s_prev: usize, x: usize) -> Result<()> {
    let mut sum = BigRational::zero();
    let mut approx = 0.0;
    for p in row {
        match p.as_exact() {
            Some(r) => sum += r,
            None => return Ok(()),
        }
        approx += p.to_f64();
    }
    if !sum.is_one() {
        return Err(Error::NotStochastic { s_prev, x, sum: approx });
    }
    Ok(())
}

impl ChannelFile {
    pub fn parse(text: &str) -> Result<Self> {
        let file: ChannelFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if file.version != FORMAT_VERSION {
            return Err(Error::Parse(format!(
                "unsupported format version {} (expected {FORMAT_VERSION})",
                file.version
            )));
        }
        Ok(file)
    }

    /// Pretty JSON with a trailing newline; field order is fixed.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("channel files always serialize");
        s.push('\n');
        s
    }

    pub fn from_unifilar(u: &UnifilarChannel) -> Self {
        let (xs, ys, ss) = (u.x_size(), u.y_size(), u.s_size());
        let w = (0..ss)
            .map(|s| {
                (0..xs)
                    .map(|x| (0..ys).map(|y| Probability::Decimal(u.w(s, x, y))).collect())
                    .collect()
            })
            .collect();
        ChannelFile {
            version: FORMAT_VERSION,
            label: None,
            params: BTreeMap::new(),
            x_size: xs,
            y_size: ys,
            s_size: ss,
            w: Some(w),
            f: Some(f_nested(u)),
            law: None,
            s0: None,
            settings: None,
        }
    }

    pub fn load(&self) -> Result<LoadedChannel> {
        let (xs, ys, ss) = (self.x_size, self.y_size, self.s_size);
        match (&self.w, &self.f, &self.law) {
            (Some(w), Some(f), None) => {
                check_len(w, "w", &[], ss)?;
                check_len(f, "f", &[], ss)?;
                let mut wf = Vec::with_capacity(ss * xs * ys);
                let mut ff = Vec::with_capacity(ss * xs * ys);
                for sp in 0..ss {
                    check_len(&w[sp], "w", &[sp], xs)?;
                    check_len(&f[sp], "f", &[sp], xs)?;
                    for x in 0..xs {
                        check_len(&w[sp][x], "w", &[sp, x], ys)?;
                        check_len(&f[sp][x], "f", &[sp, x], ys)?;
                        check_exact_row(w[sp][x].iter(), sp, x)?;
                        wf.extend(w[sp][x].iter().map(Probability::to_f64));
                        ff.extend_from_slice(&f[sp][x]);
                    }
                }
                let u = UnifilarChannel::new(xs, ys, ss, wf, ff)?;
                self.check_s0(ss)?;
                Ok(LoadedChannel::Unifilar(u))
            }
            (None, None, Some(law)) => {
                check_len(law, "law", &[], ss)?;
                let mut flat = Vec::with_capacity(ss * xs * ys * ss);
                for (sp, by_input) in law.iter().enumerate() {
                    check_len(by_input, "law", &[sp], xs)?;
                    for (x, by_output) in by_input.iter().enumerate() {
                        check_len(by_output, "law", &[sp, x], ys)?;
                        for (y, next) in by_output.iter().enumerate() {
                            check_len(next, "law", &[sp, x, y], ss)?;
                        }
                        check_exact_row(by_output.iter().flatten(), sp, x)?;
                        flat.extend(by_output.iter().flatten().map(Probability::to_f64));
                    }
                }
                let c = FiniteStateChannel::new(xs, ys, ss, flat)?;
                self.check_s0(ss)?;
                Ok(LoadedChannel::General(c))
            }
            _ => Err(Error::Parse(
                "a channel file needs either `w` and `f`, or `law`, but not both".into(),
            )),
        }
    }

    fn check_s0(&self, ss: usize) -> Result<()> {
        match self.s0 {
            Some(s) if s >= ss => Err(Error::Index {
                what: "s0",
                index: s,
                size: ss,
            }),
            _ => Ok(()),
        }
    }
}

pub(crate) fn f_nested(u: &UnifilarChannel) -> Vec<Vec<Vec<usize>>> {
    (0..u.s_size())
        .map(|s| {
            (0..u.x_size())
                .map(|x| (0..u.y_size()).map(|y| u.next_state(s, x, y)).collect())
                .collect()
        })
        .collect()
}
