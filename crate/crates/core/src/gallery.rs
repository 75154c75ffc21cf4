//! Explicit two-input, two-output unifilar channels with exact rational tables.
//!
//! Every member shares the switching rule `f` below. State 0 is a BSC with
//! crossover `lambda`; state 1 is a Z-like channel that flips input 0 with
//! probability `eps` and input 1 with probability `lambda`:
//!
//! ```text
//!   f(s', x, y)      (x,y)=(0,0) (0,1) (1,0) (1,1)
//!   s' = 0                  0     1     1     0
//!   s' = 1                  1     1     0     1
//! ```
//!
//! At `lambda = 0` state 0 is noiseless and both states are absorbing, so the
//! feedback capacity depends on the initial state. For every `lambda > 0` the
//! channel is strongly connected while its distance to the `lambda = 0`
//! member is only `2 lambda`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::capacity::{optimize_rate, OptimizerSettings};
use crate::channel::UnifilarChannel;
use crate::error::{Error, Result};
use crate::format::{f_nested, ChannelFile, FORMAT_VERSION};
use crate::prob::{rational_to_f64, Probability};

/// Switching rule shared by the whole family, indexed `[s'][x][y]`.
pub const SWITCH_RULE: [[[usize; 2]; 2]; 2] = [[[0, 1], [1, 0]], [[1, 1], [0, 1]]];

/// Parameters a gallery channel was built from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GalleryParams {
    #[serde(serialize_with = "as_fraction")]
    pub eps: BigRational,
    #[serde(serialize_with = "as_fraction")]
    pub lambda: BigRational,
    pub k: Option<u64>,
    pub x_size: usize,
    pub y_size: usize,
    pub s_size: usize,
}

fn as_fraction<S: serde::Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(r)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GalleryChannel {
    label: String,
    params: GalleryParams,
    /// Exact `W(y|x,s')`, indexed `(s' * X + x) * Y + y`.
    w: Vec<BigRational>,
    f: Vec<usize>,
    channel: UnifilarChannel,
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn half() -> BigRational {
    rat(1, 2)
}

fn check_eps(eps: &BigRational) -> Result<()> {
    if !(eps.is_positive() && *eps < half()) {
        return Err(Error::Domain(format!("eps = {eps} must lie in (0, 1/2)")));
    }
    Ok(())
}

impl GalleryChannel {
    fn assemble(label: String, params: GalleryParams, w: Vec<BigRational>, f: Vec<usize>) -> Result<Self> {
        let (xs, ys, ss) = (params.x_size, params.y_size, params.s_size);
        for sp in 0..ss {
            for x in 0..xs {
                let row = &w[(sp * xs + x) * ys..(sp * xs + x + 1) * ys];
                let sum: BigRational = row.iter().sum();
                if !sum.is_one() || row.iter().any(|p| p.is_negative()) {
                    return Err(Error::NotStochastic {
                        s_prev: sp,
                        x,
                        sum: rational_to_f64(&sum),
                    });
                }
            }
        }
        let channel = UnifilarChannel::new(xs, ys, ss, w.iter().map(rational_to_f64).collect(), f.clone())?;
        Ok(GalleryChannel {
            label,
            params,
            w,
            f,
            channel,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn params(&self) -> &GalleryParams {
        &self.params
    }

    pub fn channel(&self) -> &UnifilarChannel {
        &self.channel
    }

    pub fn exact_w(&self, s_prev: usize, x: usize, y: usize) -> &BigRational {
        let p = &self.params;
        &self.w[(s_prev * p.x_size + x) * p.y_size + y]
    }

    pub fn next_state(&self, s_prev: usize, x: usize, y: usize) -> usize {
        let p = &self.params;
        self.f[(s_prev * p.x_size + x) * p.y_size + y]
    }

    /// Channel file with exact fractions and the parameter record.
    pub fn to_file(&self) -> ChannelFile {
        let p = &self.params;
        let w = (0..p.s_size)
            .map(|s| {
                (0..p.x_size)
                    .map(|x| (0..p.y_size).map(|y| Probability::Exact(self.exact_w(s, x, y).clone())).collect())
                    .collect()
            })
            .collect();
        let mut params = BTreeMap::new();
        params.insert("eps".to_string(), p.eps.to_string());
        params.insert("lambda".to_string(), p.lambda.to_string());
        if let Some(k) = p.k {
            params.insert("k".to_string(), k.to_string());
        }
        ChannelFile {
            version: FORMAT_VERSION,
            label: Some(self.label.clone()),
            params,
            x_size: p.x_size,
            y_size: p.y_size,
            s_size: p.s_size,
            w: Some(w),
            f: Some(f_nested(&self.channel)),
            law: None,
            s0: None,
            settings: None,
        }
    }
}

/// Two-state family member with crossover `lambda` in `[0, 1]`.
fn switch_family(label: &str, eps: &BigRational, lambda: &BigRational, k: Option<u64>) -> Result<GalleryChannel> {
    check_eps(eps)?;
    if lambda.is_negative() || *lambda > BigRational::one() {
        return Err(Error::Domain(format!("lambda = {lambda} must lie in [0, 1]")));
    }
    let one = BigRational::one();
    let rows = [
        [[&one - lambda, lambda.clone()], [lambda.clone(), &one - lambda]],
        [[&one - eps, eps.clone()], [lambda.clone(), &one - lambda]],
    ];
    let w = rows.iter().flatten().flatten().cloned().collect();
    let f = SWITCH_RULE.iter().flatten().flatten().copied().collect();
    let params = GalleryParams {
        eps: eps.clone(),
        lambda: lambda.clone(),
        k,
        x_size: 2,
        y_size: 2,
        s_size: 2,
    };
    GalleryChannel::assemble(label.to_string(), params, w, f)
}

/// Noiseless state 0 and Z-channel state 1, neither reachable from the other.
pub fn build_noiseless_z_pair(eps: &BigRational) -> Result<GalleryChannel> {
    switch_family("noiseless-z", eps, &BigRational::zero(), None)
}

/// Family member for `lambda` in `[0, 1/2]`.
pub fn build_w_lambda(eps: &BigRational, lambda: &BigRational) -> Result<GalleryChannel> {
    if lambda.is_negative() || *lambda > half() {
        return Err(Error::Domain(format!("lambda = {lambda} must lie in [0, 1/2]")));
    }
    switch_family("w-lambda", eps, lambda, None)
}

/// Family member with `lambda = 1/k`.
pub fn build_w_k(eps: &BigRational, k: u64) -> Result<GalleryChannel> {
    if k == 0 {
        return Err(Error::Domain("k must be at least 1".into()));
    }
    switch_family("w-k", eps, &BigRational::new(BigInt::one(), BigInt::from(k)), Some(k))
}

/// Enlarges the alphabets without changing what the channel can do.
///
/// New outputs have probability zero and leave the state unchanged. A new
/// input behaves exactly like input 0 (same row, same transitions), so every
/// row stays stochastic and the support graph is unchanged.
pub fn extend_alphabets(g: &GalleryChannel, x_size: usize, y_size: usize) -> Result<GalleryChannel> {
    let p = &g.params;
    if x_size < p.x_size || y_size < p.y_size {
        return Err(Error::Domain(format!(
            "cannot shrink alphabets {}x{} to {x_size}x{y_size}",
            p.x_size, p.y_size
        )));
    }
    let mut w = Vec::with_capacity(p.s_size * x_size * y_size);
    let mut f = Vec::with_capacity(w.capacity());
    for sp in 0..p.s_size {
        for x in 0..x_size {
            let src = if x < p.x_size { x } else { 0 };
            for y in 0..y_size {
                if y < p.y_size {
                    w.push(g.exact_w(sp, src, y).clone());
                    f.push(g.next_state(sp, src, y));
                } else {
                    w.push(BigRational::zero());
                    f.push(sp);
                }
            }
        }
    }
    let params = GalleryParams {
        x_size,
        y_size,
        ..p.clone()
    };
    GalleryChannel::assemble(g.label.clone(), params, w, f)
}

/// Crossover of the added state `s >= 2`: `eps + (1/2 - eps)^(s-1)`.
pub fn added_state_crossover(eps: &BigRational, s: usize) -> BigRational {
    eps + num_traits::pow(half() - eps, s - 1)
}

/// Adds states `2..s_size`, each a Z-channel flipping input 0 with the
/// crossover from [`added_state_crossover`].
///
/// From state 0 the pair `(0,1)` now leads to state 2. From an added state,
/// `(0,1)` leads to the next added state (the last one returns to 0), every
/// other supported pair returns to 0, and the unsupported pair `(1,0)` keeps
/// the state. State 1 is unchanged.
pub fn extend_states(g: &GalleryChannel, s_size: usize) -> Result<GalleryChannel> {
    let p = &g.params;
    if (p.x_size, p.y_size, p.s_size) != (2, 2, 2) {
        return Err(Error::Domain(
            "states are added to the binary two-state family only".into(),
        ));
    }
    if s_size < 2 {
        return Err(Error::Domain(format!("cannot shrink to {s_size} states")));
    }
    let mut w: Vec<BigRational> = g.w.clone();
    let mut f = g.f.clone();
    if s_size >= 3 {
        f[1] = 2; // (s', x, y) = (0, 0, 1)
    }
    let one = BigRational::one();
    for s in 2..s_size {
        let delta = added_state_crossover(&p.eps, s);
        w.extend([&one - &delta, delta, BigRational::zero(), one.clone()]);
        let advance = if s + 1 < s_size { s + 1 } else { 0 };
        f.extend([0, advance, s, 0]);
    }
    let params = GalleryParams {
        s_size,
        ..p.clone()
    };
    GalleryChannel::assemble(g.label.clone(), params, w, f)
}

/// Exact total-variation distance between two gallery channels of equal shape.
pub fn tv_distance_exact(a: &GalleryChannel, b: &GalleryChannel) -> Result<BigRational> {
    let (pa, pb) = (&a.params, &b.params);
    if (pa.x_size, pa.y_size, pa.s_size) != (pb.x_size, pb.y_size, pb.s_size) {
        return Err(Error::Dimension("channels of different shapes".into()));
    }
    let mut worst = BigRational::zero();
    for sp in 0..pa.s_size {
        for x in 0..pa.x_size {
            let mut d = BigRational::zero();
            for y in 0..pa.y_size {
                let (wa, wb) = (a.exact_w(sp, x, y), b.exact_w(sp, x, y));
                let (fa, fb) = (a.next_state(sp, x, y), b.next_state(sp, x, y));
                if fa == fb {
                    d += (wa - wb).abs();
                } else {
                    d += wa + wb;
                }
            }
            if d > worst {
                worst = d;
            }
        }
    }
    Ok(worst)
}

/// Finite-horizon stand-in for the capacity difference between two initial
/// states: `optimize_rate(s_a) - optimize_rate(s_b)`.
pub fn capacity_gap(
    u: &UnifilarChannel,
    s_a: usize,
    s_b: usize,
    horizon: usize,
    cfg: &OptimizerSettings,
) -> Result<f64> {
    let a = optimize_rate(u, s_a, horizon, cfg)?;
    if s_a == s_b {
        return Ok(0.0);
    }
    let b = optimize_rate(u, s_b, horizon, cfg)?;
    Ok(a.value - b.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capacity::z_channel_closed_form;

    fn quarter() -> BigRational {
        rat(1, 4)
    }

    #[test]
    fn pair_tables_are_exact() {
        let g = build_noiseless_z_pair(&quarter()).unwrap();
        assert_eq!(*g.exact_w(0, 0, 0), BigRational::one());
        assert_eq!(*g.exact_w(0, 1, 0), BigRational::zero());
        assert_eq!(*g.exact_w(1, 0, 1), quarter());
        assert_eq!(*g.exact_w(1, 1, 1), BigRational::one());
        // From state 0 the pairs (0,0) and (1,1) keep the state.
        assert_eq!((g.next_state(0, 0, 0), g.next_state(0, 1, 1)), (0, 0));
        assert!(!g.channel().compose().strongly_connected().strongly_connected);
    }

    #[test]
    fn zero_lambda_is_the_pair() {
        let a = build_noiseless_z_pair(&quarter()).unwrap();
        let b = build_w_lambda(&quarter(), &BigRational::zero()).unwrap();
        assert_eq!(a.channel(), b.channel());
        assert_eq!(a.w, b.w);
    }

    #[test]
    fn positive_lambda_connects() {
        for l in [rat(1, 8), rat(1, 4), rat(1, 2)] {
            let g = build_w_lambda(&quarter(), &l).unwrap();
            assert!(g.channel().compose().strongly_connected().strongly_connected);
        }
        for k in [1, 2, 4, 64] {
            assert!(build_w_k(&quarter(), k).unwrap().channel().compose().strongly_connected().strongly_connected);
        }
    }

    #[test]
    fn distances_within_the_family() {
        let base = build_noiseless_z_pair(&quarter()).unwrap();
        for k in [2u64, 4, 8, 16, 32, 64] {
            let g = build_w_k(&quarter(), k).unwrap();
            assert_eq!(tv_distance_exact(&base, &g).unwrap(), rat(2, k as i64));
            let float = g.channel().compose().tv_distance(&base.channel().compose()).unwrap();
            assert_eq!(float, 2.0 / k as f64);
        }
        let a = build_w_lambda(&quarter(), &rat(1, 8)).unwrap();
        let b = build_w_lambda(&quarter(), &rat(3, 8)).unwrap();
        assert_eq!(tv_distance_exact(&a, &b).unwrap(), half());
        assert_eq!(build_w_k(&quarter(), 2).unwrap().w, build_w_lambda(&quarter(), &half()).unwrap().w);
    }

    #[test]
    fn domain_errors() {
        assert!(build_noiseless_z_pair(&BigRational::zero()).is_err());
        assert!(build_noiseless_z_pair(&half()).is_err());
        assert!(build_w_lambda(&quarter(), &rat(3, 4)).is_err());
        assert!(build_w_k(&quarter(), 0).is_err());
        let g = build_noiseless_z_pair(&quarter()).unwrap();
        assert!(extend_alphabets(&g, 1, 2).is_err());
        assert!(extend_states(&g, 1).is_err());
    }

    #[test]
    fn added_crossovers() {
        assert_eq!(added_state_crossover(&quarter(), 2), half());
        for eps in [rat(1, 10), quarter(), rat(2, 5)] {
            for s in 2..8 {
                let d = added_state_crossover(&eps, s);
                assert!(d > eps && d <= half());
            }
        }
    }

    #[test]
    fn three_state_transitions() {
        let g = extend_states(&build_w_lambda(&quarter(), &quarter()).unwrap(), 3).unwrap();
        let t = |s, x, y| g.next_state(s, x, y);
        assert_eq!([t(0, 0, 0), t(0, 0, 1), t(0, 1, 0), t(0, 1, 1)], [0, 2, 1, 0]);
        assert_eq!([t(1, 0, 0), t(1, 0, 1), t(1, 1, 0), t(1, 1, 1)], [1, 1, 0, 1]);
        assert_eq!([t(2, 0, 0), t(2, 0, 1), t(2, 1, 0), t(2, 1, 1)], [0, 0, 2, 0]);
        assert_eq!(*g.exact_w(2, 0, 1), half());
        assert!(g.channel().compose().strongly_connected().strongly_connected);
    }

    #[test]
    fn longer_state_chains_stay_connected() {
        let base = build_w_lambda(&quarter(), &quarter()).unwrap();
        for s in 2..=6 {
            let g = extend_states(&base, s).unwrap();
            assert_eq!(g.channel().s_size(), s);
            assert!(g.channel().compose().strongly_connected().strongly_connected);
            if s > 3 {
                assert_eq!(g.next_state(2, 0, 1), 3);
                assert_eq!(g.next_state(s - 1, 0, 1), 0);
            }
        }
        assert_eq!(extend_states(&base, 2).unwrap(), base);
    }

    #[test]
    fn alphabet_extension() {
        let base = build_w_lambda(&quarter(), &quarter()).unwrap();
        assert_eq!(extend_alphabets(&base, 2, 2).unwrap(), base);
        let g = extend_alphabets(&base, 3, 4).unwrap();
        assert_eq!(*g.exact_w(0, 2, 3), BigRational::zero());
        assert_eq!(g.next_state(1, 0, 3), 1);
        assert_eq!(g.exact_w(1, 2, 1), base.exact_w(1, 0, 1));
        for (b, e) in [(&base, &g), (&build_noiseless_z_pair(&quarter()).unwrap(), &extend_alphabets(&build_noiseless_z_pair(&quarter()).unwrap(), 3, 3).unwrap())] {
            assert_eq!(
                b.channel().compose().strongly_connected().strongly_connected,
                e.channel().compose().strongly_connected().strongly_connected
            );
        }
    }

    #[test]
    fn alphabet_extension_keeps_capacity() {
        let base = build_w_lambda(&quarter(), &quarter()).unwrap();
        let g = extend_alphabets(&base, 3, 3).unwrap();
        let cfg = OptimizerSettings::default();
        for s0 in 0..2 {
            let a = optimize_rate(base.channel(), s0, 2, &cfg).unwrap().value;
            let b = optimize_rate(g.channel(), s0, 2, &cfg).unwrap().value;
            assert!((a - b).abs() < 1e-6, "s0={s0}: {a} vs {b}");
        }
    }

    #[test]
    fn gap_of_the_pair() {
        let g = build_noiseless_z_pair(&quarter()).unwrap();
        let cfg = OptimizerSettings::default();
        let expected = 1.0 - z_channel_closed_form(0.25).unwrap().capacity;
        let gap = capacity_gap(g.channel(), 0, 1, 2, &cfg).unwrap();
        assert!((gap - expected).abs() < 1e-6);
        assert_eq!(capacity_gap(g.channel(), 1, 1, 2, &cfg).unwrap(), 0.0);
    }

    #[test]
    fn exports_exact_fractions() {
        let g = build_w_k(&quarter(), 4).unwrap();
        let file = g.to_file();
        let json = file.to_json();
        assert!(json.contains("\"3/4\""));
        let back = ChannelFile::parse(&json).unwrap().load().unwrap().unifilar().unwrap();
        assert_eq!(&back, g.channel());
    }
}
