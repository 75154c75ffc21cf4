use std::collections::VecDeque;

use serde::Serialize;

use super::FiniteStateChannel;
use crate::error::Result;

/// Reachability verdict on the state support graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Connectivity {
    pub strongly_connected: bool,
    /// First `(from, to)` pair with `to` unreachable from `from`, scanning targets in order.
    pub unreachable: Option<(usize, usize)>,
    /// Longest shortest path between distinct states, when strongly connected.
    pub max_path_len: Option<usize>,
}

impl FiniteStateChannel {
    /// Edge `s' -> s` iff some `(x, y)` has `P(y, s | x, s') > 0`.
    pub fn support_graph(&self) -> Vec<Vec<usize>> {
        let (xs, ys, ss) = (self.x_size(), self.y_size(), self.s_size());
        (0..ss)
            .map(|sp| {
                (0..ss)
                    .filter(|&s| (0..xs).any(|x| (0..ys).any(|y| self.law(sp, x, y, s) > 0.0)))
                    .collect()
            })
            .collect()
    }

    /// Shortest support-path lengths from `from`; `None` marks unreachable states.
    ///
    /// `from` itself is at distance 0, so a self-return needs no edge.
    pub fn reach_distances(&self, from: usize) -> Vec<Option<usize>> {
        let graph = self.support_graph();
        let mut dist = vec![None; self.s_size()];
        dist[from] = Some(0);
        let mut queue = VecDeque::from([from]);
        while let Some(u) = queue.pop_front() {
            let d = dist[u].unwrap_or(0);
            for &v in &graph[u] {
                if dist[v].is_none() {
                    dist[v] = Some(d + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    pub fn strongly_connected(&self) -> Connectivity {
        let ss = self.s_size();
        let dist: Vec<_> = (0..ss).map(|s| self.reach_distances(s)).collect();
        let unreachable = (0..ss)
            .flat_map(|to| (0..ss).map(move |from| (from, to)))
            .find(|&(from, to)| dist[from][to].is_none());
        let max_path_len = match unreachable {
            Some(_) => None,
            None => dist.iter().flatten().flatten().copied().max(),
        };
        Connectivity {
            strongly_connected: unreachable.is_none(),
            unreachable,
            max_path_len,
        }
    }

    /// `max_{s', x} sum_{y, s} |P_a(y, s | x, s') - P_b(y, s | x, s')|`.
    pub fn tv_distance(&self, other: &Self) -> Result<f64> {
        self.same_shape(other)?;
        let block = self.y_size() * self.s_size();
        Ok(self
            .table()
            .chunks(block)
            .zip(other.table().chunks(block))
            .map(|(a, b)| a.iter().zip(b).map(|(p, q)| (p - q).abs()).sum::<f64>())
            .fold(0.0, f64::max))
    }
}

/// Free-function form of [`FiniteStateChannel::tv_distance`].
pub fn tv_distance(a: &FiniteStateChannel, b: &FiniteStateChannel) -> Result<f64> {
    a.tv_distance(b)
}
