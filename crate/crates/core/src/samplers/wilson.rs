//! Loop-erased random walks on K_n with conductances e^{-βω_e}; the
//! resulting tree T has probability ∝ ∏_{e∈T} e^{-βω_e}, which is the Gibbs
//! law for spanning trees.

use rand::Rng;

use crate::dual::edge_factor;
use crate::error::{Error, Result};
use crate::models::graph::{complete_edge_index, DisjointSet};

/// Below this acceptance rate a vertex switches from rejection sampling of
/// its neighbor to a cumulative table.
const MIN_ACCEPTANCE: f64 = 0.05;

#[derive(Clone, Debug)]
pub struct WilsonSampler {
    n: usize,
    /// Dense n×n conductances.
    cond: Vec<f64>,
    row_max: Vec<f64>,
    /// Cumulative conductances for vertices where rejection is slow.
    cumulative: Vec<Option<Vec<f64>>>,
}

impl WilsonSampler {
    pub fn new(weights: &[f64], beta: f64, n: usize) -> Result<Self> {
        let expected = n * (n - 1) / 2;
        if weights.len() != expected {
            return Err(Error::LengthMismatch { expected, got: weights.len() });
        }
        let mut cond = vec![0.0; n * n];
        let mut ds = DisjointSet::new(n);
        for i in 0..n {
            for j in i + 1..n {
                let c = edge_factor(weights[complete_edge_index(n, i, j)], beta).re;
                cond[i * n + j] = c;
                cond[j * n + i] = c;
                if c > 0.0 {
                    ds.union(i, j);
                }
            }
        }
        if ds.component_sizes().len() != 1 {
            return Err(Error::AllInfinite);
        }
        let mut row_max = vec![0.0; n];
        let mut cumulative = vec![None; n];
        for u in 0..n {
            let row = &cond[u * n..(u + 1) * n];
            let max = row.iter().copied().fold(0.0, f64::max);
            let sum: f64 = row.iter().sum();
            row_max[u] = max;
            if sum / ((n - 1) as f64 * max) < MIN_ACCEPTANCE {
                let mut acc = 0.0;
                cumulative[u] = Some(
                    row.iter()
                        .map(|&c| {
                            acc += c;
                            acc
                        })
                        .collect(),
                );
            }
        }
        Ok(Self { n, cond, row_max, cumulative })
    }

    fn step<R: Rng + ?Sized>(&self, u: usize, rng: &mut R) -> usize {
        let n = self.n;
        if let Some(cum) = &self.cumulative[u] {
            let target = rng.gen::<f64>() * cum[n - 1];
            let v = cum.partition_point(|&c| c <= target);
            return v.min(n - 1);
        }
        loop {
            let mut v = rng.gen_range(0..n - 1);
            if v >= u {
                v += 1;
            }
            if rng.gen::<f64>() * self.row_max[u] < self.cond[u * n + v] {
                return v;
            }
        }
    }

    /// One tree, as unsorted edge indices.
    pub fn sample_edges<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<u32> {
        let n = self.n;
        let mut in_tree = vec![false; n];
        let mut next = vec![usize::MAX; n];
        in_tree[0] = true;
        for start in 1..n {
            let mut u = start;
            while !in_tree[u] {
                next[u] = self.step(u, rng);
                u = next[u];
            }
            let mut u = start;
            while !in_tree[u] {
                in_tree[u] = true;
                u = next[u];
            }
        }
        (1..n).map(|v| complete_edge_index(n, v, next[v]) as u32).collect()
    }
}
