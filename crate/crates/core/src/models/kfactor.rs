//! Exact counting of k-regular spanning subgraphs of K_N for small N.
//!
//! Vertices are processed in order; vertex v picks its remaining partners
//! among higher vertices with spare degree. The number of completions only
//! depends on v and the residual degrees of vertices >= v, which is the memo
//! key.

use std::collections::HashMap;

use super::graph::complete_edge_index;

pub(crate) struct KFactorCounter<'a> {
    n: usize,
    forbidden: &'a [bool],
    memo: HashMap<(usize, Vec<u8>), u128>,
}

impl<'a> KFactorCounter<'a> {
    /// `forbidden[e]` marks edges of K_n that may not be used.
    pub(crate) fn new(n: usize, forbidden: &'a [bool]) -> Self {
        Self { n, forbidden, memo: HashMap::new() }
    }

    /// Number of simple graphs on the unforbidden edges with the given degree
    /// sequence.
    pub(crate) fn count(&mut self, residual: &[u8]) -> u128 {
        let mut r = residual.to_vec();
        self.count_from(0, &mut r)
    }

    fn count_from(&mut self, v: usize, residual: &mut Vec<u8>) -> u128 {
        if v == self.n {
            return 1;
        }
        let key = (v, residual[v..].to_vec());
        if let Some(&c) = self.memo.get(&key) {
            return c;
        }
        let need = residual[v] as usize;
        let candidates: Vec<usize> = (v + 1..self.n)
            .filter(|&u| residual[u] > 0 && !self.forbidden[complete_edge_index(self.n, v, u)])
            .collect();
        let mut total = 0u128;
        if need <= candidates.len() {
            let saved = residual[v];
            residual[v] = 0;
            let mut chosen = Vec::with_capacity(need);
            self.choose(v, &candidates, 0, need, &mut chosen, residual, &mut total);
            residual[v] = saved;
        }
        self.memo.insert(key, total);
        total
    }

    #[allow(clippy::too_many_arguments)]
    fn choose(
        &mut self,
        v: usize,
        candidates: &[usize],
        start: usize,
        need: usize,
        chosen: &mut Vec<usize>,
        residual: &mut Vec<u8>,
        total: &mut u128,
    ) {
        if chosen.len() == need {
            for &u in chosen.iter() {
                residual[u] -= 1;
            }
            *total += self.count_from(v + 1, residual);
            for &u in chosen.iter() {
                residual[u] += 1;
            }
            return;
        }
        let remaining = need - chosen.len();
        for i in start..candidates.len() {
            if candidates.len() - i < remaining {
                break;
            }
            chosen.push(candidates[i]);
            self.choose(v, candidates, i + 1, need, chosen, residual, total);
            chosen.pop();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_regular_graph_counts() {
        // labeled 2-regular graphs: 1, 3, 12, 70, 465 on 3..7 vertices
        for (n, want) in [(3usize, 1u128), (4, 3), (5, 12), (6, 70), (7, 465)] {
            let forbidden = vec![false; n * (n - 1) / 2];
            assert_eq!(KFactorCounter::new(n, &forbidden).count(&vec![2; n]), want);
        }
        // labeled cubic graphs on 4, 6, 8 vertices: 1, 70, 19355
        for (n, want) in [(4usize, 1u128), (6, 70), (8, 19355)] {
            let forbidden = vec![false; n * (n - 1) / 2];
            assert_eq!(KFactorCounter::new(n, &forbidden).count(&vec![3; n]), want);
        }
    }
}
