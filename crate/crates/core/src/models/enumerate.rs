//! Exhaustive enumeration of S for small models.
//!
//! Every configuration is handed to the visitor as a sorted edge slice, so no
//! per-configuration allocation happens unless the caller collects.

use super::graph::complete_edge_index;
use super::{Configuration, ProblemModel};
use crate::error::Result;

/// Calls `visit` once per member of S. Errors if |S| exceeds
/// [`super::ENUMERATION_CAP`].
pub fn for_each_config<F: FnMut(&[u32])>(model: &ProblemModel, mut visit: F) -> Result<()> {
    model.check_enumerable()?;
    let mut scratch = Vec::with_capacity(model.config_size());
    match *model {
        ProblemModel::MatchingBipartite { n } => {
            let mut used = vec![false; n];
            bipartite(n, 0, &mut used, &mut scratch, &mut visit);
        }
        ProblemModel::MatchingComplete { n } => {
            let mut used = vec![false; 2 * n];
            pairings(2 * n, &mut used, &mut scratch, &mut visit);
        }
        ProblemModel::TravelingSalesman { n } => {
            let mut path = vec![0usize];
            let mut used = vec![false; n];
            used[0] = true;
            cycles(n, &mut path, &mut used, &mut scratch, &mut visit);
        }
        ProblemModel::SpanningTree { n } => prufer_all(n, &mut scratch, &mut visit),
        ProblemModel::KFactor { n, k } => {
            let nv = 2 * n;
            let mut residual = vec![k; nv];
            let mut edges = Vec::new();
            regular(nv, 0, &mut residual, &mut edges, &mut scratch, &mut visit);
        }
    }
    Ok(())
}

/// Collects every member of S.
pub fn enumerate_configs(model: &ProblemModel) -> Result<Vec<Configuration>> {
    let mut out = Vec::new();
    for_each_config(model, |edges| out.push(Configuration::from_sorted(*model, edges.to_vec())))?;
    Ok(out)
}

fn bipartite<F: FnMut(&[u32])>(n: usize, row: usize, used: &mut [bool], edges: &mut Vec<u32>, visit: &mut F) {
    if row == n {
        visit(edges);
        return;
    }
    for col in 0..n {
        if !used[col] {
            used[col] = true;
            edges.push((row * n + col) as u32);
            bipartite(n, row + 1, used, edges, visit);
            edges.pop();
            used[col] = false;
        }
    }
}

fn pairings<F: FnMut(&[u32])>(nv: usize, used: &mut [bool], edges: &mut Vec<u32>, visit: &mut F) {
    let Some(a) = used.iter().position(|&u| !u) else {
        let mut sorted = edges.clone();
        sorted.sort_unstable();
        visit(&sorted);
        return;
    };
    used[a] = true;
    for b in a + 1..nv {
        if !used[b] {
            used[b] = true;
            edges.push(complete_edge_index(nv, a, b) as u32);
            pairings(nv, used, edges, visit);
            edges.pop();
            used[b] = false;
        }
    }
    used[a] = false;
}

/// Directed Hamiltonian paths from 0, closed into cycles; the orientation with
/// path[1] < path[n-1] is kept.
fn cycles<F: FnMut(&[u32])>(
    n: usize,
    path: &mut Vec<usize>,
    used: &mut [bool],
    edges: &mut Vec<u32>,
    visit: &mut F,
) {
    if path.len() == n {
        if path[1] < path[n - 1] {
            edges.clear();
            for w in path.windows(2) {
                edges.push(complete_edge_index(n, w[0], w[1]) as u32);
            }
            edges.push(complete_edge_index(n, path[n - 1], 0) as u32);
            edges.sort_unstable();
            visit(edges);
        }
        return;
    }
    for v in 1..n {
        if !used[v] {
            used[v] = true;
            path.push(v);
            cycles(n, path, used, edges, visit);
            path.pop();
            used[v] = false;
        }
    }
}

fn prufer_all<F: FnMut(&[u32])>(n: usize, edges: &mut Vec<u32>, visit: &mut F) {
    if n == 2 {
        visit(&[0]);
        return;
    }
    let len = n - 2;
    let mut seq = vec![0usize; len];
    let mut degree = vec![0usize; n];
    loop {
        prufer_decode(n, &seq, &mut degree, edges);
        edges.sort_unstable();
        visit(edges);
        // odometer increment
        let mut i = 0;
        while i < len {
            seq[i] += 1;
            if seq[i] < n {
                break;
            }
            seq[i] = 0;
            i += 1;
        }
        if i == len {
            return;
        }
    }
}

/// Linear-time decoding of a Prüfer sequence into edge indices of K_n.
pub(crate) fn prufer_decode(n: usize, seq: &[usize], degree: &mut [usize], edges: &mut Vec<u32>) {
    edges.clear();
    degree.iter_mut().for_each(|d| *d = 1);
    for &s in seq {
        degree[s] += 1;
    }
    let mut ptr = 0;
    while degree[ptr] != 1 {
        ptr += 1;
    }
    let mut leaf = ptr;
    for &v in seq {
        edges.push(complete_edge_index(n, leaf, v) as u32);
        degree[v] -= 1;
        if degree[v] == 1 && v < ptr {
            leaf = v;
        } else {
            ptr += 1;
            while degree[ptr] != 1 {
                ptr += 1;
            }
            leaf = ptr;
        }
    }
    // the two vertices left with degree 1 are `leaf` and n - 1
    edges.push(complete_edge_index(n, leaf, n - 1) as u32);
}

fn regular<F: FnMut(&[u32])>(
    nv: usize,
    v: usize,
    residual: &mut [usize],
    edges: &mut Vec<u32>,
    sorted: &mut Vec<u32>,
    visit: &mut F,
) {
    if v == nv {
        sorted.clear();
        sorted.extend_from_slice(edges);
        sorted.sort_unstable();
        visit(sorted);
        return;
    }
    let need = residual[v];
    let candidates: Vec<usize> = (v + 1..nv).filter(|&u| residual[u] > 0).collect();
    if need > candidates.len() {
        return;
    }
    residual[v] = 0;
    let mut chosen = Vec::with_capacity(need);
    choose(nv, v, &candidates, 0, need, &mut chosen, residual, edges, sorted, visit);
    residual[v] = need;
}

#[allow(clippy::too_many_arguments)]
fn choose<F: FnMut(&[u32])>(
    nv: usize,
    v: usize,
    candidates: &[usize],
    start: usize,
    need: usize,
    chosen: &mut Vec<usize>,
    residual: &mut [usize],
    edges: &mut Vec<u32>,
    sorted: &mut Vec<u32>,
    visit: &mut F,
) {
    if chosen.len() == need {
        for &u in chosen.iter() {
            residual[u] -= 1;
            edges.push(complete_edge_index(nv, v, u) as u32);
        }
        regular(nv, v + 1, residual, edges, sorted, visit);
        for &u in chosen.iter() {
            residual[u] += 1;
            edges.pop();
        }
        return;
    }
    for i in start..candidates.len() {
        if candidates.len() - i < need - chosen.len() {
            break;
        }
        chosen.push(candidates[i]);
        choose(nv, v, candidates, i + 1, need, chosen, residual, edges, sorted, visit);
        chosen.pop();
    }
}
