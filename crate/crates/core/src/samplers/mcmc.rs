//! Metropolis chains with family-specific local moves.
//!
//! Every move type draws a uniform index from a fixed range that depends only
//! on the model, and maps it to "stay", "leave S" (rejected) or a concrete
//! edge exchange; the reverse exchange is always reachable through exactly as
//! many indices, so the proposal is symmetric and Metropolis acceptance
//! targets P(π) ∝ e^{-βW(π)}.

use std::collections::VecDeque;

use rand::Rng;

use super::{ChainMeta, GibbsSample, SampleMethod};
use crate::error::{check_beta, Error, Result};
use crate::models::enumerate::for_each_config;
use crate::models::graph::complete_edge_index;
use crate::models::{config_weight, Configuration, ProblemModel};
use crate::Weights;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Op {
    /// Swap the columns of rows i and j.
    Swap(usize, usize),
    /// Re-pair a with c (and their old partners with each other).
    Rewire(usize, usize),
    /// Reverse order[i+1..=j].
    Reverse(usize, usize),
    /// Add edge, drop edge.
    TreeSwap(u32, u32),
    /// Replace the edges at positions p1, p2 by the two new ones.
    Switch(usize, usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Proposal {
    removed: [u32; 2],
    added: [u32; 2],
    len: usize,
    op: Op,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Outcome {
    Stay,
    /// The proposal leaves S and is rejected.
    Invalid,
    Move(Proposal),
}

#[derive(Clone, Debug)]
enum State {
    Bipartite { n: usize, sigma: Vec<usize> },
    Complete { nv: usize, partner: Vec<usize> },
    Tour { n: usize, order: Vec<usize> },
    Tree { n: usize, edges: Vec<u32>, adj: Vec<Vec<usize>> },
    KFactor { nv: usize, edges: Vec<u32>, has: Vec<bool> },
}

impl State {
    fn from_config(model: &ProblemModel, edges: &[u32]) -> Self {
        match *model {
            ProblemModel::MatchingBipartite { n } => {
                let mut sigma = vec![0; n];
                for &e in edges {
                    sigma[e as usize / n] = e as usize % n;
                }
                State::Bipartite { n, sigma }
            }
            ProblemModel::MatchingComplete { n } => {
                let mut partner = vec![0; 2 * n];
                for &e in edges {
                    let (a, b) = model.endpoints(e as usize);
                    partner[a] = b;
                    partner[b] = a;
                }
                State::Complete { nv: 2 * n, partner }
            }
            ProblemModel::TravelingSalesman { n } => {
                let adj = adjacency(model, edges);
                let mut order = vec![0usize, adj[0][0].min(adj[0][1])];
                while order.len() < n {
                    let (prev, cur) = (order[order.len() - 2], order[order.len() - 1]);
                    order.push(if adj[cur][0] == prev { adj[cur][1] } else { adj[cur][0] });
                }
                State::Tour { n, order }
            }
            ProblemModel::SpanningTree { n } => {
                State::Tree { n, edges: edges.to_vec(), adj: adjacency(model, edges) }
            }
            ProblemModel::KFactor { n, .. } => {
                let mut has = vec![false; model.edge_count()];
                edges.iter().for_each(|&e| has[e as usize] = true);
                State::KFactor { nv: 2 * n, edges: edges.to_vec(), has }
            }
        }
    }

    /// Size of the uniform index range proposals are drawn from.
    fn proposal_count(&self) -> usize {
        match self {
            State::Bipartite { n, .. } | State::Tour { n, .. } => n * n,
            State::Complete { nv, .. } => nv * nv,
            State::Tree { n, .. } => n * (n - 1) / 2 * (n - 1),
            State::KFactor { edges, .. } => 2 * edges.len() * edges.len(),
        }
    }

    fn propose(&self, idx: usize) -> Outcome {
        match self {
            State::Bipartite { n, sigma } => {
                let (i, j) = (idx / n, idx % n);
                if i == j {
                    return Outcome::Stay;
                }
                Outcome::Move(Proposal {
                    removed: [(i * n + sigma[i]) as u32, (j * n + sigma[j]) as u32],
                    added: [(i * n + sigma[j]) as u32, (j * n + sigma[i]) as u32],
                    len: 2,
                    op: Op::Swap(i, j),
                })
            }
            State::Complete { nv, partner } => {
                let (a, c) = (idx / nv, idx % nv);
                if a == c || partner[a] == c {
                    return Outcome::Stay;
                }
                let (b, d) = (partner[a], partner[c]);
                let e = |x, y| complete_edge_index(*nv, x, y) as u32;
                Outcome::Move(Proposal {
                    removed: [e(a, b), e(c, d)],
                    added: [e(a, c), e(b, d)],
                    len: 2,
                    op: Op::Rewire(a, c),
                })
            }
            State::Tour { n, order } => {
                let (i, j) = (idx / n, idx % n);
                if j < i + 2 || (i == 0 && j == n - 1) {
                    return Outcome::Stay;
                }
                let e = |x, y| complete_edge_index(*n, x, y) as u32;
                let (oi, oi1, oj, oj1) = (order[i], order[i + 1], order[j], order[(j + 1) % n]);
                Outcome::Move(Proposal {
                    removed: [e(oi, oi1), e(oj, oj1)],
                    added: [e(oi, oj), e(oi1, oj1)],
                    len: 2,
                    op: Op::Reverse(i, j),
                })
            }
            State::Tree { n, edges, adj } => {
                let (e, r) = (idx / (n - 1), idx % (n - 1));
                let e = e as u32;
                if edges.contains(&e) {
                    return Outcome::Stay;
                }
                let path = tree_path(*n, adj, e as usize);
                if r >= path.len() {
                    return Outcome::Stay;
                }
                Outcome::Move(Proposal { removed: [path[r], 0], added: [e, 0], len: 1, op: Op::TreeSwap(e, path[r]) })
            }
            State::KFactor { nv, edges, has } => {
                let m = edges.len();
                let (p1, rem) = (idx / (2 * m), idx % (2 * m));
                let (p2, flip) = (rem / 2, rem % 2 == 1);
                if p1 == p2 {
                    return Outcome::Stay;
                }
                let (a, b) = crate::models::graph::complete_edge_endpoints(*nv, edges[p1] as usize);
                let (mut c, mut d) = crate::models::graph::complete_edge_endpoints(*nv, edges[p2] as usize);
                if flip {
                    std::mem::swap(&mut c, &mut d);
                }
                if a == c || b == d {
                    return Outcome::Invalid;
                }
                let (ac, bd) = (complete_edge_index(*nv, a, c), complete_edge_index(*nv, b, d));
                if has[ac] || has[bd] {
                    return Outcome::Invalid;
                }
                Outcome::Move(Proposal {
                    removed: [edges[p1], edges[p2]],
                    added: [ac as u32, bd as u32],
                    len: 2,
                    op: Op::Switch(p1, p2),
                })
            }
        }
    }

    fn apply(&mut self, model: &ProblemModel, p: &Proposal) {
        match (self, p.op) {
            (State::Bipartite { sigma, .. }, Op::Swap(i, j)) => sigma.swap(i, j),
            (State::Complete { partner, .. }, Op::Rewire(a, c)) => {
                let (b, d) = (partner[a], partner[c]);
                partner[a] = c;
                partner[c] = a;
                partner[b] = d;
                partner[d] = b;
            }
            (State::Tour { order, .. }, Op::Reverse(i, j)) => order[i + 1..=j].reverse(),
            (State::Tree { edges, adj, .. }, Op::TreeSwap(add, drop)) => {
                let pos = edges.iter().position(|&x| x == drop).expect("dropped edge in tree");
                edges[pos] = add;
                let (u, v) = model.endpoints(drop as usize);
                adj[u].retain(|&x| x != v);
                adj[v].retain(|&x| x != u);
                let (u, v) = model.endpoints(add as usize);
                adj[u].push(v);
                adj[v].push(u);
            }
            (State::KFactor { edges, has, .. }, Op::Switch(p1, p2)) => {
                for &e in &p.removed {
                    has[e as usize] = false;
                }
                for &e in &p.added {
                    has[e as usize] = true;
                }
                edges[p1] = p.added[0];
                edges[p2] = p.added[1];
            }
            _ => unreachable!("proposal built for another state"),
        }
    }

    fn sorted_edges(&self) -> Vec<u32> {
        let mut out: Vec<u32> = match self {
            State::Bipartite { n, sigma } => (0..*n).map(|i| (i * n + sigma[i]) as u32).collect(),
            State::Complete { nv, partner } => (0..*nv)
                .filter(|&a| a < partner[a])
                .map(|a| complete_edge_index(*nv, a, partner[a]) as u32)
                .collect(),
            State::Tour { n, order } => {
                (0..*n).map(|i| complete_edge_index(*n, order[i], order[(i + 1) % n]) as u32).collect()
            }
            State::Tree { edges, .. } | State::KFactor { edges, .. } => edges.clone(),
        };
        out.sort_unstable();
        out
    }
}

fn adjacency(model: &ProblemModel, edges: &[u32]) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); model.vertex_count()];
    for &e in edges {
        let (a, b) = model.endpoints(e as usize);
        adj[a].push(b);
        adj[b].push(a);
    }
    adj
}

/// Edges of the tree path between the endpoints of `e`, listed from the
/// smaller endpoint to the larger.
fn tree_path(n: usize, adj: &[Vec<usize>], e: usize) -> Vec<u32> {
    let (u, v) = crate::models::graph::complete_edge_endpoints(n, e);
    let mut parent = vec![usize::MAX; n];
    parent[v] = v;
    let mut queue = VecDeque::from([v]);
    while let Some(x) = queue.pop_front() {
        if x == u {
            break;
        }
        for &y in &adj[x] {
            if parent[y] == usize::MAX {
                parent[y] = x;
                queue.push_back(y);
            }
        }
    }
    // walk from u towards the BFS root v
    let mut path = Vec::new();
    let mut x = u;
    while x != v {
        let p = parent[x];
        path.push(complete_edge_index(n, x, p) as u32);
        x = p;
    }
    path
}

/// A valid starting configuration for every family.
pub fn initial_config(model: &ProblemModel) -> Configuration {
    let e = |nv: usize, a: usize, b: usize| complete_edge_index(nv, a, b) as u32;
    let mut edges: Vec<u32> = match *model {
        ProblemModel::MatchingBipartite { n } => (0..n).map(|i| (i * n + i) as u32).collect(),
        ProblemModel::MatchingComplete { n } => (0..n).map(|i| e(2 * n, 2 * i, 2 * i + 1)).collect(),
        ProblemModel::TravelingSalesman { n } => (0..n).map(|i| e(n, i, (i + 1) % n)).collect(),
        ProblemModel::SpanningTree { n } => (1..n).map(|i| e(n, i - 1, i)).collect(),
        ProblemModel::KFactor { n, k } => {
            // circulant graph: offsets 1..=k/2, plus the antipode for odd k
            let nv = 2 * n;
            let mut out = Vec::new();
            for v in 0..nv {
                for s in 1..=k / 2 {
                    out.push(e(nv, v, (v + s) % nv));
                }
                if k % 2 == 1 && v < n {
                    out.push(e(nv, v, v + n));
                }
            }
            out
        }
    };
    edges.sort_unstable();
    edges.dedup();
    Configuration::from_sorted(*model, edges)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct McmcOptions {
    /// Accepted moves discarded before the first retained sample.
    pub burn_in: u64,
    /// Proposals between retained samples.
    pub thin: u64,
    /// Upper limit on burn-in proposals, in case acceptance is tiny.
    pub max_burn_in_proposals: u64,
}

impl McmcOptions {
    /// 50·m accepted moves of burn-in, m proposals between samples.
    pub fn defaults(model: &ProblemModel) -> Self {
        let m = model.config_size() as u64;
        Self { burn_in: 50 * m, thin: m, max_burn_in_proposals: 1000 * 50 * m }
    }
}

/// A Metropolis chain on one instance. Owns its random stream.
pub struct McmcChain<'w, R> {
    model: ProblemModel,
    weights: &'w [f64],
    beta: f64,
    state: State,
    infinite: usize,
    finite: f64,
    proposals: u64,
    valid: u64,
    accepted: u64,
    rng: R,
}

impl<'w, R: Rng> McmcChain<'w, R> {
    /// Starts from `start`, or from [`initial_config`] if `None`.
    pub fn new(
        model: &ProblemModel,
        weights: &'w Weights,
        beta: f64,
        start: Option<&Configuration>,
        rng: R,
    ) -> Result<Self> {
        check_beta(beta)?;
        model.check_weights(weights)?;
        let start = start.cloned().unwrap_or_else(|| initial_config(model));
        if start.model != *model || !start.is_valid() {
            return Err(Error::param("start", "not a valid configuration of the model"));
        }
        let w = &weights.values;
        let infinite = start.edges().iter().filter(|&&e| w[e as usize].is_infinite()).count();
        let finite = start.edges().iter().map(|&e| w[e as usize]).filter(|x| x.is_finite()).sum();
        Ok(Self {
            model: *model,
            weights: w,
            beta,
            state: State::from_config(model, start.edges()),
            infinite,
            finite,
            proposals: 0,
            valid: 0,
            accepted: 0,
            rng,
        })
    }

    /// One proposal and accept/reject; returns whether the state changed.
    pub fn step(&mut self) -> bool {
        self.proposals += 1;
        let idx = self.rng.gen_range(0..self.state.proposal_count());
        match self.state.propose(idx) {
            Outcome::Stay => {
                self.valid += 1;
                self.accepted += 1;
                false
            }
            Outcome::Invalid => false,
            Outcome::Move(p) => {
                self.valid += 1;
                let (d_inf, d_fin) = delta(self.weights, &p);
                let new_inf = self.infinite as isize + d_inf;
                let accept = if new_inf != self.infinite as isize {
                    new_inf < self.infinite as isize
                } else {
                    let log_ratio = -self.beta * d_fin;
                    log_ratio >= 0.0 || self.rng.gen::<f64>() < log_ratio.exp()
                };
                if accept {
                    self.state.apply(&self.model, &p);
                    self.infinite = new_inf as usize;
                    self.finite += d_fin;
                    self.accepted += 1;
                }
                accept
            }
        }
    }

    /// Accepted / proposals that stayed inside S.
    pub fn acceptance_rate(&self) -> f64 {
        if self.valid == 0 {
            return 1.0;
        }
        self.accepted as f64 / self.valid as f64
    }

    pub fn proposals(&self) -> u64 {
        self.proposals
    }

    pub fn accepted(&self) -> u64 {
        self.accepted
    }

    /// Running W(π), accumulated incrementally (may drift in the last bits).
    pub fn running_weight(&self) -> f64 {
        if self.infinite > 0 {
            f64::INFINITY
        } else {
            self.finite
        }
    }

    /// The current state as a sample; the weight is recomputed exactly.
    pub fn current(&self) -> GibbsSample {
        let edges = self.state.sorted_edges();
        let weight = config_weight(&edges, self.weights);
        GibbsSample {
            config: Configuration::from_sorted(self.model, edges),
            weight,
            method: SampleMethod::Mcmc,
            chain_meta: Some(ChainMeta { steps: self.proposals, acceptance_rate: self.acceptance_rate() }),
        }
    }

    /// Runs until `accepted` moves have been accepted or `max_proposals`
    /// proposals made.
    pub fn burn_in(&mut self, accepted: u64, max_proposals: u64) {
        let (a0, p0) = (self.accepted, self.proposals);
        while self.accepted - a0 < accepted && self.proposals - p0 < max_proposals {
            self.step();
        }
    }

    /// `thin` proposals, then the current state.
    pub fn next_sample(&mut self, thin: u64) -> GibbsSample {
        for _ in 0..thin {
            self.step();
        }
        self.current()
    }
}

fn delta(w: &[f64], p: &Proposal) -> (isize, f64) {
    let mut d_inf = 0isize;
    let mut d_fin = 0.0;
    for &e in &p.added[..p.len] {
        let x = w[e as usize];
        if x.is_infinite() {
            d_inf += 1;
        } else {
            d_fin += x;
        }
    }
    for &e in &p.removed[..p.len] {
        let x = w[e as usize];
        if x.is_infinite() {
            d_inf -= 1;
        } else {
            d_fin -= x;
        }
    }
    (d_inf, d_fin)
}

#[derive(Clone, Debug)]
pub struct McmcRun {
    pub samples: Vec<GibbsSample>,
    pub acceptance_rate: f64,
    pub burn_in_proposals: u64,
}

/// Burn-in followed by `samples` retained states, `options.thin` proposals
/// apart.
pub fn mcmc_run<R: Rng>(
    model: &ProblemModel,
    weights: &Weights,
    beta: f64,
    samples: usize,
    options: McmcOptions,
    rng: R,
) -> Result<McmcRun> {
    if options.thin == 0 {
        return Err(Error::param("thin", "must be at least 1"));
    }
    let mut chain = McmcChain::new(model, weights, beta, None, rng)?;
    chain.burn_in(options.burn_in, options.max_burn_in_proposals);
    let burn_in_proposals = chain.proposals();
    let samples = (0..samples).map(|_| chain.next_sample(options.thin)).collect();
    Ok(McmcRun { samples, acceptance_rate: chain.acceptance_rate(), burn_in_proposals })
}

/// The exact one-step transition matrix of the chain over the enumerated S:
/// row x gives P(x → y) for every y, in enumeration order.
pub fn transition_matrix(model: &ProblemModel, weights: &Weights, beta: f64) -> Result<(Vec<Vec<u32>>, Vec<Vec<f64>>)> {
    check_beta(beta)?;
    model.check_weights(weights)?;
    let mut configs = Vec::new();
    for_each_config(model, |e| configs.push(e.to_vec()))?;
    let index: std::collections::HashMap<Vec<u32>, usize> =
        configs.iter().enumerate().map(|(i, c)| (c.clone(), i)).collect();
    let w = &weights.values;
    let mut matrix = vec![vec![0.0; configs.len()]; configs.len()];
    for (x, cfg) in configs.iter().enumerate() {
        let state = State::from_config(model, cfg);
        let count = state.proposal_count();
        let q = 1.0 / count as f64;
        let inf_x = cfg.iter().filter(|&&e| w[e as usize].is_infinite()).count() as isize;
        for idx in 0..count {
            match state.propose(idx) {
                Outcome::Stay | Outcome::Invalid => matrix[x][x] += q,
                Outcome::Move(p) => {
                    let (d_inf, d_fin) = delta(w, &p);
                    let a = if d_inf != 0 {
                        if inf_x + d_inf < inf_x { 1.0 } else { 0.0 }
                    } else {
                        (-beta * d_fin).exp().min(1.0)
                    };
                    let mut next = state.clone();
                    next.apply(model, &p);
                    let y = index[&next.sorted_edges()];
                    matrix[x][y] += q * a;
                    matrix[x][x] += q * (1.0 - a);
                }
            }
        }
    }
    Ok((configs, matrix))
}
