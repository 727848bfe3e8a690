//! Exact Gibbs samplers: Wilson for trees, row-by-row permanent ratios for
//! bipartite matchings, backward sampling through the Held–Karp table for
//! tours, and an enumerated table for everything else.

use rand::Rng;

use super::wilson::WilsonSampler;
use super::{GibbsSample, SampleMethod};
use crate::dual::edge_factor;
use crate::error::{Error, Result};
use crate::models::enumerate::for_each_config;
use crate::models::graph::complete_edge_index;
use crate::models::{config_weight, Configuration, ProblemModel, KFACTOR_VERTEX_CAP};
use crate::oracles::TREE_CAP;
use crate::Weights;

pub const BIPARTITE_SAMPLER_CAP: usize = 12;
pub const TSP_SAMPLER_CAP: usize = 18;

#[derive(Clone, Debug)]
enum Engine {
    Wilson(WilsonSampler),
    Bipartite { n: usize, a: Vec<f64>, h: Vec<f64> },
    Tour { n: usize, c: Vec<f64>, dp: Vec<f64> },
    Table { m: usize, edges: Vec<u32>, cumulative: Vec<f64> },
}

/// Precomputed exact sampler for one (model, weights, β).
#[derive(Clone, Debug)]
pub struct ExactSampler {
    model: ProblemModel,
    weights: Vec<f64>,
    engine: Engine,
}

impl ExactSampler {
    /// Picks the specialized method for the family, falling back to the
    /// enumerated table.
    pub fn new(model: &ProblemModel, weights: &Weights, beta: f64) -> Result<Self> {
        crate::error::check_beta(beta)?;
        model.check_weights(weights)?;
        let w = &weights.values;
        let engine = match *model {
            ProblemModel::SpanningTree { n } if n <= TREE_CAP => Engine::Wilson(WilsonSampler::new(w, beta, n)?),
            ProblemModel::MatchingBipartite { n } if n <= BIPARTITE_SAMPLER_CAP => bipartite(w, beta, n)?,
            ProblemModel::TravelingSalesman { n } if n <= TSP_SAMPLER_CAP => tour(w, beta, n)?,
            _ => table(model, w, beta)?,
        };
        Ok(Self { model: *model, weights: w.clone(), engine })
    }

    /// The enumerated-table sampler regardless of family.
    pub fn enumerated(model: &ProblemModel, weights: &Weights, beta: f64) -> Result<Self> {
        crate::error::check_beta(beta)?;
        model.check_weights(weights)?;
        let engine = table(model, &weights.values, beta)?;
        Ok(Self { model: *model, weights: weights.values.clone(), engine })
    }

    pub fn method(&self) -> SampleMethod {
        match self.engine {
            Engine::Wilson(_) => SampleMethod::Wilson,
            Engine::Bipartite { .. } => SampleMethod::SequentialExact,
            Engine::Tour { .. } => SampleMethod::DpBackward,
            Engine::Table { .. } => SampleMethod::Enumeration,
        }
    }

    pub fn model(&self) -> &ProblemModel {
        &self.model
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> GibbsSample {
        let mut edges = match &self.engine {
            Engine::Wilson(w) => w.sample_edges(rng),
            Engine::Bipartite { n, a, h } => sample_bipartite(*n, a, h, rng),
            Engine::Tour { n, c, dp } => sample_tour(*n, c, dp, rng),
            Engine::Table { m, edges, cumulative } => {
                let target = rng.gen::<f64>() * cumulative[cumulative.len() - 1];
                let i = cumulative.partition_point(|&c| c <= target).min(cumulative.len() - 1);
                edges[i * m..(i + 1) * m].to_vec()
            }
        };
        edges.sort_unstable();
        let weight = config_weight(&edges, &self.weights);
        GibbsSample {
            config: Configuration::from_sorted(self.model, edges),
            weight,
            method: self.method(),
            chain_meta: None,
        }
    }
}

/// Row-scaled factors a[i][j] and h[S] = Σ over bijections from the last |S|
/// rows onto the column set S of ∏ a.
fn bipartite(w: &[f64], beta: f64, n: usize) -> Result<Engine> {
    let mut a: Vec<f64> = w.iter().map(|&x| edge_factor(x, beta).re).collect();
    for i in 0..n {
        let row = &mut a[i * n..(i + 1) * n];
        let max = row.iter().copied().fold(0.0, f64::max);
        if max == 0.0 {
            return Err(Error::AllInfinite);
        }
        row.iter_mut().for_each(|x| *x /= max);
    }
    let full = (1usize << n) - 1;
    let mut h = vec![0.0; 1 << n];
    h[0] = 1.0;
    for set in 1..=full {
        let r = n - set.count_ones() as usize;
        let mut s = 0.0;
        let mut rest = set;
        while rest != 0 {
            let j = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            s += a[r * n + j] * h[set & !(1 << j)];
        }
        h[set] = s;
    }
    if !(h[full] > 0.0) {
        return Err(Error::AllInfinite);
    }
    Ok(Engine::Bipartite { n, a, h })
}

fn sample_bipartite<R: Rng + ?Sized>(n: usize, a: &[f64], h: &[f64], rng: &mut R) -> Vec<u32> {
    let mut set = (1usize << n) - 1;
    let mut edges = Vec::with_capacity(n);
    for r in 0..n {
        let target = rng.gen::<f64>() * h[set];
        let mut acc = 0.0;
        let mut rest = set;
        let mut pick = usize::MAX;
        while rest != 0 {
            let j = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let t = a[r * n + j] * h[set & !(1 << j)];
            if t > 0.0 {
                pick = j;
                acc += t;
                if acc > target {
                    break;
                }
            }
        }
        edges.push((r * n + pick) as u32);
        set &= !(1 << pick);
    }
    edges
}

/// Forward table dp[S][i]: sum over paths from vertex 0 through exactly the
/// vertices S ⊆ {1..n-1}, ending at vertex i + 1.
fn tour(w: &[f64], beta: f64, n: usize) -> Result<Engine> {
    let mut c = vec![0.0; n * n];
    let mut cmax: f64 = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let f = edge_factor(w[complete_edge_index(n, i, j)], beta).re;
            c[i * n + j] = f;
            c[j * n + i] = f;
            cmax = cmax.max(f);
        }
    }
    if cmax == 0.0 {
        return Err(Error::AllInfinite);
    }
    c.iter_mut().for_each(|x| *x /= cmax);
    let k = n - 1;
    let full = (1usize << k) - 1;
    let mut dp = vec![0.0; (1 << k) * k];
    for i in 0..k {
        dp[(1 << i) * k + i] = c[i + 1];
    }
    for set in 1..=full {
        for i in 0..k {
            let cur = dp[set * k + i];
            if set >> i & 1 == 0 || cur == 0.0 {
                continue;
            }
            let mut rest = full & !set;
            while rest != 0 {
                let j = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                dp[(set | 1 << j) * k + j] += cur * c[(i + 1) * n + j + 1];
            }
        }
    }
    let total: f64 = (0..k).map(|i| dp[full * k + i] * c[(i + 1) * n]).sum();
    if !(total > 0.0) {
        return Err(Error::AllInfinite);
    }
    Ok(Engine::Tour { n, c, dp })
}

fn sample_tour<R: Rng + ?Sized>(n: usize, c: &[f64], dp: &[f64], rng: &mut R) -> Vec<u32> {
    let k = n - 1;
    let mut set = (1usize << k) - 1;
    let pick = |weights: &mut dyn Iterator<Item = (usize, f64)>, rng: &mut R| -> usize {
        let items: Vec<(usize, f64)> = weights.filter(|&(_, t)| t > 0.0).collect();
        let total: f64 = items.iter().map(|&(_, t)| t).sum();
        let target = rng.gen::<f64>() * total;
        let mut acc = 0.0;
        for &(i, t) in &items {
            acc += t;
            if acc > target {
                return i;
            }
        }
        items[items.len() - 1].0
    };
    // last vertex before returning to 0
    let mut cur = pick(&mut (0..k).map(|i| (i, dp[set * k + i] * c[(i + 1) * n])), rng);
    let mut edges = vec![complete_edge_index(n, cur + 1, 0) as u32];
    while set.count_ones() > 1 {
        let prev_set = set & !(1 << cur);
        let prev = pick(
            &mut (0..k)
                .filter(|&j| prev_set >> j & 1 == 1)
                .map(|j| (j, dp[prev_set * k + j] * c[(j + 1) * n + cur + 1])),
            rng,
        );
        edges.push(complete_edge_index(n, prev + 1, cur + 1) as u32);
        set = prev_set;
        cur = prev;
    }
    edges.push(complete_edge_index(n, 0, cur + 1) as u32);
    edges
}

fn table(model: &ProblemModel, w: &[f64], beta: f64) -> Result<Engine> {
    let m = model.config_size();
    let mut edges = Vec::new();
    let mut exponents = Vec::new();
    for_each_config(model, |e| {
        edges.extend_from_slice(e);
        let wt = config_weight(e, w);
        exponents.push(if wt.is_finite() { -beta * wt } else { f64::NEG_INFINITY });
    })?;
    let top = exponents.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return Err(Error::AllInfinite);
    }
    let mut acc = 0.0;
    let cumulative = exponents
        .iter()
        .map(|&x| {
            acc += (x - top).exp();
            acc
        })
        .collect();
    Ok(Engine::Table { m, edges, cumulative })
}

/// Uniform k-factor of K_{2n}: decide edges in index order, keeping each with
/// probability (#completions with it)/(#completions).
pub(crate) fn uniform_k_factor<R: Rng + ?Sized>(model: &ProblemModel, rng: &mut R) -> Result<Vec<u32>> {
    let ProblemModel::KFactor { n, k } = *model else {
        return Err(Error::Unsupported(format!("{model} is not a k-factor model")));
    };
    let nv = 2 * n;
    if nv > KFACTOR_VERTEX_CAP {
        return Err(Error::SizeCap {
            what: "uniform k-factor sampling (vertices)",
            got: nv as u64,
            cap: KFACTOR_VERTEX_CAP as u64,
        });
    }
    use crate::models::graph::complete_edge_endpoints;
    use crate::models::kfactor::KFactorCounter;
    let ec = model.edge_count();
    let mut residual = vec![k as u8; nv];
    let mut decided = vec![false; ec];
    let mut edges = Vec::with_capacity(n * k);
    for e in 0..ec {
        let (a, b) = complete_edge_endpoints(nv, e);
        decided[e] = true;
        if residual[a] == 0 || residual[b] == 0 {
            continue;
        }
        let without = KFactorCounter::new(nv, &decided).count(&residual);
        residual[a] -= 1;
        residual[b] -= 1;
        let with = KFactorCounter::new(nv, &decided).count(&residual);
        let total = with + without;
        if (rng.gen::<f64>() * total as f64) < with as f64 {
            edges.push(e as u32);
        } else {
            residual[a] += 1;
            residual[b] += 1;
        }
        if residual.iter().all(|&r| r == 0) {
            break;
        }
    }
    Ok(edges)
}
