//! Sampling from the Gibbs measure P(π) ∝ e^{-βW(π)} on a fixed instance,
//! plus the overlap and typical-weight observables.

mod exact;
mod mcmc;
mod wilson;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::models::graph::complete_edge_index;
use crate::models::{Configuration, ProblemModel};
use crate::weights::WeightDistribution;

pub use exact::{ExactSampler, BIPARTITE_SAMPLER_CAP, TSP_SAMPLER_CAP};
pub use mcmc::{initial_config, mcmc_run, transition_matrix, McmcChain, McmcOptions, McmcRun};
pub use wilson::WilsonSampler;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleMethod {
    Wilson,
    SequentialExact,
    DpBackward,
    /// Inverse-CDF draw from the enumerated law.
    Enumeration,
    Mcmc,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChainMeta {
    /// Proposals made so far, burn-in included.
    pub steps: u64,
    pub acceptance_rate: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GibbsSample {
    pub config: Configuration,
    /// W(π), recomputed from the edge set.
    pub weight: f64,
    pub method: SampleMethod,
    pub chain_meta: Option<ChainMeta>,
}

/// |π ∩ π′|.
pub fn overlap(a: &Configuration, b: &Configuration) -> Result<usize> {
    if a.model != b.model {
        return Err(Error::ModelMismatch);
    }
    if let (Some(x), Some(y)) = (a.mask(), b.mask()) {
        return Ok((x & y).count_ones() as usize);
    }
    let (mut i, mut j, mut count) = (0, 0, 0);
    let (ea, eb) = (a.edges(), b.edges());
    while i < ea.len() && j < eb.len() {
        match ea[i].cmp(&eb[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    Ok(count)
}

/// (W(π) + mψ′(β))/√m.
pub fn typical_weight_observable(
    sample: &GibbsSample,
    model: &ProblemModel,
    dist: &WeightDistribution<f64>,
    beta: f64,
) -> Result<f64> {
    if !sample.weight.is_finite() {
        return Err(Error::param("sample", "configuration has infinite weight"));
    }
    let m = model.config_size() as f64;
    Ok((sample.weight + m * dist.psi_prime(beta)?) / m.sqrt())
}

/// A uniformly random member of S (the β = 0 Gibbs measure).
///
/// k-factors are drawn edge by edge from exact completion counts and are
/// limited to 2n <= 12.
pub fn uniform_config<R: Rng + ?Sized>(model: &ProblemModel, rng: &mut R) -> Result<Configuration> {
    let edges: Vec<u32> = match *model {
        ProblemModel::MatchingBipartite { n } => {
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(rng);
            (0..n).map(|i| (i * n + perm[i]) as u32).collect()
        }
        ProblemModel::MatchingComplete { n } => {
            let nv = 2 * n;
            let mut v: Vec<usize> = (0..nv).collect();
            v.shuffle(rng);
            v.chunks(2).map(|p| complete_edge_index(nv, p[0], p[1]) as u32).collect()
        }
        ProblemModel::TravelingSalesman { n } => {
            let mut v: Vec<usize> = (0..n).collect();
            v[1..].shuffle(rng);
            (0..n).map(|i| complete_edge_index(n, v[i], v[(i + 1) % n]) as u32).collect()
        }
        ProblemModel::SpanningTree { n } => {
            if n == 2 {
                vec![0]
            } else {
                let seq: Vec<usize> = (0..n - 2).map(|_| rng.gen_range(0..n)).collect();
                let mut degree = vec![0; n];
                let mut edges = Vec::with_capacity(n - 1);
                crate::models::enumerate::prufer_decode(n, &seq, &mut degree, &mut edges);
                edges
            }
        }
        ProblemModel::KFactor { .. } => exact::uniform_k_factor(model, rng)?,
    };
    let mut edges = edges;
    edges.sort_unstable();
    Ok(Configuration::from_sorted(*model, edges))
}
