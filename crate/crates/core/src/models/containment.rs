//! P(Γ ⊆ π) under the uniform measure on S, as an exact rational.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::graph::DisjointSet;
use super::kfactor::KFactorCounter;
use super::{Configuration, ProblemModel, KFACTOR_VERTEX_CAP};
use crate::error::{Error, Result};

/// N(F) = n^{t-2} ∏ s_i: spanning trees of K_n containing a fixed spanning
/// forest whose t components have the given sizes.
pub fn cayley_extension_count(n: usize, component_sizes: &[usize]) -> Result<BigUint> {
    let total: usize = component_sizes.iter().sum();
    if component_sizes.is_empty() || component_sizes.contains(&0) || total != n {
        return Err(Error::param(
            "component_sizes",
            format!("need positive sizes summing to n = {n}, got {component_sizes:?}"),
        ));
    }
    let t = component_sizes.len();
    if t == 1 {
        return Ok(BigUint::one());
    }
    let prod = component_sizes.iter().fold(BigUint::one(), |acc, &s| acc * s);
    Ok(BigUint::from(n).pow((t - 2) as u32) * prod)
}

fn ratio(num: BigUint, den: BigUint) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn falling(n: usize, k: usize) -> BigUint {
    (0..k).fold(BigUint::one(), |acc, i| acc * (n - i))
}

fn degrees(model: &ProblemModel, edges: &[u32]) -> Vec<usize> {
    let mut deg = vec![0; model.vertex_count()];
    for &e in edges {
        let (a, b) = model.endpoints(e as usize);
        deg[a] += 1;
        deg[b] += 1;
    }
    deg
}

impl ProblemModel {
    /// P(Γ ⊆ π) for π uniform on S. Zero when Γ extends to no configuration.
    /// k-factors are counted exhaustively and limited to 2n <= 12.
    pub fn containment_prob(&self, gamma: &Configuration) -> Result<BigRational> {
        if gamma.model != *self {
            return Err(Error::ModelMismatch);
        }
        let edges = gamma.edges();
        let k = edges.len();
        let deg = degrees(self, edges);
        let zero = BigRational::zero();
        Ok(match *self {
            Self::MatchingBipartite { n } => {
                if deg.iter().any(|&d| d > 1) {
                    return Ok(zero);
                }
                ratio(BigUint::one(), falling(n, k))
            }
            Self::MatchingComplete { n } => {
                if deg.iter().any(|&d| d > 1) {
                    return Ok(zero);
                }
                let den = (0..k).fold(BigUint::one(), |acc, i| acc * (2 * n - 2 * i - 1));
                ratio(BigUint::one(), den)
            }
            Self::TravelingSalesman { n } => {
                if deg.iter().any(|&d| d > 2) {
                    return Ok(zero);
                }
                let mut ds = DisjointSet::new(n);
                let acyclic = edges.iter().all(|&e| {
                    let (a, b) = self.endpoints(e as usize);
                    ds.union(a, b)
                });
                let fact = |m: usize| falling(m, m);
                if !acyclic {
                    // the only admissible cycle is a full tour
                    if k == n && ds.component_sizes().len() == 1 {
                        return Ok(ratio(BigUint::from(2u32), fact(n - 1)));
                    }
                    return Ok(zero);
                }
                let s = ds.component_sizes().iter().filter(|&&c| c > 1).count();
                ratio(BigUint::from(2u32).pow(s as u32) * fact(n - k - 1), fact(n - 1))
            }
            Self::SpanningTree { n } => {
                let mut ds = DisjointSet::new(n);
                for &e in edges {
                    let (a, b) = self.endpoints(e as usize);
                    if !ds.union(a, b) {
                        return Ok(zero);
                    }
                }
                let sizes = ds.component_sizes();
                ratio(cayley_extension_count(n, &sizes)?, BigUint::from(n).pow((n - 2) as u32))
            }
            Self::KFactor { n, k: kk } => {
                let nv = 2 * n;
                if nv > KFACTOR_VERTEX_CAP {
                    return Err(Error::SizeCap {
                        what: "k-factor containment (vertices)",
                        got: nv as u64,
                        cap: KFACTOR_VERTEX_CAP as u64,
                    });
                }
                if deg.iter().any(|&d| d > kk) {
                    return Ok(zero);
                }
                let mut forbidden = vec![false; self.edge_count()];
                for &e in edges {
                    forbidden[e as usize] = true;
                }
                let residual: Vec<u8> = deg.iter().map(|&d| (kk - d) as u8).collect();
                let hits = KFactorCounter::new(nv, &forbidden).count(&residual);
                ratio(BigUint::from(hits), self.exact_count()?)
            }
        })
    }
}
