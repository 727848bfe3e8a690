//! The configuration families: perfect matchings of K_{n,n} and K_{2n},
//! Hamiltonian cycles and spanning trees of K_n, and k-factors of K_{2n}.
//!
//! Edges of a complete graph K_N are indexed lexicographically by (i, j),
//! i < j. Edge (i, j) of K_{n,n} (row i, column j) has index i·n + j, and its
//! endpoints are vertices i and n + j.

pub mod containment;
pub mod count;
pub mod enumerate;
pub mod graph;
pub(crate) mod kfactor;

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::weights::WeightVector;
use crate::Scalar;

pub use containment::cayley_extension_count;
pub use count::ConfigCount;
use graph::{complete_edge_count, complete_edge_endpoints, complete_edge_index, DisjointSet};

/// Largest number of configurations any exhaustive routine will visit.
pub const ENUMERATION_CAP: u64 = 10_000_000;
/// Largest vertex count (2n) for which k-factor counts are computed exactly.
pub const KFACTOR_VERTEX_CAP: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProblemModel {
    /// Perfect matchings of K_{n,n}.
    MatchingBipartite { n: usize },
    /// Perfect matchings of K_{2n}.
    MatchingComplete { n: usize },
    /// Hamiltonian cycles of K_n.
    TravelingSalesman { n: usize },
    /// Spanning trees of K_n.
    SpanningTree { n: usize },
    /// k-regular spanning subgraphs of K_{2n}.
    KFactor { n: usize, k: usize },
}

/// |E|, m, p = m/|E| and the limiting γ = lim m²/(2|E|), exactly.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ModelConstants {
    pub edge_count: usize,
    pub m: usize,
    pub p: Ratio<u64>,
    pub gamma: Ratio<u64>,
}

impl ModelConstants {
    pub fn p_real<T: Scalar>(&self) -> T {
        T::lit(*self.p.numer() as f64 / *self.p.denom() as f64)
    }

    pub fn gamma_real<T: Scalar>(&self) -> T {
        T::lit(*self.gamma.numer() as f64 / *self.gamma.denom() as f64)
    }
}

impl ProblemModel {
    pub fn matching_bipartite(n: usize) -> Result<Self> {
        Self::MatchingBipartite { n }.validated()
    }

    pub fn matching_complete(n: usize) -> Result<Self> {
        Self::MatchingComplete { n }.validated()
    }

    pub fn traveling_salesman(n: usize) -> Result<Self> {
        Self::TravelingSalesman { n }.validated()
    }

    pub fn spanning_tree(n: usize) -> Result<Self> {
        Self::SpanningTree { n }.validated()
    }

    pub fn k_factor(n: usize, k: usize) -> Result<Self> {
        Self::KFactor { n, k }.validated()
    }

    /// Checks the family-specific minimum sizes.
    pub fn validated(self) -> Result<Self> {
        let min_n = match self {
            Self::TravelingSalesman { .. } => 3,
            _ => 2,
        };
        let n = self.n();
        if n < min_n {
            return Err(Error::param("n", format!("{} needs n >= {min_n}, got {n}", self.family())));
        }
        if n > 1 << 20 {
            return Err(Error::param("n", format!("n = {n} is unreasonably large")));
        }
        if let Self::KFactor { n, k } = self {
            if k == 0 || k >= 2 * n {
                return Err(Error::param("k", format!("need 1 <= k <= 2n-1 = {}, got {k}", 2 * n - 1)));
            }
        }
        Ok(self)
    }

    pub fn n(&self) -> usize {
        match *self {
            Self::MatchingBipartite { n }
            | Self::MatchingComplete { n }
            | Self::TravelingSalesman { n }
            | Self::SpanningTree { n }
            | Self::KFactor { n, .. } => n,
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            Self::MatchingBipartite { .. } => "matching-bipartite",
            Self::MatchingComplete { .. } => "matching-complete",
            Self::TravelingSalesman { .. } => "traveling-salesman",
            Self::SpanningTree { .. } => "spanning-tree",
            Self::KFactor { .. } => "k-factor",
        }
    }

    /// Vertices of the host graph.
    pub fn vertex_count(&self) -> usize {
        match *self {
            Self::MatchingBipartite { n } | Self::MatchingComplete { n } | Self::KFactor { n, .. } => {
                2 * n
            }
            Self::TravelingSalesman { n } | Self::SpanningTree { n } => n,
        }
    }

    /// |E| of the host graph.
    pub fn edge_count(&self) -> usize {
        match *self {
            Self::MatchingBipartite { n } => n * n,
            _ => complete_edge_count(self.vertex_count()),
        }
    }

    /// Number of edges m in every configuration.
    pub fn config_size(&self) -> usize {
        match *self {
            Self::MatchingBipartite { n }
            | Self::MatchingComplete { n }
            | Self::TravelingSalesman { n } => n,
            Self::SpanningTree { n } => n - 1,
            Self::KFactor { n, k } => n * k,
        }
    }

    pub fn constants(&self) -> ModelConstants {
        let edge_count = self.edge_count();
        let m = self.config_size();
        let gamma = match *self {
            Self::MatchingBipartite { .. } => Ratio::new(1, 2),
            Self::MatchingComplete { .. } => Ratio::new(1, 4),
            Self::TravelingSalesman { .. } | Self::SpanningTree { .. } => Ratio::from_integer(1),
            Self::KFactor { k, .. } => Ratio::new((k * k) as u64, 4),
        };
        ModelConstants { edge_count, m, p: Ratio::new(m as u64, edge_count as u64), gamma }
    }

    /// Endpoints of edge `e` as vertex ids of the host graph.
    pub fn endpoints(&self, e: usize) -> (usize, usize) {
        match *self {
            Self::MatchingBipartite { n } => (e / n, n + e % n),
            _ => complete_edge_endpoints(self.vertex_count(), e),
        }
    }

    /// Edge joining host vertices `u` and `v`, if any.
    pub fn edge_between(&self, u: usize, v: usize) -> Option<usize> {
        let nv = self.vertex_count();
        if u == v || u >= nv || v >= nv {
            return None;
        }
        match *self {
            Self::MatchingBipartite { n } => {
                let (r, c) = if u < v { (u, v) } else { (v, u) };
                (r < n && c >= n).then(|| r * n + (c - n))
            }
            _ => Some(complete_edge_index(nv, u, v)),
        }
    }

    /// Whether the edge set is a member of the configuration family.
    pub fn is_valid_config(&self, edges: &[u32]) -> bool {
        let e_count = self.edge_count();
        if edges.len() != self.config_size()
            || edges.iter().any(|&e| e as usize >= e_count)
            || edges.windows(2).any(|w| w[0] >= w[1])
        {
            return false;
        }
        let nv = self.vertex_count();
        let mut degree = vec![0usize; nv];
        for &e in edges {
            let (a, b) = self.endpoints(e as usize);
            degree[a] += 1;
            degree[b] += 1;
        }
        match *self {
            Self::MatchingBipartite { .. } | Self::MatchingComplete { .. } => {
                degree.iter().all(|&d| d == 1)
            }
            Self::KFactor { k, .. } => degree.iter().all(|&d| d == k),
            Self::TravelingSalesman { .. } => {
                degree.iter().all(|&d| d == 2) && self.is_connected(edges)
            }
            Self::SpanningTree { .. } => self.is_connected(edges),
        }
    }

    fn is_connected(&self, edges: &[u32]) -> bool {
        let mut ds = DisjointSet::new(self.vertex_count());
        for &e in edges {
            let (a, b) = self.endpoints(e as usize);
            ds.union(a, b);
        }
        ds.component_sizes().len() == 1
    }

    pub(crate) fn check_weights<T: Scalar>(&self, weights: &WeightVector<T>) -> Result<()> {
        if weights.values.len() != self.edge_count() {
            return Err(Error::LengthMismatch { expected: self.edge_count(), got: weights.values.len() });
        }
        Ok(())
    }
}

impl fmt::Display for ProblemModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::KFactor { n, k } => write!(f, "k-factor({n}, {k})"),
            _ => write!(f, "{}({})", self.family(), self.n()),
        }
    }
}

impl FromStr for ProblemModel {
    type Err = Error;

    /// Accepts `family(n)` or `family(n, k)`, as printed by `Display`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::param("model", format!("cannot parse `{s}`"));
        let (name, rest) = s.split_once('(').ok_or_else(bad)?;
        let args: Vec<usize> = rest
            .trim_end_matches(')')
            .split(',')
            .map(|t| t.trim().parse().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        build_model(name.trim(), args[0], args.get(1).copied())
    }
}

/// Builds a model from a family name and its integer parameters.
pub fn build_model(family: &str, n: usize, k: Option<usize>) -> Result<ProblemModel> {
    match (family, k) {
        ("matching-bipartite", None) => ProblemModel::matching_bipartite(n),
        ("matching-complete", None) => ProblemModel::matching_complete(n),
        ("traveling-salesman" | "tsp", None) => ProblemModel::traveling_salesman(n),
        ("spanning-tree", None) => ProblemModel::spanning_tree(n),
        ("k-factor", Some(k)) => ProblemModel::k_factor(n, k),
        ("k-factor", None) => Err(Error::param("k", "k-factor needs --k")),
        (_, Some(_)) if FAMILIES.contains(&family) => {
            Err(Error::param("k", format!("{family} takes no k parameter")))
        }
        _ => Err(Error::param(
            "model",
            format!("unknown family `{family}`; expected one of {}", FAMILIES.join(", ")),
        )),
    }
}

pub const FAMILIES: [&str; 5] =
    ["matching-bipartite", "matching-complete", "traveling-salesman", "spanning-tree", "k-factor"];

/// A set of edges of a model's host graph: either a full configuration or a
/// partial edge set used in containment queries.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Configuration {
    pub model: ProblemModel,
    edges: Vec<u32>,
    mask: Option<u128>,
}

impl Configuration {
    /// Sorts and deduplicates `edges`.
    pub fn new(model: ProblemModel, mut edges: Vec<u32>) -> Result<Self> {
        edges.sort_unstable();
        edges.dedup();
        let e_count = model.edge_count();
        if let Some(&last) = edges.last() {
            if last as usize >= e_count {
                return Err(Error::param("edges", format!("edge {last} out of range 0..{e_count}")));
            }
        }
        Ok(Self::from_sorted(model, edges))
    }

    pub(crate) fn from_sorted(model: ProblemModel, edges: Vec<u32>) -> Self {
        let mask = (model.edge_count() <= 128)
            .then(|| edges.iter().fold(0u128, |acc, &e| acc | (1u128 << e)));
        Self { model, edges, mask }
    }

    pub fn edges(&self) -> &[u32] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Bit-mask mirror of the edge set, present when |E| <= 128.
    pub fn mask(&self) -> Option<u128> {
        self.mask
    }

    pub fn contains(&self, edge: u32) -> bool {
        match self.mask {
            Some(m) => edge < 128 && m >> edge & 1 == 1,
            None => self.edges.binary_search(&edge).is_ok(),
        }
    }

    pub fn is_valid(&self) -> bool {
        self.model.is_valid_config(&self.edges)
    }

    /// W(π) = Σ_{e∈π} ω_e; +∞ if any member edge is +∞.
    pub fn weight<T: Scalar>(&self, weights: &WeightVector<T>) -> T {
        config_weight(&self.edges, &weights.values)
    }
}

pub(crate) fn config_weight<T: Scalar>(edges: &[u32], values: &[T]) -> T {
    edges.iter().map(|&e| values[e as usize]).fold(T::zero(), |a, b| a + b)
}
