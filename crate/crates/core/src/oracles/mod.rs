//! Exact log Z(β) = log((1/|S|) Σ_π e^{-βW(π)}) and its β-derivative.
//!
//! Each method runs its recursion over dual numbers, so `dlogz_dbeta` is the
//! exact derivative -⟨W⟩_β rather than a finite difference.

mod brute;
mod marginal;
mod permanent;
mod tree;
mod tsp;

use std::fmt;

use serde::Serialize;

use crate::error::{check_beta, Result};
use crate::models::ProblemModel;
use crate::weights::WeightVector;
use crate::Scalar;

pub use brute::{brute_force_log_partition, gibbs_law, GibbsLaw};
pub use marginal::{edge_marginal, edge_marginals, marginal_approximation};
pub use permanent::{permanent_log_deriv, PERMANENT_CAP};
pub use tree::{max_conductance, reduced_laplacian_inverse, tree_partition_matrix, TREE_CAP};
pub use tsp::{tsp_partition_dp, TSP_CAP};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Permanent,
    SubsetDp,
    MatrixTree,
    BruteForce,
    HafnianBruteforce,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Permanent => "permanent",
            Self::SubsetDp => "subset_dp",
            Self::MatrixTree => "matrix_tree",
            Self::BruteForce => "brute_force",
            Self::HafnianBruteforce => "hafnian_bruteforce",
        })
    }
}

/// log of a positive quantity together with the β-derivative of that log.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogDual<T> {
    pub log: T,
    pub dlog: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PartitionResult<T> {
    pub log_z: T,
    pub dlogz_dbeta: T,
    pub method: Method,
    pub beta: T,
    /// Seed of the weight instance the result was computed on.
    pub instance_seed: u64,
}

impl<T: Scalar> PartitionResult<T> {
    /// ⟨W(π)⟩_β = -d log Z / dβ.
    pub fn gibbs_mean_weight(&self) -> T {
        -self.dlogz_dbeta
    }
}

/// Which method [`log_partition`] uses for a model.
pub fn default_method(model: &ProblemModel) -> Method {
    match model {
        ProblemModel::MatchingBipartite { .. } => Method::Permanent,
        ProblemModel::TravelingSalesman { .. } => Method::SubsetDp,
        ProblemModel::SpanningTree { .. } => Method::MatrixTree,
        ProblemModel::MatchingComplete { .. } => Method::HafnianBruteforce,
        ProblemModel::KFactor { .. } => Method::BruteForce,
    }
}

/// Size caps of the dispatched methods, checked before any work is done.
pub fn check_oracle_caps(model: &ProblemModel) -> Result<()> {
    use crate::error::Error;
    let cap = |what, got: usize, cap: usize| {
        if got > cap {
            Err(Error::SizeCap { what, got: got as u64, cap: cap as u64 })
        } else {
            Ok(())
        }
    };
    match *model {
        ProblemModel::MatchingBipartite { n } => cap("permanent oracle (n)", n, PERMANENT_CAP),
        ProblemModel::TravelingSalesman { n } => cap("subset DP oracle (n)", n, TSP_CAP),
        ProblemModel::SpanningTree { n } => cap("matrix-tree oracle (n)", n, TREE_CAP),
        ProblemModel::MatchingComplete { .. } | ProblemModel::KFactor { .. } => {
            model.check_enumerable().map(|_| ())
        }
    }
}

/// Exact log Z(β) for the instance, including the 1/|S| normalization.
///
/// Errors with [`crate::Error::AllInfinite`] when every configuration has an
/// infinite edge.
pub fn log_partition<T: Scalar>(
    model: &ProblemModel,
    weights: &WeightVector<T>,
    beta: T,
) -> Result<PartitionResult<T>> {
    check_beta(beta.as_f64())?;
    model.check_weights(weights)?;
    check_oracle_caps(model)?;
    let method = default_method(model);
    let w = &weights.values;
    let r = match *model {
        ProblemModel::MatchingBipartite { n } => {
            let mut a = Vec::with_capacity(n * n);
            a.extend(w.iter().map(|&x| crate::dual::edge_factor(x, beta)));
            let p = permanent_log_deriv(&a, n)?;
            LogDual { log: p.log - model.ln_count_as::<T>(), dlog: p.dlog }
        }
        ProblemModel::TravelingSalesman { n } => tsp_partition_dp(w, beta, n)?,
        ProblemModel::SpanningTree { n } => tree_partition_matrix(w, beta, n)?,
        ProblemModel::MatchingComplete { .. } | ProblemModel::KFactor { .. } => {
            brute_force_log_partition(model, weights, beta)?
        }
    };
    Ok(PartitionResult { log_z: r.log, dlogz_dbeta: r.dlog, method, beta, instance_seed: weights.source_seed })
}

impl ProblemModel {
    pub(crate) fn ln_count_as<T: Scalar>(&self) -> T {
        T::lit(self.ln_count())
    }
}
