//! The two computable ends of the cluster expansion: the exact normalized
//! partition function Ẑ = Z / E Z (with E Z = e^{mψ(β)}) and the product
//! surrogate ∏_e (1 + pξ_e).

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::models::ProblemModel;
use crate::oracles::log_partition;
use crate::rng::{self, Purpose};
use crate::samplers::{overlap, uniform_config};
use crate::weights::{xi_with_psi, WeightDistribution, WeightVector};
use crate::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ClusterDiagnostics<T> {
    pub log_zhat_exact: T,
    pub log_product: T,
    /// ∏(1 + pξ_e) - Ẑ.
    pub diff_linear: T,
    pub m: usize,
}

/// log Ẑ = log Z - mψ(β).
pub fn log_zhat_exact<T: Scalar>(model: &ProblemModel, weights: &WeightVector<T>, beta: T) -> Result<T> {
    let r = log_partition(model, weights, beta)?;
    Ok(r.log_z - T::from_usize_lossy(model.config_size()) * weights.distribution.psi(beta)?)
}

/// Σ_e log(1 + pξ_e). Each term is at least log(1 - p) > -∞ since ξ >= -1.
pub fn log_product<T: Scalar>(weights: &[T], beta: T, p: T, dist: &WeightDistribution<T>) -> Result<T> {
    if !(p > T::zero() && p < T::one()) {
        return Err(Error::param("p", format!("must lie in (0, 1), got {p}")));
    }
    let psi = dist.psi(beta)?;
    Ok(weights.iter().map(|&w| (p * xi_with_psi(w, beta, psi)).ln_1p()).sum())
}

/// Both sides of the cluster approximation on one instance.
pub fn cluster_diagnostics<T: Scalar>(
    model: &ProblemModel,
    weights: &WeightVector<T>,
    beta: T,
) -> Result<ClusterDiagnostics<T>> {
    let lz = log_zhat_exact(model, weights, beta)?;
    let p = model.constants().p_real::<T>();
    let lp = log_product(&weights.values, beta, p, &weights.distribution)?;
    Ok(ClusterDiagnostics {
        log_zhat_exact: lz,
        log_product: lp,
        diff_linear: lz.exp() * (lp - lz).exp_m1(),
        m: model.config_size(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClusterErrorStat {
    /// Mean over instances of (∏(1 + pξ) - Ẑ)².
    pub mean_sq_diff: f64,
    pub m: usize,
    /// m · mean_sq_diff; bounded in n if the error is O(1/m).
    pub scaled: f64,
    pub replicates: usize,
    /// Instances where every configuration had infinite weight.
    pub dropped: usize,
    /// Per-instance squared differences, in replicate order (NaN if dropped).
    pub values: Vec<f64>,
}

/// Averages (∏(1 + pξ) - Ẑ)² over independent weight instances. Instance r
/// draws its weights from the stream (seed, weights, r).
pub fn cluster_error_stat<T: Scalar>(
    model: &ProblemModel,
    dist: &WeightDistribution<T>,
    beta: T,
    replicates: usize,
    seed: u64,
) -> Result<ClusterErrorStat> {
    if replicates == 0 {
        return Err(Error::param("replicates", "must be at least 1"));
    }
    crate::oracles::check_oracle_caps(model)?;
    let values: Vec<Option<f64>> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let w = dist.sample_weights(model.edge_count(), rng::derive_seed(seed, Purpose::Weights, r as u64))?;
            match cluster_diagnostics(model, &w, beta) {
                Ok(d) => Ok(Some(d.diff_linear.as_f64().powi(2))),
                Err(Error::AllInfinite) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;
    let kept: Vec<f64> = values.iter().flatten().copied().collect();
    if kept.is_empty() {
        return Err(Error::AllInfinite);
    }
    let mean_sq_diff = kept.iter().sum::<f64>() / kept.len() as f64;
    let m = model.config_size();
    Ok(ClusterErrorStat {
        mean_sq_diff,
        m,
        scaled: m as f64 * mean_sq_diff,
        replicates: kept.len(),
        dropped: replicates - kept.len(),
        values: values.into_iter().map(|v| v.unwrap_or(f64::NAN)).collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SecondMomentEstimate {
    /// Monte Carlo mean of (1 + v²)^{|π ∩ π′|} over uniform pairs.
    pub estimate: f64,
    pub std_error: f64,
    /// e^{2γv²}, the large-n value.
    pub predicted: f64,
    pub pairs: usize,
}

/// E Ẑ² = E_{π,π′}(1 + v²)^{|π∩π′|}, estimated from independent uniform
/// pairs of configurations.
pub fn second_moment_estimate(
    model: &ProblemModel,
    dist: &WeightDistribution<f64>,
    beta: f64,
    pairs: usize,
    seed: u64,
) -> Result<SecondMomentEstimate> {
    if pairs < 2 {
        return Err(Error::param("pairs", "need at least 2"));
    }
    let v2 = dist.v_squared(beta)?;
    let base = v2.ln_1p();
    let xs: Vec<f64> = (0..pairs)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::stream(seed, Purpose::Misc, i as u64);
            let a = uniform_config(model, &mut r)?;
            let b = uniform_config(model, &mut r)?;
            Ok((base * overlap(&a, &b)? as f64).exp())
        })
        .collect::<Result<_>>()?;
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let gamma: f64 = model.constants().gamma_real();
    Ok(SecondMomentEstimate {
        estimate: mean,
        std_error: (var / n).sqrt(),
        predicted: (2.0 * gamma * v2).exp(),
        pairs,
    })
}
