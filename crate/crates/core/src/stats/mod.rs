//! Goodness-of-fit statistics and the replicated experiment driver.

mod experiment;

use statrs::distribution::{Discrete, DiscreteCDF, Poisson};

use crate::error::{Error, Result};

pub use experiment::{
    run_experiment, Check, ExperimentReport, ExperimentSpec, GroupReport, Observable, SamplerChoice, Thresholds,
    Values,
};

/// Kolmogorov–Smirnov distance between the empirical CDF of `samples`
/// (sorted ascending) and `cdf`.
///
/// Ties are handled as one jump, and the theoretical CDF is evaluated just
/// left of each sample as well, so a discrete target is compared correctly.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<f64> {
    if samples.len() < 2 {
        return Err(Error::param("samples", format!("need at least 2, got {}", samples.len())));
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(Error::param("samples", "contains NaN"));
    }
    if samples.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Unsorted);
    }
    let n = samples.len() as f64;
    let mut d = 0.0f64;
    let mut i = 0;
    while i < samples.len() {
        let x = samples[i];
        let mut j = i;
        while j < samples.len() && samples[j] == x {
            j += 1;
        }
        let below = i as f64 / n;
        let at = j as f64 / n;
        d = d.max(cdf(x.next_down()) - below).max(at - cdf(x));
        i = j;
    }
    Ok(d.clamp(0.0, 1.0))
}

/// Counts of each value 0..=max.
pub fn histogram(values: &[u64]) -> Vec<u64> {
    let len = values.iter().max().map_or(0, |&m| m as usize + 1);
    let mut h = vec![0; len];
    for &v in values {
        h[v as usize] += 1;
    }
    h
}

/// Total-variation distance between the empirical law given by `counts`
/// (counts[k] = number of observations equal to k) and Poisson(λ). The
/// Poisson mass above the largest observed k is added as one term.
pub fn tv_distance_poisson(counts: &[u64], lambda: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::param("lambda", format!("must be positive and finite, got {lambda}")));
    }
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(Error::Empty("histogram is empty"));
    }
    let pois = Poisson::new(lambda).map_err(|e| Error::param("lambda", e.to_string()))?;
    let kmax = counts.iter().rposition(|&c| c > 0).unwrap_or(0);
    let mut sum = 0.0;
    for (k, &c) in counts.iter().enumerate().take(kmax + 1) {
        sum += (c as f64 / total as f64 - pois.pmf(k as u64)).abs();
    }
    sum += pois.sf(kmax as u64);
    Ok((0.5 * sum).clamp(0.0, 1.0))
}

/// Sample mean and unbiased sample variance, two-pass.
pub fn mean_var(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, f64::NAN);
    }
    let ss: f64 = values.iter().map(|x| (x - mean).powi(2)).sum();
    (mean, ss / (n - 1.0))
}

/// (x̄ - μ) / √(σ²/R).
pub fn mean_z(values: &[f64], mean: f64, variance: f64) -> f64 {
    let (m, _) = mean_var(values);
    (m - mean) / (variance / values.len() as f64).sqrt()
}

/// Sample variance over σ².
pub fn var_ratio(values: &[f64], variance: f64) -> f64 {
    mean_var(values).1 / variance
}
