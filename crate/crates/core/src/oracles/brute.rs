//! Exhaustive sums over S; the reference every specialized oracle is
//! checked against.

use super::LogDual;
use crate::dual::CompensatedSum;
use crate::error::{check_beta, Error, Result};
use crate::models::enumerate::for_each_config;
use crate::models::{config_weight, ProblemModel};
use crate::weights::WeightVector;
use crate::Scalar;

/// log Z and its β-derivative by enumerating S. Two passes: the first finds
/// the largest exponent -βW, the second sums shifted terms.
pub fn brute_force_log_partition<T: Scalar>(
    model: &ProblemModel,
    weights: &WeightVector<T>,
    beta: T,
) -> Result<LogDual<T>> {
    check_beta(beta.as_f64())?;
    model.check_weights(weights)?;
    let w = &weights.values;
    let mut top = T::neg_infinity();
    for_each_config(model, |e| {
        let wt = config_weight(e, w);
        if wt.is_finite() {
            top = top.max(-beta * wt);
        }
    })?;
    if top == T::neg_infinity() {
        return Err(Error::AllInfinite);
    }
    let mut z = CompensatedSum::new();
    let mut zw = CompensatedSum::new();
    for_each_config(model, |e| {
        let wt = config_weight(e, w);
        if wt.is_finite() {
            let t = (-beta * wt - top).exp();
            z.add(t);
            zw.add(wt * t);
        }
    })?;
    let (z, zw) = (z.value(), zw.value());
    Ok(LogDual { log: z.ln() + top - model.ln_count_as::<T>(), dlog: -zw / z })
}

/// The Gibbs law of a small instance, listed configuration by configuration.
#[derive(Clone, Debug)]
pub struct GibbsLaw<T> {
    /// Sorted edge lists in enumeration order.
    pub configs: Vec<Vec<u32>>,
    pub weights: Vec<T>,
    pub probs: Vec<T>,
}

impl<T: Scalar> GibbsLaw<T> {
    /// Position of a configuration in `configs`.
    pub fn index_of(&self, edges: &[u32]) -> Option<usize> {
        self.configs.iter().position(|c| c == edges)
    }

    /// Σ_π W(π) P(π), skipping zero-probability configurations.
    pub fn mean_weight(&self) -> T {
        self.weights
            .iter()
            .zip(&self.probs)
            .filter(|(_, &p)| p > T::zero())
            .map(|(&w, &p)| w * p)
            .sum()
    }
}

/// Exact Gibbs probabilities P(π) ∝ e^{-βW(π)} by enumeration.
pub fn gibbs_law<T: Scalar>(model: &ProblemModel, weights: &WeightVector<T>, beta: T) -> Result<GibbsLaw<T>> {
    check_beta(beta.as_f64())?;
    model.check_weights(weights)?;
    let mut configs = Vec::new();
    let mut ws = Vec::new();
    for_each_config(model, |e| {
        configs.push(e.to_vec());
        ws.push(config_weight(e, &weights.values));
    })?;
    let top = ws.iter().filter(|w| w.is_finite()).fold(T::neg_infinity(), |m, &w| m.max(-beta * w));
    if top == T::neg_infinity() {
        return Err(Error::AllInfinite);
    }
    let mut probs: Vec<T> =
        ws.iter().map(|&w| if w.is_finite() { (-beta * w - top).exp() } else { T::zero() }).collect();
    let mut total = CompensatedSum::new();
    probs.iter().for_each(|&p| total.add(p));
    let total = total.value();
    probs.iter_mut().for_each(|p| *p /= total);
    Ok(GibbsLaw { configs, weights: ws, probs })
}
