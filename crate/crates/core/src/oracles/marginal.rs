//! Exact Gibbs edge marginals P_β(e ∈ π).

use super::permanent::permanent_log_deriv;
use super::tree::{max_conductance, reduced_laplacian_inverse};
use super::tsp::{factor_matrix, hamiltonian_paths_from, TSP_CAP};
use super::{brute::gibbs_law, check_oracle_caps};
use crate::dual::{edge_factor, Dual};
use crate::error::{check_beta, Error, Result};
use crate::models::ProblemModel;
use crate::weights::WeightVector;
use crate::Scalar;

/// P_β(e ∈ π) for every edge e. The entries sum to m.
///
/// Trees use effective resistances, P(e) = c_e R_eff(e) (the ratio of the
/// contracted to the full tree determinant); bipartite matchings use
/// permanents of minors; Hamiltonian cycles use path DPs rooted at each
/// vertex; the other families enumerate.
pub fn edge_marginals<T: Scalar>(model: &ProblemModel, weights: &WeightVector<T>, beta: T) -> Result<Vec<T>> {
    check_beta(beta.as_f64())?;
    model.check_weights(weights)?;
    check_oracle_caps(model)?;
    let w = &weights.values;
    match *model {
        ProblemModel::SpanningTree { n } => tree_marginals(w, beta, n),
        ProblemModel::MatchingBipartite { n } => bipartite_marginals(w, beta, n),
        ProblemModel::TravelingSalesman { n } => tsp_marginals(w, beta, n),
        ProblemModel::MatchingComplete { .. } | ProblemModel::KFactor { .. } => {
            let law = gibbs_law(model, weights, beta)?;
            let mut out = vec![T::zero(); model.edge_count()];
            for (c, &p) in law.configs.iter().zip(&law.probs) {
                for &e in c {
                    out[e as usize] += p;
                }
            }
            Ok(out)
        }
    }
}

/// P_β(e ∈ π) for one edge.
pub fn edge_marginal<T: Scalar>(
    model: &ProblemModel,
    weights: &WeightVector<T>,
    beta: T,
    edge: usize,
) -> Result<T> {
    if edge >= model.edge_count() {
        return Err(Error::param("edge", format!("edge {edge} out of range 0..{}", model.edge_count())));
    }
    Ok(edge_marginals(model, weights, beta)?[edge])
}

/// p(1+ξ)/(1+pξ): the leading-order prediction for an edge marginal from the
/// edge's own tilt ξ.
pub fn marginal_approximation<T: Scalar>(p: T, xi: T) -> T {
    p * (T::one() + xi) / (T::one() + p * xi)
}

fn tree_marginals<T: Scalar>(w: &[T], beta: T, n: usize) -> Result<Vec<T>> {
    let inv = reduced_laplacian_inverse(w, beta, n)?;
    let scale = max_conductance(w, beta).recip();
    let k = n - 1;
    // grounded Green's function; vertex 0 maps to None
    let g = |a: usize, b: usize| -> T {
        if a == 0 || b == 0 {
            T::zero()
        } else {
            inv[(a - 1) * k + (b - 1)]
        }
    };
    let mut out = Vec::with_capacity(w.len());
    for i in 0..n {
        for j in i + 1..n {
            let c = edge_factor(w[out.len()], beta).re * scale;
            let r = g(i, i) + g(j, j) - g(i, j) - g(j, i);
            out.push((c * r).min(T::one()).max(T::zero()));
        }
    }
    Ok(out)
}

fn bipartite_marginals<T: Scalar>(w: &[T], beta: T, n: usize) -> Result<Vec<T>> {
    let a: Vec<Dual<T>> = w.iter().map(|&x| Dual::constant(edge_factor(x, beta).re)).collect();
    let full = permanent_log_deriv(&a, n)?.log;
    let mut out = vec![T::zero(); n * n];
    let mut minor = Vec::with_capacity((n - 1) * (n - 1));
    for i in 0..n {
        for j in 0..n {
            let aij = a[i * n + j].re;
            if aij == T::zero() {
                continue;
            }
            minor.clear();
            for r in (0..n).filter(|&r| r != i) {
                for c in (0..n).filter(|&c| c != j) {
                    minor.push(a[r * n + c]);
                }
            }
            match permanent_log_deriv(&minor, n - 1) {
                Ok(m) => out[i * n + j] = (aij.ln() + m.log - full).exp(),
                Err(Error::AllInfinite) => {}
                Err(e) => return Err(e),
            }
        }
    }
    Ok(out)
}

fn tsp_marginals<T: Scalar>(w: &[T], beta: T, n: usize) -> Result<Vec<T>> {
    if n > TSP_CAP {
        return Err(Error::SizeCap { what: "subset DP (n)", got: n as u64, cap: TSP_CAP as u64 });
    }
    let (c, _) = factor_matrix(w, beta, n);
    let mut out = vec![T::zero(); w.len()];
    let mut e = 0;
    for u in 0..n - 1 {
        let paths = hamiltonian_paths_from(&c, n, u);
        let directed: T = (0..n).filter(|&v| v != u).map(|v| (paths[v] * c[u * n + v]).re).sum();
        if !(directed > T::zero()) {
            return Err(Error::AllInfinite);
        }
        for v in u + 1..n {
            out[e] = T::lit(2.0) * (paths[v] * c[u * n + v]).re / directed;
            e += 1;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::WeightDistribution;

    fn exp1() -> WeightDistribution<f64> {
        WeightDistribution::exponential(1.0).unwrap()
    }

    #[test]
    fn triangle_unit_weights() {
        let m = ProblemModel::spanning_tree(3).unwrap();
        let w = WeightVector::from_values(vec![0.5; 3], exp1(), 0).unwrap();
        for p in edge_marginals(&m, &w, 1.0).unwrap() {
            assert!((p - 2.0 / 3.0).abs() < 1e-14);
        }
    }

    #[test]
    fn specialized_marginals_match_enumeration() {
        for model in [
            ProblemModel::spanning_tree(6).unwrap(),
            ProblemModel::matching_bipartite(5).unwrap(),
            ProblemModel::traveling_salesman(7).unwrap(),
        ] {
            let w = exp1().sample_weights(model.edge_count(), 9).unwrap();
            let fast = edge_marginals(&model, &w, 1.5).unwrap();
            let law = gibbs_law(&model, &w, 1.5).unwrap();
            let mut slow = vec![0.0; model.edge_count()];
            for (c, &p) in law.configs.iter().zip(&law.probs) {
                for &e in c {
                    slow[e as usize] += p;
                }
            }
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).abs() < 1e-12, "{model}: {a} vs {b}");
            }
            let total: f64 = fast.iter().sum();
            assert!((total - model.config_size() as f64).abs() < 1e-10);
        }
    }

    #[test]
    fn beta_zero_gives_p() {
        for model in [
            ProblemModel::spanning_tree(8).unwrap(),
            ProblemModel::matching_bipartite(6).unwrap(),
            ProblemModel::traveling_salesman(6).unwrap(),
            ProblemModel::matching_complete(3).unwrap(),
        ] {
            let w = exp1().sample_weights(model.edge_count(), 2).unwrap();
            let p = model.constants().p_real::<f64>();
            for q in edge_marginals(&model, &w, 0.0).unwrap() {
                assert!((q - p).abs() < 1e-12);
            }
        }
    }
}
