//! Held–Karp subset DP over Hamiltonian cycles of K_n.

use super::LogDual;
use crate::dual::{edge_factor, Dual};
use crate::error::{Error, Result};
use crate::models::graph::complete_edge_index;
use crate::Scalar;

pub const TSP_CAP: usize = 20;

/// Dense n×n table of edge factors e^{-βω}, divided by the largest one.
/// Returns the table and log of the divisor.
pub(crate) fn factor_matrix<T: Scalar>(weights: &[T], beta: T, n: usize) -> (Vec<Dual<T>>, T) {
    let mut c = vec![Dual::zero(); n * n];
    let mut cmax = T::zero();
    for i in 0..n {
        for j in i + 1..n {
            let f = edge_factor(weights[complete_edge_index(n, i, j)], beta);
            cmax = cmax.max(f.re);
            c[i * n + j] = f;
            c[j * n + i] = f;
        }
    }
    if cmax > T::zero() {
        let inv = cmax.recip();
        c.iter_mut().for_each(|d| *d = d.scale(inv));
    }
    let log_scale = if cmax > T::zero() { cmax.ln() } else { T::neg_infinity() };
    (c, log_scale)
}

/// For every end vertex v, the sum over directed Hamiltonian paths
/// start → … → v of the product of factors along the path.
pub(crate) fn hamiltonian_paths_from<T: Scalar>(c: &[Dual<T>], n: usize, start: usize) -> Vec<Dual<T>> {
    // label the other vertices 0..n-2
    let others: Vec<usize> = (0..n).filter(|&v| v != start).collect();
    let k = n - 1;
    let full = (1usize << k) - 1;
    let mut dp = vec![Dual::<T>::zero(); (1usize << k) * k];
    for (i, &v) in others.iter().enumerate() {
        dp[(1 << i) * k + i] = c[start * n + v];
    }
    for set in 1..=full {
        for i in 0..k {
            if set >> i & 1 == 0 {
                continue;
            }
            let cur = dp[set * k + i];
            if cur.re == T::zero() && cur.eps == T::zero() {
                continue;
            }
            let vi = others[i];
            let mut rest = full & !set;
            while rest != 0 {
                let j = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                let step = cur * c[vi * n + others[j]];
                dp[(set | 1 << j) * k + j] += step;
            }
        }
    }
    let mut out = vec![Dual::zero(); n];
    for (i, &v) in others.iter().enumerate() {
        out[v] = dp[full * k + i];
    }
    out
}

/// log Z and d log Z/dβ for Hamiltonian cycles of K_n. Directed cycles
/// through vertex 0 are counted, so the sum over undirected cycles is half
/// of it and |S| = (n-1)!/2 leaves a divisor of (n-1)!.
pub fn tsp_partition_dp<T: Scalar>(weights: &[T], beta: T, n: usize) -> Result<LogDual<T>> {
    if n < 3 {
        return Err(Error::param("n", "a Hamiltonian cycle needs n >= 3"));
    }
    if n > TSP_CAP {
        return Err(Error::SizeCap { what: "subset DP (n)", got: n as u64, cap: TSP_CAP as u64 });
    }
    let (c, log_scale) = factor_matrix(weights, beta, n);
    let total = closed_cycles(&c, n);
    if total.re <= T::zero() {
        // distinguish a genuinely empty support from underflow
        let support: Vec<Dual<T>> =
            c.iter().map(|d| if d.re > T::zero() { Dual::one() } else { Dual::zero() }).collect();
        let support_ok = log_scale.is_finite() && closed_cycles(&support, n).re > T::zero();
        return Err(if support_ok { Error::Underflow } else { Error::AllInfinite });
    }
    let ln_fact: T = (2..n).map(|i| T::from_usize_lossy(i).ln()).sum();
    Ok(LogDual {
        log: total.re.ln() + T::from_usize_lossy(n) * log_scale - ln_fact,
        dlog: total.log_derivative(),
    })
}

fn closed_cycles<T: Scalar>(c: &[Dual<T>], n: usize) -> Dual<T> {
    let paths = hamiltonian_paths_from(c, n, 0);
    (1..n).map(|v| paths[v] * c[v * n]).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beta_zero_counts_cycles() {
        for n in 3..9 {
            let w = vec![0.3; n * (n - 1) / 2];
            let (c, _) = factor_matrix(&w, 0.0, n);
            // directed cycles through 0 = (n-1)!, i.e. twice the undirected count
            let fact: f64 = (1..n).map(|i| i as f64).product();
            assert!((closed_cycles(&c, n).re - fact).abs() < 1e-9);
            assert!(tsp_partition_dp(&w, 0.0, n).unwrap().log.abs() < 1e-12);
        }
    }

    #[test]
    fn triangle_has_one_cycle() {
        let w = [0.4f64, 1.1, 2.5];
        let r = tsp_partition_dp(&w, 0.7, 3).unwrap();
        assert!((r.log + 0.7 * 4.0).abs() < 1e-13);
        assert!((r.dlog + 4.0).abs() < 1e-13);
    }

    #[test]
    fn constant_weights() {
        let n = 7;
        let w = vec![1.3; n * (n - 1) / 2];
        let r = tsp_partition_dp(&w, 2.0, n).unwrap();
        assert!((r.log + 2.0 * 1.3 * n as f64).abs() < 1e-11);
        assert!((r.dlog + 1.3 * n as f64).abs() < 1e-11);
    }

    #[test]
    fn missing_support_is_all_infinite() {
        // vertex 3 of K_4 only has finite edges to vertex 0
        let n = 4;
        let mut w = vec![1.0; 6];
        w[complete_edge_index(n, 1, 3)] = f64::INFINITY;
        w[complete_edge_index(n, 2, 3)] = f64::INFINITY;
        assert_eq!(tsp_partition_dp(&w, 1.0, n), Err(Error::AllInfinite));
    }
}
