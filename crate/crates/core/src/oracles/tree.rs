//! Weighted matrix-tree theorem: Σ_T ∏_{e∈T} c_e = det of the reduced
//! Laplacian, with conductances c_e = e^{-βω_e}.
//!
//! The reduced Laplacian of a connected graph is symmetric, diagonally
//! dominant and positive definite, so LDLᵀ without pivoting is stable; the
//! ratio of extreme pivots serves as the conditioning check.

use super::LogDual;
use crate::dual::edge_factor;
use crate::error::{Error, Result};
use crate::models::graph::{complete_edge_index, DisjointSet};
use crate::Scalar;

pub const TREE_CAP: usize = 5000;

const MAX_PIVOT_RATIO: f64 = 1e12;

struct Laplacian<T> {
    k: usize,
    val: Vec<T>,
    der: Vec<T>,
    log_scale: T,
}

/// Reduced Laplacian (vertex 0 grounded) of the conductances divided by their
/// maximum, as values and β-derivatives.
fn reduced_laplacian<T: Scalar>(weights: &[T], beta: T, n: usize, with_der: bool) -> Result<Laplacian<T>> {
    if n < 2 {
        return Err(Error::param("n", "a spanning tree needs n >= 2"));
    }
    if n > TREE_CAP {
        return Err(Error::SizeCap { what: "matrix-tree (n)", got: n as u64, cap: TREE_CAP as u64 });
    }
    let expected = n * (n - 1) / 2;
    if weights.len() != expected {
        return Err(Error::LengthMismatch { expected, got: weights.len() });
    }
    let mut ds = DisjointSet::new(n);
    let mut cmax = T::zero();
    for i in 0..n {
        for j in i + 1..n {
            let c = edge_factor(weights[complete_edge_index(n, i, j)], beta).re;
            if c > T::zero() {
                ds.union(i, j);
                cmax = cmax.max(c);
            }
        }
    }
    if ds.component_sizes().len() != 1 {
        return Err(Error::AllInfinite);
    }
    let inv = cmax.recip();
    let k = n - 1;
    let mut val = vec![T::zero(); k * k];
    let mut der = if with_der { vec![T::zero(); k * k] } else { Vec::new() };
    for i in 0..n {
        for j in i + 1..n {
            let f = edge_factor(weights[complete_edge_index(n, i, j)], beta).scale(inv);
            if f.re == T::zero() && f.eps == T::zero() {
                continue;
            }
            // vertex v >= 1 sits at row v - 1
            if i > 0 {
                val[(i - 1) * k + (i - 1)] += f.re;
                if with_der {
                    der[(i - 1) * k + (i - 1)] += f.eps;
                }
            }
            val[(j - 1) * k + (j - 1)] += f.re;
            if with_der {
                der[(j - 1) * k + (j - 1)] += f.eps;
            }
            if i > 0 {
                let (a, b) = ((i - 1) * k + (j - 1), (j - 1) * k + (i - 1));
                val[a] -= f.re;
                val[b] -= f.re;
                if with_der {
                    der[a] -= f.eps;
                    der[b] -= f.eps;
                }
            }
        }
    }
    Ok(Laplacian { k, val, der, log_scale: cmax.ln() })
}

fn check_pivots<T: Scalar>(dmin: T, dmax: T) -> Result<()> {
    if !(dmin > T::zero()) {
        return Err(Error::IllConditioned(f64::INFINITY));
    }
    let ratio = (dmax / dmin).as_f64();
    if ratio > MAX_PIVOT_RATIO {
        return Err(Error::IllConditioned(ratio));
    }
    Ok(())
}

/// log Z and d log Z/dβ for spanning trees of K_n, normalized by n^{n-2}.
pub fn tree_partition_matrix<T: Scalar>(weights: &[T], beta: T, n: usize) -> Result<LogDual<T>> {
    let Laplacian { k, mut val, mut der, log_scale } = reduced_laplacian(weights, beta, n, true)?;
    let mut log_det = T::zero();
    let mut dlog = T::zero();
    let (mut dmin, mut dmax) = (T::infinity(), T::zero());
    for p in 0..k {
        let (d, dd) = (val[p * k + p], der[p * k + p]);
        if !(d > T::zero()) {
            return Err(Error::IllConditioned(f64::INFINITY));
        }
        dmin = dmin.min(d);
        dmax = dmax.max(d);
        log_det += d.ln();
        dlog += dd / d;
        let (head, tail) = val.split_at_mut((p + 1) * k);
        let (dhead, dtail) = der.split_at_mut((p + 1) * k);
        let prow = &head[p * k..];
        let dprow = &dhead[p * k..];
        for i in p + 1..k {
            let (a, da) = (prow[i], dprow[i]);
            if a == T::zero() && da == T::zero() {
                continue;
            }
            // l = a / d as a dual number
            let l = a / d;
            let dl = (da - l * dd) / d;
            let row = &mut tail[(i - p - 1) * k..(i - p) * k];
            let drow = &mut dtail[(i - p - 1) * k..(i - p) * k];
            for j in i..k {
                row[j] -= l * prow[j];
                drow[j] -= dl * prow[j] + l * dprow[j];
            }
        }
    }
    check_pivots(dmin, dmax)?;
    let nf = T::from_usize_lossy(n);
    Ok(LogDual {
        log: log_det + T::from_usize_lossy(k) * log_scale - (nf - T::lit(2.0)) * nf.ln(),
        dlog,
    })
}

/// Inverse of the reduced Laplacian (vertex 0 grounded), row-major
/// (n-1)×(n-1). The conductances are divided by [`max_conductance`] first.
pub fn reduced_laplacian_inverse<T: Scalar>(weights: &[T], beta: T, n: usize) -> Result<Vec<T>> {
    let Laplacian { k, mut val, .. } = reduced_laplacian(weights, beta, n, false)?;
    // LDLᵀ in place on the upper triangle: afterwards val[p][p] = d_p and
    // val[p][i] = d_p · l_{ip} for i > p.
    let (mut dmin, mut dmax) = (T::infinity(), T::zero());
    for p in 0..k {
        let d = val[p * k + p];
        if !(d > T::zero()) {
            return Err(Error::IllConditioned(f64::INFINITY));
        }
        dmin = dmin.min(d);
        dmax = dmax.max(d);
        let (head, tail) = val.split_at_mut((p + 1) * k);
        let prow = &head[p * k..];
        for i in p + 1..k {
            let l = prow[i] / d;
            if l == T::zero() {
                continue;
            }
            let row = &mut tail[(i - p - 1) * k..(i - p) * k];
            for j in i..k {
                row[j] -= l * prow[j];
            }
        }
    }
    check_pivots(dmin, dmax)?;
    // solve L D Lᵀ x = e_c column by column
    let mut inv = vec![T::zero(); k * k];
    let mut x = vec![T::zero(); k];
    for c in 0..k {
        x.iter_mut().for_each(|v| *v = T::zero());
        x[c] = T::one();
        // forward: L y = e_c, with L[i][p] = val[p][i] / d_p
        for p in c..k {
            let xp = x[p];
            if xp == T::zero() {
                continue;
            }
            let d = val[p * k + p];
            for i in p + 1..k {
                x[i] -= val[p * k + i] / d * xp;
            }
        }
        for p in 0..k {
            x[p] /= val[p * k + p];
        }
        // backward: Lᵀ z = y
        for p in (0..k).rev() {
            let d = val[p * k + p];
            let mut s = x[p];
            for i in p + 1..k {
                s -= val[p * k + i] / d * x[i];
            }
            x[p] = s;
        }
        for r in 0..k {
            inv[r * k + c] = x[r];
        }
    }
    Ok(inv)
}

/// Largest conductance e^{-βω} over the weights; marginal computations use
/// the same rescaling as the Laplacian.
pub fn max_conductance<T: Scalar>(weights: &[T], beta: T) -> T {
    weights.iter().fold(T::zero(), |m, &w| m.max(edge_factor(w, beta).re))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_conductances_give_cayley() {
        for n in 2..40 {
            let w = vec![0.0f64; n * (n - 1) / 2];
            let r = tree_partition_matrix(&w, 1.0, n).unwrap();
            assert!(r.log.abs() < 1e-11, "n={n}: {}", r.log);
        }
    }

    #[test]
    fn determinant_three_for_triangle() {
        // log det = ln 3 = log Z + ln 3
        let r = tree_partition_matrix(&[0.0f64, 0.0, 0.0], 0.5, 3).unwrap();
        assert!(r.log.abs() < 1e-15);
    }

    #[test]
    fn inverse_is_inverse() {
        let n = 9;
        let mut rng = crate::rng::from_seed(3);
        let w: Vec<f64> = (0..n * (n - 1) / 2).map(|_| rand::Rng::gen::<f64>(&mut rng)).collect();
        let inv = reduced_laplacian_inverse(&w, 1.3, n).unwrap();
        let lap = reduced_laplacian(&w, 1.3, n, false).unwrap();
        let k = n - 1;
        for i in 0..k {
            for j in 0..k {
                let s: f64 = (0..k).map(|t| lap.val[i * k + t] * inv[t * k + j]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((s - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn disconnected_support_is_all_infinite() {
        // vertex 3 cut off
        let n = 4;
        let mut w = vec![1.0; 6];
        for v in 0..3 {
            w[complete_edge_index(n, v, 3)] = f64::INFINITY;
        }
        assert_eq!(tree_partition_matrix(&w, 1.0, n), Err(Error::AllInfinite));
    }
}
