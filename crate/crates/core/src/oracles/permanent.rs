//! Ryser's formula over dual numbers.

use super::LogDual;
use crate::dual::{CompensatedSum, Dual};
use crate::error::{Error, Result};
use crate::Scalar;

pub const PERMANENT_CAP: usize = 18;

/// Relative error bound above which the alternating sum is rejected.
const MAX_RELATIVE_ERROR: f64 = 1e-6;

/// Row sums are rebuilt from scratch this often to stop drift from the
/// incremental Gray-code updates.
const REFRESH: usize = 64;

/// log perm(A) and its β-derivative for a row-major n×n matrix of
/// nonnegative entries with derivatives.
///
/// Rows are scaled by their maximum entry (a β-independent constant for the
/// purposes of differentiation, so the log-derivative is unchanged). Errors
/// with `AllInfinite` if the support admits no perfect matching and with
/// `Cancellation` if the tracked error bound of the signed sum exceeds 1e-6.
pub fn permanent_log_deriv<T: Scalar>(a: &[Dual<T>], n: usize) -> Result<LogDual<T>> {
    if a.len() != n * n {
        return Err(Error::LengthMismatch { expected: n * n, got: a.len() });
    }
    if n > PERMANENT_CAP {
        return Err(Error::SizeCap { what: "permanent (n)", got: n as u64, cap: PERMANENT_CAP as u64 });
    }
    if n == 0 {
        return Ok(LogDual { log: T::zero(), dlog: T::zero() });
    }
    if !has_perfect_matching(a, n) {
        return Err(Error::AllInfinite);
    }
    let mut m = a.to_vec();
    let mut log_scale = T::zero();
    for i in 0..n {
        let row = &mut m[i * n..(i + 1) * n];
        let c = row.iter().fold(T::zero(), |acc, d| acc.max(d.re));
        log_scale += c.ln();
        let inv = c.recip();
        row.iter_mut().for_each(|d| *d = d.scale(inv));
    }

    let mut row_sum = vec![Dual::<T>::zero(); n];
    let mut re = CompensatedSum::new();
    let mut eps = CompensatedSum::new();
    let mut abs_sum = T::zero();
    let mut gray = 0usize;
    for k in 1usize..(1 << n) {
        let j = k.trailing_zeros() as usize;
        gray ^= 1 << j;
        if k % REFRESH == 0 {
            for (i, s) in row_sum.iter_mut().enumerate() {
                *s = (0..n).filter(|&c| gray >> c & 1 == 1).map(|c| m[i * n + c]).sum();
            }
        } else if gray >> j & 1 == 1 {
            for (i, s) in row_sum.iter_mut().enumerate() {
                *s += m[i * n + j];
            }
        } else {
            for (i, s) in row_sum.iter_mut().enumerate() {
                *s -= m[i * n + j];
            }
        }
        let mut prod = row_sum[0];
        for s in &row_sum[1..] {
            prod *= *s;
        }
        // (-1)^{n-|S|}
        let prod = if (n - gray.count_ones() as usize) % 2 == 1 { -prod } else { prod };
        re.add(prod.re);
        eps.add(prod.eps);
        abs_sum += prod.re.abs();
    }
    let total = Dual::new(re.value(), eps.value());
    let bound = T::epsilon() * T::from_usize_lossy(n + 2) * abs_sum / total.re.abs();
    if !(total.re > T::zero()) || bound.as_f64() > MAX_RELATIVE_ERROR {
        return Err(Error::Cancellation(bound.as_f64()));
    }
    Ok(LogDual { log: total.re.ln() + log_scale, dlog: total.log_derivative() })
}

/// Kuhn's augmenting paths on the support of the matrix.
fn has_perfect_matching<T: Scalar>(a: &[Dual<T>], n: usize) -> bool {
    let mut match_col = vec![usize::MAX; n];
    for row in 0..n {
        let mut seen = vec![false; n];
        if !augment(a, n, row, &mut seen, &mut match_col) {
            return false;
        }
    }
    true
}

fn augment<T: Scalar>(a: &[Dual<T>], n: usize, row: usize, seen: &mut [bool], match_col: &mut [usize]) -> bool {
    for c in 0..n {
        if a[row * n + c].re > T::zero() && !seen[c] {
            seen[c] = true;
            if match_col[c] == usize::MAX || augment(a, n, match_col[c], seen, match_col) {
                match_col[c] = row;
                return true;
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn consts(v: &[f64]) -> Vec<Dual<f64>> {
        v.iter().map(|&x| Dual::constant(x)).collect()
    }

    /// Sum over permutations by Heap's algorithm.
    fn perm_by_permutations(a: &[f64], n: usize) -> f64 {
        let mut p: Vec<usize> = (0..n).collect();
        let mut c = vec![0usize; n];
        let prod = |p: &[usize]| (0..n).map(|i| a[i * n + p[i]]).product::<f64>();
        let mut total = prod(&p);
        let mut i = 0;
        while i < n {
            if c[i] < i {
                if i % 2 == 0 {
                    p.swap(0, i);
                } else {
                    p.swap(c[i], i);
                }
                total += prod(&p);
                c[i] += 1;
                i = 0;
            } else {
                c[i] = 0;
                i += 1;
            }
        }
        total
    }

    #[test]
    fn two_by_two() {
        let (a, b, c, d) = (0.3, 0.7, 0.2, 0.9);
        let r = permanent_log_deriv(&consts(&[a, b, c, d]), 2).unwrap();
        assert!((r.log - (a * d + b * c).ln()).abs() < 1e-15);
    }

    #[test]
    fn identity_is_one() {
        for n in 1..10 {
            let mut m = vec![0.0; n * n];
            for i in 0..n {
                m[i * n + i] = 1.0;
            }
            let r = permanent_log_deriv(&consts(&m), n).unwrap();
            assert_eq!(r.log, 0.0);
        }
    }

    #[test]
    fn random_matrices_match_permutation_sum() {
        let mut rng = crate::rng::from_seed(11);
        for n in [3, 5, 7] {
            for _ in 0..10 {
                let m: Vec<f64> = (0..n * n).map(|_| 1.0 - rng.gen::<f64>()).collect();
                let want = perm_by_permutations(&m, n).ln();
                let got = permanent_log_deriv(&consts(&m), n).unwrap().log;
                assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0), "{got} vs {want}");
            }
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let mut rng = crate::rng::from_seed(5);
        let n = 6;
        let w: Vec<f64> = (0..n * n).map(|_| rng.gen::<f64>() * 2.0).collect();
        let f = |beta: f64| {
            let m: Vec<Dual<f64>> = w.iter().map(|&x| crate::dual::edge_factor(x, beta)).collect();
            permanent_log_deriv(&m, n).unwrap()
        };
        let h = 1e-5;
        let fd = (f(1.0 + h).log - f(1.0 - h).log) / (2.0 * h);
        assert!((f(1.0).dlog - fd).abs() < 1e-8);
    }

    #[test]
    fn structural_zero_is_all_infinite() {
        // column 2 is empty
        let m = consts(&[1.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0, 1.0, 0.0]);
        assert_eq!(permanent_log_deriv(&m, 3), Err(Error::AllInfinite));
    }
}
