//! Configuration counts |S| for every family.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use statrs::function::factorial::ln_factorial;

use super::kfactor::KFactorCounter;
use super::{ProblemModel, KFACTOR_VERTEX_CAP};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum ConfigCount {
    Exact(BigUint),
    /// Configuration-model asymptotic for k-factors beyond the exact range;
    /// only the logarithm is kept.
    Approximate { log_count: f64 },
}

impl ConfigCount {
    pub fn ln(&self) -> f64 {
        match self {
            Self::Exact(c) => ln_biguint(c),
            Self::Approximate { log_count } => *log_count,
        }
    }

    pub fn exact(&self) -> Option<&BigUint> {
        match self {
            Self::Exact(c) => Some(c),
            Self::Approximate { .. } => None,
        }
    }
}

pub(crate) fn ln_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().unwrap();
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

fn factorial(n: usize) -> BigUint {
    (1..=n as u64).fold(BigUint::one(), |acc, i| acc * i)
}

impl ProblemModel {
    /// |S|: exact for every family, except k-factors on more than
    /// [`KFACTOR_VERTEX_CAP`] vertices, which get the configuration-model
    /// asymptotic (2nk)!/(2^{nk}(nk)!(k!)^{2n}) · e^{-(k²-1)/4}.
    pub fn count_configs(&self) -> ConfigCount {
        match *self {
            Self::KFactor { n, k } if 2 * n > KFACTOR_VERTEX_CAP => {
                let nk = (n * k) as u64;
                let log_count = ln_factorial(2 * nk) - nk as f64 * std::f64::consts::LN_2
                    - ln_factorial(nk)
                    - 2.0 * n as f64 * ln_factorial(k as u64)
                    - (k * k) as f64 / 4.0
                    + 0.25;
                ConfigCount::Approximate { log_count }
            }
            _ => ConfigCount::Exact(self.exact_count().expect("within exact range")),
        }
    }

    /// |S| as an exact integer; errors for k-factors beyond the exact range.
    pub fn exact_count(&self) -> Result<BigUint> {
        Ok(match *self {
            Self::MatchingBipartite { n } => factorial(n),
            Self::MatchingComplete { n } => factorial(2 * n) / (BigUint::from(2u32).pow(n as u32) * factorial(n)),
            Self::TravelingSalesman { n } => factorial(n - 1) / 2u32,
            Self::SpanningTree { n } => BigUint::from(n).pow((n - 2) as u32),
            Self::KFactor { n, k } => {
                let nv = 2 * n;
                if nv > KFACTOR_VERTEX_CAP {
                    return Err(Error::SizeCap {
                        what: "exact k-factor count (vertices)",
                        got: nv as u64,
                        cap: KFACTOR_VERTEX_CAP as u64,
                    });
                }
                let forbidden = vec![false; nv * (nv - 1) / 2];
                BigUint::from(KFactorCounter::new(nv, &forbidden).count(&vec![k as u8; nv]))
            }
        })
    }

    /// ln |S|, without building the big integer where a closed form exists.
    pub fn ln_count(&self) -> f64 {
        match *self {
            Self::MatchingBipartite { n } => ln_factorial(n as u64),
            Self::MatchingComplete { n } => {
                ln_factorial(2 * n as u64) - n as f64 * std::f64::consts::LN_2 - ln_factorial(n as u64)
            }
            Self::TravelingSalesman { n } => ln_factorial(n as u64 - 1) - std::f64::consts::LN_2,
            Self::SpanningTree { n } => (n as f64 - 2.0) * (n as f64).ln(),
            Self::KFactor { .. } => self.count_configs().ln(),
        }
    }

    /// Errors unless |S| is within the enumeration cap.
    pub fn check_enumerable(&self) -> Result<u64> {
        let count = match self.count_configs() {
            ConfigCount::Exact(c) => c.to_u64().unwrap_or(u64::MAX),
            ConfigCount::Approximate { .. } => u64::MAX,
        };
        if count > super::ENUMERATION_CAP {
            return Err(Error::SizeCap { what: "configuration enumeration", got: count, cap: super::ENUMERATION_CAP });
        }
        Ok(count)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exact(m: ProblemModel) -> u64 {
        m.exact_count().unwrap().to_u64().unwrap()
    }

    #[test]
    fn closed_form_counts() {
        assert_eq!(exact(ProblemModel::matching_bipartite(4).unwrap()), 24);
        assert_eq!(exact(ProblemModel::traveling_salesman(5).unwrap()), 12);
        assert_eq!(exact(ProblemModel::traveling_salesman(4).unwrap()), 3);
        assert_eq!(exact(ProblemModel::matching_complete(3).unwrap()), 15);
        assert_eq!(exact(ProblemModel::spanning_tree(4).unwrap()), 16);
        assert_eq!(exact(ProblemModel::spanning_tree(5).unwrap()), 125);
        assert_eq!(exact(ProblemModel::k_factor(3, 2).unwrap()), 70);
        assert_eq!(exact(ProblemModel::k_factor(3, 1).unwrap()), 15);
    }

    #[test]
    fn ln_count_agrees_with_exact() {
        for m in [
            ProblemModel::matching_bipartite(9).unwrap(),
            ProblemModel::matching_complete(6).unwrap(),
            ProblemModel::traveling_salesman(11).unwrap(),
            ProblemModel::spanning_tree(30).unwrap(),
            ProblemModel::k_factor(5, 3).unwrap(),
        ] {
            let a = m.ln_count();
            let b = ln_biguint(&m.exact_count().unwrap());
            assert!((a - b).abs() < 1e-10 * b.abs().max(1.0), "{m}: {a} vs {b}");
        }
        let big = ProblemModel::spanning_tree(5000).unwrap();
        let b = ln_biguint(&big.exact_count().unwrap());
        assert!((big.ln_count() - b).abs() < 1e-8 * b);
    }

    #[test]
    fn kfactor_beyond_cap_is_approximate() {
        let m = ProblemModel::k_factor(7, 2).unwrap();
        assert!(m.exact_count().is_err());
        assert!(matches!(m.count_configs(), ConfigCount::Approximate { .. }));
        // labeled 2-regular graphs on 14 vertices: 5_933_502_822
        let approx = m.count_configs().ln();
        assert!((approx - 5_933_502_822f64.ln()).abs() < 0.15, "{approx}");
    }
}
