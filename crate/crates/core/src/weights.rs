//! Edge-weight laws and their cumulant generating function
//! ψ(β) = log E e^{-βω}, together with the derived quantities that
//! parameterize every limit law: ψ′, ψ″, v² = e^{ψ(2β)-2ψ(β)} - 1 and the
//! centered tilt ξ = e^{-βω-ψ(β)} - 1.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, RngCore};
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rng;
use crate::Scalar;

/// Cumulant generating function supplied by the caller.
pub type CgfFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;
/// Draws one weight; may return `f64::INFINITY`.
pub type SamplerFn = Arc<dyn Fn(&mut dyn RngCore) -> f64 + Send + Sync>;

/// A user-supplied weight law. It must provide ψ directly; derivatives are
/// taken numerically.
#[derive(Clone)]
pub struct CustomLaw<T> {
    pub name: String,
    pub cgf: CgfFn<T>,
    pub sampler: SamplerFn,
}

#[derive(Clone)]
pub enum WeightDistribution<T> {
    Exponential { rate: T },
    Uniform { lower: T, upper: T },
    /// ω with probability `keep_prob`, +∞ otherwise. Realizes an edge-percolated
    /// host graph as a complete graph with censored weights.
    Censored { base: Box<WeightDistribution<T>>, keep_prob: T },
    Custom(CustomLaw<T>),
}

impl<T: Scalar> fmt::Debug for WeightDistribution<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Exponential { rate } => write!(f, "Exponential({rate})"),
            Self::Uniform { lower, upper } => write!(f, "Uniform({lower}, {upper})"),
            Self::Censored { base, keep_prob } => write!(f, "Censored({base:?}, {keep_prob})"),
            Self::Custom(law) => write!(f, "Custom({})", law.name),
        }
    }
}

impl<T: Scalar> PartialEq for WeightDistribution<T> {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Self::Exponential { rate: a }, Self::Exponential { rate: b }) => a == b,
            (Self::Uniform { lower: a, upper: b }, Self::Uniform { lower: c, upper: d }) => {
                a == c && b == d
            }
            (
                Self::Censored { base: a, keep_prob: p },
                Self::Censored { base: b, keep_prob: q },
            ) => a == b && p == q,
            (Self::Custom(a), Self::Custom(b)) => Arc::ptr_eq(&a.cgf, &b.cgf),
            _ => false,
        }
    }
}

impl<T: Scalar> WeightDistribution<T> {
    pub fn exponential(rate: T) -> Result<Self> {
        if !(rate > T::zero()) || rate.is_infinite() {
            return Err(Error::param("rate", format!("must be positive and finite, got {rate}")));
        }
        Ok(Self::Exponential { rate })
    }

    pub fn uniform(lower: T, upper: T) -> Result<Self> {
        if !(lower < upper) || lower.is_infinite() || upper.is_infinite() {
            return Err(Error::param(
                "uniform",
                format!("need finite lower < upper, got [{lower}, {upper}]"),
            ));
        }
        Ok(Self::Uniform { lower, upper })
    }

    pub fn censored(base: Self, keep_prob: T) -> Result<Self> {
        if !(keep_prob > T::zero() && keep_prob <= T::one()) {
            return Err(Error::param("keep_prob", format!("must lie in (0, 1], got {keep_prob}")));
        }
        Ok(Self::Censored { base: Box::new(base), keep_prob })
    }

    pub fn custom(
        name: impl Into<String>,
        cgf: impl Fn(T) -> T + Send + Sync + 'static,
        sampler: impl Fn(&mut dyn RngCore) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self::Custom(CustomLaw { name: name.into(), cgf: Arc::new(cgf), sampler: Arc::new(sampler) })
    }

    /// True for the built-in laws, whose ψ, ψ′ and ψ″ are known in closed form.
    pub fn closed_form_cgf(&self) -> bool {
        match self {
            Self::Censored { base, .. } => base.closed_form_cgf(),
            Self::Custom(_) => false,
            _ => true,
        }
    }

    /// Whether draws may be +∞.
    pub fn allows_infinite(&self) -> bool {
        matches!(self, Self::Censored { .. } | Self::Custom(_))
    }

    fn check(beta: T) -> Result<()> {
        crate::error::check_beta(beta.as_f64())
    }

    /// ψ(β) = log E e^{-βω}. For censored laws the +∞ atom contributes
    /// nothing even at β = 0, so ψ(0) = log(keep_prob) there.
    pub fn psi(&self, beta: T) -> Result<T> {
        Self::check(beta)?;
        Ok(self.psi_unchecked(beta))
    }

    fn psi_unchecked(&self, beta: T) -> T {
        match self {
            Self::Exponential { rate } => -(beta / *rate).ln_1p(),
            Self::Uniform { lower, upper } => {
                let width = *upper - *lower;
                -beta * *lower + uniform_log_mgf(beta * width)
            }
            Self::Censored { base, keep_prob } => keep_prob.ln() + base.psi_unchecked(beta),
            Self::Custom(law) => (law.cgf)(beta),
        }
    }

    /// ψ′(β) = -(tilted mean of ω).
    pub fn psi_prime(&self, beta: T) -> Result<T> {
        Self::check(beta)?;
        Ok(match self {
            Self::Exponential { rate } => -T::one() / (*rate + beta),
            Self::Uniform { lower, upper } => {
                let width = *upper - *lower;
                -*lower + width * uniform_log_mgf_d1(beta * width)
            }
            Self::Censored { base, .. } => base.psi_prime(beta)?,
            Self::Custom(_) => self.numeric_psi_prime(beta)?,
        })
    }

    /// ψ″(β) = tilted variance of ω.
    pub fn psi_double_prime(&self, beta: T) -> Result<T> {
        Self::check(beta)?;
        Ok(match self {
            Self::Exponential { rate } => {
                let s = *rate + beta;
                T::one() / (s * s)
            }
            Self::Uniform { lower, upper } => {
                let width = *upper - *lower;
                width * width * uniform_log_mgf_d2(beta * width)
            }
            Self::Censored { base, .. } => base.psi_double_prime(beta)?,
            Self::Custom(_) => self.numeric_psi_double_prime(beta)?,
        })
    }

    /// Central difference of ψ with one Richardson refinement
    /// (one-sided stencils when β is too close to 0).
    pub fn numeric_psi_prime(&self, beta: T) -> Result<T> {
        Self::check(beta)?;
        let h = T::epsilon().cbrt() * beta.max(T::one());
        let two = T::lit(2.0);
        let d = |h: T| -> T {
            if beta >= h {
                (self.psi_unchecked(beta + h) - self.psi_unchecked(beta - h)) / (two * h)
            } else {
                (-T::lit(3.0) * self.psi_unchecked(beta) + T::lit(4.0) * self.psi_unchecked(beta + h)
                    - self.psi_unchecked(beta + two * h))
                    / (two * h)
            }
        };
        Ok((T::lit(4.0) * d(h / two) - d(h)) / T::lit(3.0))
    }

    /// Second central difference of ψ with one Richardson refinement. The
    /// step is ε^{1/4}·max(1, β); an ε^{1/3} step loses too many digits to
    /// rounding in a second difference.
    pub fn numeric_psi_double_prime(&self, beta: T) -> Result<T> {
        Self::check(beta)?;
        let h = T::epsilon().sqrt().sqrt() * beta.max(T::one());
        let two = T::lit(2.0);
        let d = |h: T| -> T {
            let f0 = self.psi_unchecked(beta);
            if beta >= h {
                (self.psi_unchecked(beta + h) - two * f0 + self.psi_unchecked(beta - h)) / (h * h)
            } else {
                (two * f0 - T::lit(5.0) * self.psi_unchecked(beta + h)
                    + T::lit(4.0) * self.psi_unchecked(beta + two * h)
                    - self.psi_unchecked(beta + T::lit(3.0) * h))
                    / (h * h)
            }
        };
        Ok((T::lit(4.0) * d(h / two) - d(h)) / T::lit(3.0))
    }

    /// v²(β) = e^{ψ(2β) - 2ψ(β)} - 1 = E ξ².
    pub fn v_squared(&self, beta: T) -> Result<T> {
        Ok(self.tilt_ratio_log(beta)?.exp_m1())
    }

    /// ψ(2β) - 2ψ(β), the log of e^{ψ(2β)-2ψ(β)} that appears in several limits.
    pub fn tilt_ratio_log(&self, beta: T) -> Result<T> {
        Ok(self.psi(beta + beta)? - T::lit(2.0) * self.psi(beta)?)
    }

    /// ξ(ω) = e^{-βω - ψ(β)} - 1, with ω = +∞ mapping to -1.
    pub fn xi(&self, omega: T, beta: T) -> Result<T> {
        let psi = self.psi(beta)?;
        Ok(xi_with_psi(omega, beta, psi))
    }

    /// Draw `count` i.i.d. weights from the stream keyed by `seed`.
    pub fn sample_weights(&self, count: usize, seed: u64) -> Result<WeightVector<T>> {
        if count == 0 {
            return Err(Error::param("count", "must be at least 1"));
        }
        let mut rng = rng::from_seed(seed);
        let values = (0..count).map(|_| T::lit(self.draw(&mut rng))).collect();
        Ok(WeightVector { values, source_seed: seed, distribution: self.clone() })
    }

    /// One draw as `f64`.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Self::Exponential { rate } => {
                Exp::new(rate.as_f64()).expect("validated rate").sample(rng)
            }
            Self::Uniform { lower, upper } => {
                let (a, b) = (lower.as_f64(), upper.as_f64());
                a + (b - a) * rng.gen::<f64>()
            }
            Self::Censored { base, keep_prob } => {
                if rng.gen::<f64>() < keep_prob.as_f64() {
                    base.draw(rng)
                } else {
                    f64::INFINITY
                }
            }
            Self::Custom(law) => {
                let mut adapter = DynRng(rng);
                (law.sampler)(&mut adapter)
            }
        }
    }

    /// Mean of ω (finite part only for censored laws; `None` for custom laws).
    pub fn mean(&self) -> Option<T> {
        match self {
            Self::Exponential { rate } => Some(T::one() / *rate),
            Self::Uniform { lower, upper } => Some((*lower + *upper) / T::lit(2.0)),
            Self::Censored { base, .. } => base.mean(),
            Self::Custom(_) => None,
        }
    }
}

struct DynRng<'a, R: ?Sized>(&'a mut R);

impl<R: RngCore + ?Sized> RngCore for DynRng<'_, R> {
    fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }
    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }
    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.0.fill_bytes(dest)
    }
    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand::Error> {
        self.0.try_fill_bytes(dest)
    }
}

/// ξ with a precomputed ψ(β).
pub fn xi_with_psi<T: Scalar>(omega: T, beta: T, psi: T) -> T {
    if omega.is_infinite() && omega > T::zero() {
        return -T::one();
    }
    (-beta * omega - psi).exp_m1()
}

// g(x) = log((1 - e^{-x}) / x) and its derivatives; ψ of Uniform(0,1) is g(β).
// Near 0 the Bernoulli-number series avoids cancellation.
const SERIES_CUTOFF: f64 = 0.25;

// Taylor coefficients (in x²) of the odd/even parts around 0.
fn poly<T: Scalar>(x2: T, coeffs: &[f64]) -> T {
    coeffs.iter().rev().fold(T::zero(), |acc, &c| acc * x2 + T::lit(c))
}

fn uniform_log_mgf<T: Scalar>(x: T) -> T {
    if x.abs() < T::lit(SERIES_CUTOFF) {
        let x2 = x * x;
        -x / T::lit(2.0)
            + x2 * poly(
                x2,
                &[1.0 / 24.0, -1.0 / 2880.0, 1.0 / 181440.0, -1.0 / 9676800.0, 1.0 / 479001600.0],
            )
    } else {
        (-(-x).exp_m1() / x).ln()
    }
}

fn uniform_log_mgf_d1<T: Scalar>(x: T) -> T {
    if x.abs() < T::lit(SERIES_CUTOFF) {
        -T::lit(0.5)
            + x * poly(
                x * x,
                &[1.0 / 12.0, -1.0 / 720.0, 1.0 / 30240.0, -1.0 / 1209600.0, 1.0 / 47900160.0],
            )
    } else {
        T::one() / x.exp_m1() - T::one() / x
    }
}

fn uniform_log_mgf_d2<T: Scalar>(x: T) -> T {
    if x.abs() < T::lit(SERIES_CUTOFF) {
        poly(
            x * x,
            &[
                1.0 / 12.0,
                -1.0 / 240.0,
                1.0 / 6048.0,
                -1.0 / 172800.0,
                1.0 / 5322240.0,
                -691.0 / 118879488000.0,
            ],
        )
    } else {
        let em1 = x.exp_m1();
        T::one() / (x * x) - (em1 + T::one()) / (em1 * em1)
    }
}

/// Realized edge weights of one instance.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightVector<T: Scalar> {
    pub values: Vec<T>,
    pub source_seed: u64,
    pub distribution: WeightDistribution<T>,
}

impl<T: Scalar> WeightVector<T> {
    /// Wraps explicit values. +∞ is only accepted for laws that can produce it.
    pub fn from_values(
        values: Vec<T>,
        distribution: WeightDistribution<T>,
        source_seed: u64,
    ) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::param("values", "weight vector is empty"));
        }
        for &w in &values {
            if w.is_nan() || (w.is_infinite() && (w < T::zero() || !distribution.allows_infinite())) {
                return Err(Error::param(
                    "values",
                    format!("weight {w} not allowed for {distribution:?}"),
                ));
            }
        }
        Ok(Self { values, source_seed, distribution })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn infinite_count(&self) -> usize {
        self.values.iter().filter(|w| w.is_infinite()).count()
    }

    /// Converts to another scalar type.
    pub fn cast<U: Scalar>(&self) -> WeightVector<U>
    where
        WeightDistribution<T>: CastDistribution<U>,
    {
        WeightVector {
            values: self.values.iter().map(|&v| U::lit(v.as_f64())).collect(),
            source_seed: self.source_seed,
            distribution: self.distribution.cast_to(),
        }
    }
}

/// Conversion of built-in distributions between scalar types.
pub trait CastDistribution<U> {
    fn cast_to(&self) -> WeightDistribution<U>;
}

impl<T: Scalar, U: Scalar> CastDistribution<U> for WeightDistribution<T> {
    fn cast_to(&self) -> WeightDistribution<U> {
        match self {
            Self::Exponential { rate } => WeightDistribution::Exponential { rate: U::lit(rate.as_f64()) },
            Self::Uniform { lower, upper } => WeightDistribution::Uniform {
                lower: U::lit(lower.as_f64()),
                upper: U::lit(upper.as_f64()),
            },
            Self::Censored { base, keep_prob } => WeightDistribution::Censored {
                base: Box::new(base.cast_to()),
                keep_prob: U::lit(keep_prob.as_f64()),
            },
            Self::Custom(law) => {
                let cgf = law.cgf.clone();
                WeightDistribution::Custom(CustomLaw {
                    name: law.name.clone(),
                    cgf: Arc::new(move |b: U| U::lit(cgf(T::lit(b.as_f64())).as_f64())),
                    sampler: law.sampler.clone(),
                })
            }
        }
    }
}

impl fmt::Display for WeightDistribution<f64> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Exponential { rate } => write!(f, "exp:{rate}"),
            Self::Uniform { lower, upper } => write!(f, "uniform:{lower}:{upper}"),
            Self::Censored { base, keep_prob } => write!(f, "censored:{keep_prob}:{base}"),
            Self::Custom(law) => write!(f, "custom:{}", law.name),
        }
    }
}

/// Parses `exp:RATE`, `uniform:LO:HI` and `censored:P:<base>`.
impl FromStr for WeightDistribution<f64> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || {
            Error::param(
                "dist",
                format!("`{s}` is not one of exp:RATE, uniform:LO:HI, censored:P:<dist>"),
            )
        };
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
        let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
        match kind.trim() {
            "exp" | "exponential" => Self::exponential(num(rest)?),
            "uniform" | "unif" => {
                let (a, b) = rest.split_once(':').ok_or_else(bad)?;
                Self::uniform(num(a)?, num(b)?)
            }
            "censored" => {
                let (p, base) = rest.split_once(':').ok_or_else(bad)?;
                Self::censored(base.parse()?, num(p)?)
            }
            _ => Err(bad()),
        }
    }
}

impl Serialize for WeightDistribution<f64> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for WeightDistribution<f64> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn exp1() -> WeightDistribution<f64> {
        WeightDistribution::exponential(1.0).unwrap()
    }

    fn unif() -> WeightDistribution<f64> {
        WeightDistribution::uniform(0.0, 1.0).unwrap()
    }

    /// Simpson quadrature of E e^{-βω} for Uniform(0,1).
    fn uniform_mgf_quadrature(beta: f64) -> f64 {
        let n = 2000;
        let h = 1.0 / n as f64;
        let f = |w: f64| (-beta * w).exp();
        let mut s = f(0.0) + f(1.0);
        for i in 1..n {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn psi_reference_values() {
        assert_abs_diff_eq!(exp1().psi(1.0).unwrap(), -(2.0f64.ln()), epsilon = 1e-15);
        assert_abs_diff_eq!(unif().psi(1.0).unwrap(), -0.458675145387082, epsilon = 1e-12);
        assert_abs_diff_eq!(
            unif().psi(1.0).unwrap(),
            uniform_mgf_quadrature(1.0).ln(),
            epsilon = 1e-12
        );
        for d in [exp1(), unif(), WeightDistribution::uniform(-1.0, 3.0).unwrap()] {
            assert_eq!(d.psi(0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn negative_beta_rejected() {
        assert_eq!(exp1().psi(-1.0), Err(Error::NegativeBeta(-1.0)));
        assert!(unif().psi_prime(-0.1).is_err());
    }

    #[test]
    fn derivatives_of_exponential() {
        assert_abs_diff_eq!(exp1().psi_prime(1.0).unwrap(), -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(exp1().psi_double_prime(1.0).unwrap(), 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(exp1().psi_double_prime(0.0).unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn analytic_derivatives_match_finite_differences() {
        let dists = [
            exp1(),
            WeightDistribution::exponential(2.5).unwrap(),
            unif(),
            WeightDistribution::uniform(0.5, 2.0).unwrap(),
            WeightDistribution::censored(exp1(), 0.3).unwrap(),
        ];
        for d in &dists {
            for beta in [0.25, 0.5, 1.0, 2.0] {
                let a1 = d.psi_prime(beta).unwrap();
                let n1 = d.numeric_psi_prime(beta).unwrap();
                assert!((a1 - n1).abs() <= 1e-6, "{d:?} psi' at {beta}: {a1} vs {n1}");
                let a2 = d.psi_double_prime(beta).unwrap();
                let n2 = d.numeric_psi_double_prime(beta).unwrap();
                assert!((a2 - n2).abs() <= 1e-6, "{d:?} psi'' at {beta}: {a2} vs {n2}");
                // all of these laws live on [0, ∞]
                assert!(a1 <= 0.0);
            }
        }
    }

    #[test]
    fn uniform_series_branch_is_continuous() {
        let d = unif();
        for f in [
            |d: &WeightDistribution<f64>, b| d.psi(b).unwrap(),
            |d: &WeightDistribution<f64>, b| d.psi_prime(b).unwrap(),
            |d: &WeightDistribution<f64>, b| d.psi_double_prime(b).unwrap(),
        ] {
            let below = f(&d, SERIES_CUTOFF * (1.0 - 1e-13));
            let above = f(&d, SERIES_CUTOFF * (1.0 + 1e-13));
            assert!((below - above).abs() < 1e-12, "{below} vs {above}");
        }
        assert_abs_diff_eq!(d.psi_prime(0.0).unwrap(), -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(d.psi_double_prime(0.0).unwrap(), 1.0 / 12.0, epsilon = 1e-15);
    }

    #[test]
    fn v_squared_values() {
        assert_abs_diff_eq!(exp1().v_squared(1.0).unwrap(), 1.0 / 3.0, epsilon = 1e-14);
        assert_eq!(exp1().v_squared(0.0).unwrap(), 0.0);
        // quadrature oracle for E e^{-2ω} / (E e^{-ω})² - 1
        let oracle = uniform_mgf_quadrature(2.0) / uniform_mgf_quadrature(1.0).powi(2) - 1.0;
        assert_abs_diff_eq!(unif().v_squared(1.0).unwrap(), oracle, epsilon = 1e-12);
        assert_abs_diff_eq!(unif().v_squared(1.0).unwrap(), 0.0819767068693, epsilon = 1e-11);
        for d in [exp1(), unif()] {
            for beta in [0.1, 0.7, 3.0] {
                let lhs = d.v_squared(beta).unwrap();
                let rhs = (d.psi(2.0 * beta).unwrap() - 2.0 * d.psi(beta).unwrap()).exp() - 1.0;
                assert!((lhs - rhs).abs() <= 1e-12);
                assert!(lhs >= 0.0);
            }
            assert!(d.v_squared(1e-6).unwrap() < 1e-10);
        }
    }

    #[test]
    fn censoring_shifts_psi_by_log_keep_prob() {
        let c = WeightDistribution::censored(exp1(), 0.4).unwrap();
        for beta in [0.0, 0.3, 1.0, 5.0] {
            let diff = c.psi(beta).unwrap() - exp1().psi(beta).unwrap();
            assert_abs_diff_eq!(diff, 0.4f64.ln(), epsilon = 1e-12);
        }
    }

    #[test]
    fn xi_edge_cases() {
        let d = exp1();
        assert_eq!(d.xi(f64::INFINITY, 1.0).unwrap(), -1.0);
        // e^{-βω} = e^{ψ(β)}  <=>  ω = -ψ(β)/β
        let omega = -d.psi(1.0).unwrap();
        assert_abs_diff_eq!(d.xi(omega, 1.0).unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn xi_moments_monte_carlo() {
        let d = exp1();
        let w = d.sample_weights(1_000_000, 11).unwrap();
        let xs: Vec<f64> = w.values.iter().map(|&o| d.xi(o, 1.0).unwrap()).collect();
        let n = xs.len() as f64;
        let m1 = xs.iter().sum::<f64>() / n;
        let m2 = xs.iter().map(|x| x * x).sum::<f64>() / n;
        let sd1 = ((m2 - m1 * m1) / n).sqrt();
        assert!(m1.abs() <= 4.0 * sd1, "E xi = {m1} (se {sd1})");
        let v4 = xs.iter().map(|x| (x * x - m2).powi(2)).sum::<f64>() / n;
        let sd2 = (v4 / n).sqrt();
        assert!((m2 - 1.0 / 3.0).abs() <= 4.0 * sd2, "E xi^2 = {m2} (se {sd2})");
    }

    #[test]
    fn sampling_is_deterministic_and_has_the_right_law() {
        let d = exp1();
        assert_eq!(d.sample_weights(100, 5).unwrap(), d.sample_weights(100, 5).unwrap());
        assert_ne!(d.sample_weights(100, 5).unwrap().values, d.sample_weights(100, 6).unwrap().values);
        let w = d.sample_weights(1_000_000, 3).unwrap();
        let mean = w.values.iter().sum::<f64>() / 1e6;
        assert!((mean - 1.0).abs() <= 4.0 * (1.0f64 / 1e6).sqrt());

        let c = WeightDistribution::censored(exp1(), 0.5).unwrap();
        let w = c.sample_weights(1_000_000, 9).unwrap();
        let frac = w.infinite_count() as f64 / 1e6;
        assert!((frac - 0.5).abs() <= 4.0 * (0.25f64 / 1e6).sqrt(), "frac = {frac}");
    }

    #[test]
    fn infinite_values_only_for_censored() {
        assert!(WeightVector::from_values(vec![1.0, f64::INFINITY], exp1(), 0).is_err());
        let c = WeightDistribution::censored(exp1(), 0.5).unwrap();
        assert!(WeightVector::from_values(vec![1.0, f64::INFINITY], c, 0).is_ok());
    }

    #[test]
    fn custom_law_uses_numeric_derivatives() {
        // Exponential(1) entered as a black box.
        let d = WeightDistribution::<f64>::custom(
            "exp1",
            |b| -(b.ln_1p()),
            |r| Exp::new(1.0).unwrap().sample(r),
        );
        assert!(!d.closed_form_cgf());
        assert_abs_diff_eq!(d.psi_prime(1.0).unwrap(), -0.5, epsilon = 1e-8);
        assert_abs_diff_eq!(d.psi_double_prime(1.0).unwrap(), 0.25, epsilon = 1e-6);
        assert_abs_diff_eq!(d.psi_prime(0.0).unwrap(), -1.0, epsilon = 1e-6);
    }

    #[test]
    fn descriptor_round_trip() {
        for s in ["exp:1", "uniform:0:1", "censored:0.5:exp:2"] {
            let d: WeightDistribution<f64> = s.parse().unwrap();
            assert_eq!(d.to_string(), s);
        }
        assert!("gamma:2".parse::<WeightDistribution<f64>>().is_err());
        assert!("exp:-1".parse::<WeightDistribution<f64>>().is_err());
        assert!("uniform:1:0".parse::<WeightDistribution<f64>>().is_err());
    }

    #[test]
    fn generic_over_f32() {
        let d = WeightDistribution::<f32>::exponential(1.0).unwrap();
        assert!((d.v_squared(1.0).unwrap() - 1.0 / 3.0).abs() < 1e-6);
        let u = WeightDistribution::<f32>::uniform(0.0, 1.0).unwrap();
        assert!((u.psi(1.0).unwrap() + 0.458_675).abs() < 1e-5);
    }
}
