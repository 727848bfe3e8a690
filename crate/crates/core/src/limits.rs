//! Limit laws predicted at fixed β, computed from γ and ψ, ψ′, ψ″ alone.

use std::fmt;

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Discrete, DiscreteCDF, Normal, Poisson};

use crate::error::{Error, Result};
use crate::models::ProblemModel;
use crate::weights::WeightDistribution;
use crate::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LawKind<T> {
    Normal { mean: T, variance: T },
    Poisson { lambda: T },
}

/// A predicted limit, with the finite-n centering and scaling under which the
/// observable converges to it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LimitLaw<T> {
    #[serde(flatten)]
    pub kind: LawKind<T>,
    pub centering: String,
    pub scaling: String,
}

impl<T: Scalar> LimitLaw<T> {
    fn normal(mean: T, variance: T, centering: &str, scaling: &str) -> Self {
        Self {
            kind: LawKind::Normal { mean, variance },
            centering: centering.to_string(),
            scaling: scaling.to_string(),
        }
    }

    pub fn mean(&self) -> T {
        match self.kind {
            LawKind::Normal { mean, .. } => mean,
            LawKind::Poisson { lambda } => lambda,
        }
    }

    pub fn variance(&self) -> T {
        match self.kind {
            LawKind::Normal { variance, .. } => variance,
            LawKind::Poisson { lambda } => lambda,
        }
    }

    /// P(X <= x). A zero-variance normal is a point mass.
    pub fn cdf(&self, x: f64) -> f64 {
        match self.kind {
            LawKind::Normal { mean, variance } => {
                let (m, v) = (mean.as_f64(), variance.as_f64());
                if v <= 0.0 {
                    return if x >= m { 1.0 } else { 0.0 };
                }
                Normal::new(m, v.sqrt()).expect("finite parameters").cdf(x)
            }
            LawKind::Poisson { lambda } => {
                if x < 0.0 {
                    return 0.0;
                }
                poisson(lambda.as_f64()).map_or(1.0, |p| p.cdf(x.floor() as u64))
            }
        }
    }

    /// P(X = k) for Poisson laws; `None` for normal laws.
    pub fn pmf(&self, k: u64) -> Option<f64> {
        match self.kind {
            LawKind::Poisson { lambda } => {
                Some(poisson(lambda.as_f64()).map_or(if k == 0 { 1.0 } else { 0.0 }, |p| p.pmf(k)))
            }
            LawKind::Normal { .. } => None,
        }
    }

    pub fn to_f64(&self) -> LimitLaw<f64> {
        LimitLaw {
            kind: match self.kind {
                LawKind::Normal { mean, variance } => {
                    LawKind::Normal { mean: mean.as_f64(), variance: variance.as_f64() }
                }
                LawKind::Poisson { lambda } => LawKind::Poisson { lambda: lambda.as_f64() },
            },
            centering: self.centering.clone(),
            scaling: self.scaling.clone(),
        }
    }
}

fn poisson(lambda: f64) -> Option<Poisson> {
    (lambda > 0.0).then(|| Poisson::new(lambda).expect("positive rate"))
}

impl<T: Scalar> fmt::Display for LimitLaw<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            LawKind::Normal { mean, variance } => write!(f, "Normal({mean}, {variance})")?,
            LawKind::Poisson { lambda } => write!(f, "Poisson({lambda})")?,
        }
        write!(f, " [centering: {}; scaling: {}]", self.centering, self.scaling)
    }
}

fn gamma_of<T: Scalar>(model: &ProblemModel) -> T {
    model.constants().gamma_real()
}

/// log Z - mψ(β) ⇒ N(-γv², 2γv²).
pub fn logz_limit<T: Scalar>(model: &ProblemModel, dist: &WeightDistribution<T>, beta: T) -> Result<LimitLaw<T>> {
    let gv = gamma_of::<T>(model) * dist.v_squared(beta)?;
    Ok(LimitLaw::normal(-gv, gv + gv, "log Z - m·ψ(β)", "none"))
}

/// |π ∩ π′| for two independent Gibbs samples ⇒ Poi(2γ e^{ψ(2β)-2ψ(β)}).
pub fn overlap_lambda<T: Scalar>(model: &ProblemModel, dist: &WeightDistribution<T>, beta: T) -> Result<LimitLaw<T>> {
    let two_gamma = T::lit(2.0) * gamma_of::<T>(model);
    Ok(LimitLaw {
        kind: LawKind::Poisson { lambda: two_gamma * dist.tilt_ratio_log(beta)?.exp() },
        centering: "none".into(),
        scaling: "none".into(),
    })
}

/// (W(π) + mψ′(β))/√m ⇒ N(0, ψ″(β)) for π drawn from the Gibbs measure.
pub fn typical_clt<T: Scalar>(dist: &WeightDistribution<T>, beta: T) -> Result<LimitLaw<T>> {
    Ok(LimitLaw::normal(T::zero(), dist.psi_double_prime(beta)?, "W(π) + m·ψ′(β)", "÷ √m"))
}

/// ⟨W(π)⟩_β + mψ′(β) ⇒ N(μ, σ²) with
/// μ = 2γ(ψ′(β) - ψ′(2β))e^{ψ(2β)-2ψ(β)} and
/// σ² = 2γ((ψ′(β) - ψ′(2β))² + ψ″(2β))e^{ψ(2β)-2ψ(β)}.
pub fn gibbs_avg_clt<T: Scalar>(model: &ProblemModel, dist: &WeightDistribution<T>, beta: T) -> Result<LimitLaw<T>> {
    let two_gamma = T::lit(2.0) * gamma_of::<T>(model);
    let tilt = dist.tilt_ratio_log(beta)?.exp();
    let dp = dist.psi_prime(beta)? - dist.psi_prime(beta + beta)?;
    let mean = two_gamma * dp * tilt;
    let variance = two_gamma * (dp * dp + dist.psi_double_prime(beta + beta)?) * tilt;
    Ok(LimitLaw::normal(mean, variance, "⟨W(π)⟩_β + m·ψ′(β)", "none"))
}

/// One block of a multipartite model: m_st edges per configuration inside
/// the block, its γ_st and its weight law.
#[derive(Clone, Debug)]
pub struct Block<T: Scalar> {
    pub m: usize,
    pub gamma: T,
    pub dist: WeightDistribution<T>,
}

/// Σ_blocks: log Z - Σ m_st ψ_st(β) ⇒ N(-Σ γ_st v²_st, 2 Σ γ_st v²_st).
pub fn multipartite_logz_limit<T: Scalar>(blocks: &[Block<T>], beta: T) -> Result<LimitLaw<T>> {
    if blocks.is_empty() {
        return Err(Error::Empty("at least one block is required"));
    }
    let mut s = T::zero();
    for b in blocks {
        if !(b.gamma > T::zero()) {
            return Err(Error::param("gamma", format!("block γ must be positive, got {}", b.gamma)));
        }
        s += b.gamma * b.dist.v_squared(beta)?;
    }
    Ok(LimitLaw::normal(-s, s + s, "log Z - Σ m_st·ψ_st(β)", "none"))
}

/// Σ m_st ψ_st(β), the centering of [`multipartite_logz_limit`].
pub fn multipartite_centering<T: Scalar>(blocks: &[Block<T>], beta: T) -> Result<T> {
    blocks.iter().try_fold(T::zero(), |acc, b| Ok(acc + T::from_usize_lossy(b.m) * b.dist.psi(beta)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn exp1() -> WeightDistribution<f64> {
        WeightDistribution::exponential(1.0).unwrap()
    }

    fn normal_params(l: &LimitLaw<f64>) -> (f64, f64) {
        match l.kind {
            LawKind::Normal { mean, variance } => (mean, variance),
            _ => panic!("expected normal"),
        }
    }

    #[test]
    fn logz_values() {
        let bip = ProblemModel::matching_bipartite(10).unwrap();
        let tree = ProblemModel::spanning_tree(10).unwrap();
        let (m, v) = normal_params(&logz_limit(&bip, &exp1(), 1.0).unwrap());
        assert_abs_diff_eq!(m, -1.0 / 6.0, epsilon = 1e-15);
        assert_abs_diff_eq!(v, 1.0 / 3.0, epsilon = 1e-15);
        let (m, v) = normal_params(&logz_limit(&tree, &exp1(), 1.0).unwrap());
        assert_abs_diff_eq!(m, -1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(v, 2.0 / 3.0, epsilon = 1e-15);
        let (m, v) = normal_params(&logz_limit(&tree, &exp1(), 0.0).unwrap());
        assert_eq!((m, v), (0.0, 0.0));
    }

    #[test]
    fn overlap_values() {
        let lam = |m: ProblemModel, b: f64| overlap_lambda(&m, &exp1(), b).unwrap().mean();
        assert_abs_diff_eq!(lam(ProblemModel::matching_bipartite(5).unwrap(), 0.0), 1.0);
        assert_abs_diff_eq!(lam(ProblemModel::spanning_tree(5).unwrap(), 0.0), 2.0);
        assert_abs_diff_eq!(lam(ProblemModel::traveling_salesman(5).unwrap(), 0.0), 2.0);
        assert_abs_diff_eq!(lam(ProblemModel::matching_complete(5).unwrap(), 0.0), 0.5);
        assert_abs_diff_eq!(lam(ProblemModel::spanning_tree(5).unwrap(), 1.0), 8.0 / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn typical_and_gibbs_values() {
        let (m, v) = normal_params(&typical_clt(&exp1(), 1.0).unwrap());
        assert_eq!(m, 0.0);
        assert_abs_diff_eq!(v, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(normal_params(&typical_clt(&exp1(), 0.0).unwrap()).1, 1.0);

        let tree = ProblemModel::spanning_tree(10).unwrap();
        let (m, v) = normal_params(&gibbs_avg_clt(&tree, &exp1(), 1.0).unwrap());
        assert_abs_diff_eq!(m, -4.0 / 9.0, epsilon = 1e-14);
        assert_abs_diff_eq!(v, 10.0 / 27.0, epsilon = 1e-14);
        let bip = ProblemModel::matching_bipartite(10).unwrap();
        let (m, v) = normal_params(&gibbs_avg_clt(&bip, &exp1(), 1.0).unwrap());
        assert_abs_diff_eq!(m, -2.0 / 9.0, epsilon = 1e-14);
        assert_abs_diff_eq!(v, 5.0 / 27.0, epsilon = 1e-14);
        assert_eq!(normal_params(&gibbs_avg_clt(&bip, &exp1(), 0.0).unwrap()).0, 0.0);
    }

    #[test]
    fn multipartite_blocks() {
        let unif = WeightDistribution::uniform(0.0, 1.0).unwrap();
        let blocks = [
            Block { m: 100, gamma: 0.5, dist: exp1() },
            Block { m: 50, gamma: 0.25, dist: unif.clone() },
        ];
        let (m, v) = normal_params(&multipartite_logz_limit(&blocks, 1.0).unwrap());
        let want = -(0.5 / 3.0 + 0.25 * unif.v_squared(1.0).unwrap());
        assert_abs_diff_eq!(m, want, epsilon = 1e-15);
        assert_abs_diff_eq!(m, -0.1871608, epsilon = 1e-7);
        assert_abs_diff_eq!(v, -2.0 * m, epsilon = 1e-15);

        // two half-γ blocks of one law add up to the single-block limit
        let tree = ProblemModel::spanning_tree(10).unwrap();
        let halves = [Block { m: 5, gamma: 0.5, dist: exp1() }, Block { m: 4, gamma: 0.5, dist: exp1() }];
        assert_eq!(
            multipartite_logz_limit(&halves, 0.7).unwrap().kind,
            logz_limit(&tree, &exp1(), 0.7).unwrap().kind
        );
    }

    #[test]
    fn cdf_shapes() {
        let pois = overlap_lambda(&ProblemModel::spanning_tree(5).unwrap(), &exp1(), 0.0).unwrap();
        assert_abs_diff_eq!(pois.cdf(0.0), (-2.0f64).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(pois.pmf(1).unwrap(), 2.0 * (-2.0f64).exp(), epsilon = 1e-15);
        let norm = typical_clt(&exp1(), 1.0).unwrap();
        assert_abs_diff_eq!(norm.cdf(0.0), 0.5, epsilon = 1e-15);
    }
}
