//! Replicated experiments: one observable, many independent streams, one
//! report against the predicted limit.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{histogram, ks_statistic, mean_var, tv_distance_poisson};
use crate::cluster::cluster_error_stat;
use crate::error::{check_beta, Error, Result};
use crate::limits::{gibbs_avg_clt, logz_limit, overlap_lambda, typical_clt, LawKind, LimitLaw};
use crate::models::ProblemModel;
use crate::oracles::{check_oracle_caps, log_partition, TREE_CAP};
use crate::rng::{self, Purpose};
use crate::samplers::{
    mcmc_run, overlap, typical_weight_observable, uniform_config, ExactSampler, GibbsSample, McmcOptions,
    SampleMethod, BIPARTITE_SAMPLER_CAP, TSP_SAMPLER_CAP,
};
use crate::Distribution;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    /// log Z - mψ(β), one value per weight instance.
    Logz,
    /// (∏(1 + pξ) - Ẑ)² per weight instance.
    Cluster,
    /// |π ∩ π′| for Gibbs pairs on fixed instances.
    Overlap,
    /// (W + mψ′(β))/√m for Gibbs samples on fixed instances.
    Typical,
    /// ⟨W⟩_β + mψ′(β) per weight instance.
    Gibbsavg,
    /// (1/m) log Z - ψ(β) per weight instance.
    FreeEnergyLln,
    /// Overlap of two uniform spanning trees against Poi(2).
    UstSteinChen,
}

impl Observable {
    pub const ALL: [Observable; 7] = [
        Observable::Logz,
        Observable::Cluster,
        Observable::Overlap,
        Observable::Typical,
        Observable::Gibbsavg,
        Observable::FreeEnergyLln,
        Observable::UstSteinChen,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Observable::Logz => "logz",
            Observable::Cluster => "cluster",
            Observable::Overlap => "overlap",
            Observable::Typical => "typical",
            Observable::Gibbsavg => "gibbsavg",
            Observable::FreeEnergyLln => "free_energy_lln",
            Observable::UstSteinChen => "ust_stein_chen",
        }
    }

    /// Runs on fixed weight instances with Gibbs samples.
    pub fn is_quenched(&self) -> bool {
        matches!(self, Observable::Overlap | Observable::Typical)
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Observable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        Self::ALL.into_iter().find(|o| o.name() == key).ok_or_else(|| {
            let names: Vec<_> = Self::ALL.iter().map(|o| o.name()).collect();
            Error::param("observable", format!("`{s}` is not one of {}", names.join(", ")))
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerChoice {
    /// Exact when the family has an exact sampler at this size, MCMC otherwise.
    #[default]
    Auto,
    Exact,
    Mcmc,
}

impl FromStr for SamplerChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "auto" => Ok(Self::Auto),
            "exact" => Ok(Self::Exact),
            "mcmc" => Ok(Self::Mcmc),
            _ => Err(Error::param("sampler", format!("`{s}` is not one of auto, exact, mcmc"))),
        }
    }
}

/// Pass/fail bounds. Unset fields take the observable's default; a check
/// whose bound is unset everywhere is skipped.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    /// |x̄ - μ| / √(σ²/R).
    pub max_abs_z: Option<f64>,
    /// |x̄ - μ|.
    pub mean_tol: Option<f64>,
    /// Allowed [lo, hi] for sample variance over σ².
    pub var_ratio: Option<[f64; 2]>,
    pub max_ks: Option<f64>,
    pub max_tv: Option<f64>,
    /// Bound on every |value|.
    pub max_abs_value: Option<f64>,
}

impl Thresholds {
    pub fn defaults(observable: Observable) -> Self {
        let none = Self::default();
        match observable {
            Observable::Logz => {
                Self { max_abs_z: Some(3.0), var_ratio: Some([0.8, 1.2]), max_ks: Some(0.06), ..none }
            }
            Observable::Gibbsavg => {
                Self { max_abs_z: Some(3.0), var_ratio: Some([0.75, 1.25]), max_ks: Some(0.07), ..none }
            }
            Observable::Typical => Self { max_ks: Some(0.06), ..none },
            Observable::Overlap => Self { max_tv: Some(0.08), ..none },
            Observable::UstSteinChen => Self { max_tv: Some(0.06), ..none },
            Observable::FreeEnergyLln => Self { max_abs_value: Some(0.01), ..none },
            Observable::Cluster => none,
        }
    }

    /// Fields set in `over` replace those in `self`.
    pub fn merged(self, over: &Thresholds) -> Self {
        Self {
            max_abs_z: over.max_abs_z.or(self.max_abs_z),
            mean_tol: over.mean_tol.or(self.mean_tol),
            var_ratio: over.var_ratio.or(self.var_ratio),
            max_ks: over.max_ks.or(self.max_ks),
            max_tv: over.max_tv.or(self.max_tv),
            max_abs_value: over.max_abs_value.or(self.max_abs_value),
        }
    }
}

fn default_replicates() -> usize {
    1000
}

fn default_instances() -> usize {
    3
}

/// Everything needed to rerun an experiment bit for bit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub observable: Observable,
    pub model: ProblemModel,
    pub dist: Distribution,
    pub beta: f64,
    /// Weight instances for the annealed observables.
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    /// Samples (TYPICAL) or pairs (OVERLAP, UST_STEIN_CHEN) per instance.
    #[serde(default)]
    pub gibbs_samples: usize,
    /// Weight instances for the quenched observables.
    #[serde(default = "default_instances")]
    pub instances: usize,
    #[serde(default)]
    pub sampler: SamplerChoice,
    /// Chain settings; defaults to [`McmcOptions::defaults`].
    #[serde(default)]
    pub mcmc: Option<McmcOptions>,
    pub seed: u64,
    #[serde(default)]
    pub thresholds: Thresholds,
}

impl ExperimentSpec {
    pub fn new(observable: Observable, model: ProblemModel, dist: Distribution, beta: f64, seed: u64) -> Self {
        Self {
            observable,
            model,
            dist,
            beta,
            replicates: default_replicates(),
            gibbs_samples: 0,
            instances: default_instances(),
            sampler: SamplerChoice::Auto,
            mcmc: None,
            seed,
            thresholds: Thresholds::default(),
        }
    }

    /// Checks parameters and size caps without doing any of the work.
    pub fn validate(&self) -> Result<()> {
        check_beta(self.beta)?;
        if !self.beta.is_finite() {
            return Err(Error::param("beta", "must be finite"));
        }
        self.model.validated()?;
        self.dist.psi(self.beta)?;
        match self.observable {
            Observable::Logz | Observable::Gibbsavg | Observable::FreeEnergyLln | Observable::Cluster => {
                if self.replicates == 0 {
                    return Err(Error::param("replicates", "must be at least 1"));
                }
                check_oracle_caps(&self.model)
            }
            Observable::Overlap | Observable::Typical => {
                if self.gibbs_samples == 0 {
                    return Err(Error::param("gibbs_samples", "must be at least 1"));
                }
                if self.instances == 0 {
                    return Err(Error::param("instances", "must be at least 1"));
                }
                if let Some(o) = &self.mcmc {
                    if o.thin == 0 {
                        return Err(Error::param("thin", "must be at least 1"));
                    }
                }
                if self.sampler == SamplerChoice::Exact {
                    exact_feasible(&self.model)?;
                }
                Ok(())
            }
            Observable::UstSteinChen => {
                if !matches!(self.model, ProblemModel::SpanningTree { .. }) {
                    return Err(Error::Unsupported(format!("ust_stein_chen needs spanning-tree, got {}", self.model)));
                }
                if self.beta != 0.0 {
                    return Err(Error::Unsupported("ust_stein_chen runs at beta = 0".into()));
                }
                if self.gibbs_samples == 0 {
                    return Err(Error::param("gibbs_samples", "must be at least 1"));
                }
                Ok(())
            }
        }
    }

    /// Defaults overridden by the spec's own bounds.
    pub fn effective_thresholds(&self) -> Thresholds {
        Thresholds::defaults(self.observable).merged(&self.thresholds)
    }
}

fn exact_feasible(model: &ProblemModel) -> Result<()> {
    let cap = |what, got: usize, cap: usize| {
        if got > cap {
            Err(Error::SizeCap { what, got: got as u64, cap: cap as u64 })
        } else {
            Ok(())
        }
    };
    match *model {
        ProblemModel::SpanningTree { n } => cap("exact tree sampler (n)", n, TREE_CAP),
        ProblemModel::MatchingBipartite { n } => cap("exact bipartite sampler (n)", n, BIPARTITE_SAMPLER_CAP),
        ProblemModel::TravelingSalesman { n } => cap("exact tour sampler (n)", n, TSP_SAMPLER_CAP),
        _ => model.check_enumerable().map(|_| ()),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", content = "data", rename_all = "snake_case")]
pub enum Values {
    Reals(Vec<f64>),
    Counts(Vec<u64>),
}

impl Values {
    pub fn len(&self) -> usize {
        match self {
            Values::Reals(v) => v.len(),
            Values::Counts(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn as_f64(&self) -> Vec<f64> {
        match self {
            Values::Reals(v) => v.clone(),
            Values::Counts(v) => v.iter().map(|&c| c as f64).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: String,
    pub pass: bool,
}

/// Statistics of one batch of replicate values: all weight replicates for
/// the annealed observables, one weight instance for the quenched ones.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GroupReport {
    /// Quenched instance index.
    pub instance: Option<usize>,
    /// Seed of the instance's weight vector.
    pub instance_seed: Option<u64>,
    pub values: Values,
    pub requested: usize,
    pub dropped: usize,
    pub sample_mean: f64,
    pub sample_var: f64,
    pub ks_stat: Option<f64>,
    pub tv_stat: Option<f64>,
    pub mean_z: Option<f64>,
    pub var_ratio: Option<f64>,
    pub sampler: Option<SampleMethod>,
    pub acceptance_rate: Option<f64>,
    pub checks: Vec<Check>,
}

impl GroupReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub observable: Observable,
    pub spec: ExperimentSpec,
    pub thresholds: Thresholds,
    pub predicted: Option<LimitLaw<f64>>,
    pub groups: Vec<GroupReport>,
    /// Replicates or samples asked for, summed over groups.
    pub requested: usize,
    /// Instances with every configuration at infinite weight.
    pub dropped_replicates: usize,
    /// Worst value over groups.
    pub ks_stat: Option<f64>,
    pub tv_stat: Option<f64>,
    pub mean_z: Option<f64>,
    pub var_ratio: Option<f64>,
    /// m · mean squared difference for CLUSTER; max |value| for FREE_ENERGY_LLN.
    pub summary: Option<f64>,
    pub pass: bool,
    pub runtime_ms: u64,
}

impl ExperimentReport {
    pub fn checks(&self) -> impl Iterator<Item = &Check> {
        self.groups.iter().flat_map(|g| g.checks.iter())
    }
}

/// Runs the experiment described by `spec`. Replicates run in parallel on
/// disjoint streams; results do not depend on the thread count.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    spec.validate()?;
    let start = Instant::now();
    let th = spec.effective_thresholds();
    let (predicted, groups, summary) = match spec.observable {
        Observable::Logz | Observable::Gibbsavg | Observable::FreeEnergyLln => annealed(spec, &th)?,
        Observable::Cluster => cluster(spec)?,
        Observable::Overlap | Observable::Typical => quenched(spec, &th)?,
        Observable::UstSteinChen => stein_chen(spec, &th)?,
    };
    let worst = |f: fn(&GroupReport) -> Option<f64>, key: fn(f64) -> f64| {
        groups.iter().filter_map(f).max_by(|a, b| key(*a).total_cmp(&key(*b)))
    };
    Ok(ExperimentReport {
        observable: spec.observable,
        spec: spec.clone(),
        thresholds: th,
        ks_stat: worst(|g| g.ks_stat, |x| x),
        tv_stat: worst(|g| g.tv_stat, |x| x),
        mean_z: worst(|g| g.mean_z, f64::abs),
        var_ratio: worst(|g| g.var_ratio, |x| (x - 1.0).abs()),
        requested: groups.iter().map(|g| g.requested).sum(),
        dropped_replicates: groups.iter().map(|g| g.dropped).sum(),
        pass: groups.iter().all(GroupReport::pass),
        predicted,
        groups,
        summary,
        runtime_ms: start.elapsed().as_millis() as u64,
    })
}

type Outcome = (Option<LimitLaw<f64>>, Vec<GroupReport>, Option<f64>);

fn check(name: &str, value: f64, bound: String, pass: bool) -> Check {
    Check { name: name.to_string(), value, bound, pass: pass && value.is_finite() }
}

/// Report for real values against a normal law (or no law).
fn real_group(values: Vec<f64>, requested: usize, law: Option<&LimitLaw<f64>>, th: &Thresholds) -> Result<GroupReport> {
    if values.is_empty() {
        return Err(Error::AllInfinite);
    }
    let (mean, var) = mean_var(&values);
    let r = values.len() as f64;
    let mut g = GroupReport {
        instance: None,
        instance_seed: None,
        requested,
        dropped: requested - values.len(),
        sample_mean: mean,
        sample_var: var,
        ks_stat: None,
        tv_stat: None,
        mean_z: None,
        var_ratio: None,
        sampler: None,
        acceptance_rate: None,
        checks: Vec::new(),
        values: Values::Reals(Vec::new()),
    };
    if let Some(law) = law {
        let (mu, sigma2) = (law.mean(), law.variance());
        if values.len() >= 2 {
            let mut sorted = values.clone();
            sorted.sort_by(f64::total_cmp);
            g.ks_stat = Some(ks_statistic(&sorted, |x| law.cdf(x))?);
        }
        if sigma2 > 0.0 {
            g.mean_z = Some((mean - mu) / (sigma2 / r).sqrt());
            g.var_ratio = Some(var / sigma2);
        }
        if let (Some(b), Some(z)) = (th.max_abs_z, g.mean_z) {
            g.checks.push(check("mean_z", z, format!("|z| <= {b}"), z.abs() <= b));
        }
        if let Some(b) = th.mean_tol {
            let d = mean - mu;
            g.checks.push(check("mean_offset", d, format!("|mean - {mu:.6}| <= {b}"), d.abs() <= b));
        }
        if let (Some([lo, hi]), Some(v)) = (th.var_ratio, g.var_ratio) {
            g.checks.push(check("var_ratio", v, format!("in [{lo}, {hi}]"), (lo..=hi).contains(&v)));
        }
        if let (Some(b), Some(k)) = (th.max_ks, g.ks_stat) {
            g.checks.push(check("ks", k, format!("<= {b}"), k <= b));
        }
    }
    if let Some(b) = th.max_abs_value {
        let worst = values.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        g.checks.push(check("max_abs_value", worst, format!("<= {b}"), worst <= b));
    }
    g.values = Values::Reals(values);
    Ok(g)
}

fn count_group(counts: Vec<u64>, law: &LimitLaw<f64>, th: &Thresholds) -> Result<GroupReport> {
    let lambda = match law.kind {
        LawKind::Poisson { lambda } => lambda,
        LawKind::Normal { .. } => unreachable!("counts are compared with a Poisson law"),
    };
    let tv = tv_distance_poisson(&histogram(&counts), lambda)?;
    let reals: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    let (mean, var) = mean_var(&reals);
    let mut checks = Vec::new();
    if let Some(b) = th.max_tv {
        checks.push(check("tv", tv, format!("<= {b}"), tv <= b));
    }
    Ok(GroupReport {
        instance: None,
        instance_seed: None,
        requested: counts.len(),
        dropped: 0,
        sample_mean: mean,
        sample_var: var,
        ks_stat: None,
        tv_stat: Some(tv),
        mean_z: Some((mean - lambda) / (lambda / reals.len() as f64).sqrt()),
        var_ratio: Some(var / lambda),
        sampler: None,
        acceptance_rate: None,
        checks,
        values: Values::Counts(counts),
    })
}

fn annealed(spec: &ExperimentSpec, th: &Thresholds) -> Result<Outcome> {
    let (model, dist, beta) = (&spec.model, &spec.dist, spec.beta);
    let m = model.config_size() as f64;
    let psi = dist.psi(beta)?;
    let psi1 = dist.psi_prime(beta)?;
    let obs = spec.observable;
    let raw: Vec<Option<f64>> = (0..spec.replicates)
        .into_par_iter()
        .map(|r| {
            let w = dist.sample_weights(model.edge_count(), rng::derive_seed(spec.seed, Purpose::Weights, r as u64))?;
            let p = match log_partition(model, &w, beta) {
                Ok(p) => p,
                Err(Error::AllInfinite) => return Ok(None),
                Err(e) => return Err(e),
            };
            Ok(Some(match obs {
                Observable::Logz => p.log_z - m * psi,
                Observable::Gibbsavg => -p.dlogz_dbeta + m * psi1,
                _ => p.log_z / m - psi,
            }))
        })
        .collect::<Result<_>>()?;
    let values: Vec<f64> = raw.into_iter().flatten().collect();
    let law = match obs {
        Observable::Logz => Some(logz_limit(model, dist, beta)?),
        Observable::Gibbsavg => Some(gibbs_avg_clt(model, dist, beta)?),
        _ => None,
    };
    let g = real_group(values, spec.replicates, law.as_ref(), th)?;
    let summary = (obs == Observable::FreeEnergyLln).then(|| g.checks.first().map_or(f64::NAN, |c| c.value));
    Ok((law, vec![g], summary))
}

fn cluster(spec: &ExperimentSpec) -> Result<Outcome> {
    let stat = cluster_error_stat(&spec.model, &spec.dist, spec.beta, spec.replicates, spec.seed)?;
    let values: Vec<f64> = stat.values.iter().copied().filter(|x| !x.is_nan()).collect();
    let g = real_group(values, spec.replicates, None, &Thresholds::default())?;
    Ok((None, vec![g], Some(stat.scaled)))
}

/// Draws `count` samples for each of two independent streams (or one).
enum Engine {
    Exact(ExactSampler),
    Mcmc(McmcOptions),
}

fn quenched(spec: &ExperimentSpec, th: &Thresholds) -> Result<Outcome> {
    let (model, dist, beta) = (&spec.model, &spec.dist, spec.beta);
    let law = match spec.observable {
        Observable::Overlap => overlap_lambda(model, dist, beta)?,
        _ => typical_clt(dist, beta)?,
    };
    let use_exact = match spec.sampler {
        SamplerChoice::Exact => true,
        SamplerChoice::Mcmc => false,
        SamplerChoice::Auto => exact_feasible(model).is_ok(),
    };
    let mut groups = Vec::with_capacity(spec.instances);
    for i in 0..spec.instances {
        let wseed = rng::derive_seed(spec.seed, Purpose::Weights, i as u64);
        let gseed = rng::derive_seed(spec.seed, Purpose::Gibbs, i as u64);
        let w = dist.sample_weights(model.edge_count(), wseed)?;
        let engine = if use_exact {
            match ExactSampler::new(model, &w, beta) {
                Ok(s) => Engine::Exact(s),
                Err(Error::AllInfinite) => {
                    groups.push(dropped_group(i, wseed, spec.gibbs_samples));
                    continue;
                }
                Err(e) => return Err(e),
            }
        } else {
            Engine::Mcmc(spec.mcmc.unwrap_or_else(|| McmcOptions::defaults(model)))
        };
        let streams = if spec.observable == Observable::Overlap { 2 } else { 1 };
        let (draws, method, acceptance) = match &engine {
            Engine::Exact(s) => {
                let per_draw: Vec<Vec<GibbsSample>> = (0..spec.gibbs_samples)
                    .into_par_iter()
                    .map(|j| {
                        let mut r = rng::stream(gseed, Purpose::Gibbs, j as u64);
                        (0..streams).map(|_| s.sample(&mut r)).collect()
                    })
                    .collect();
                (per_draw, s.method(), None)
            }
            Engine::Mcmc(opts) => {
                let runs: Vec<_> = (0..streams)
                    .into_par_iter()
                    .map(|c| mcmc_run(model, &w, beta, spec.gibbs_samples, *opts, rng::stream(gseed, Purpose::Chain, c)))
                    .collect::<Result<_>>()?;
                let acc = runs.iter().map(|r| r.acceptance_rate).sum::<f64>() / runs.len() as f64;
                let per_draw = (0..spec.gibbs_samples)
                    .map(|j| runs.iter().map(|r| r.samples[j].clone()).collect())
                    .collect();
                (per_draw, SampleMethod::Mcmc, Some(acc))
            }
        };
        let mut g = if spec.observable == Observable::Overlap {
            let counts =
                draws.iter().map(|d| overlap(&d[0].config, &d[1].config).map(|c| c as u64)).collect::<Result<_>>()?;
            count_group(counts, &law, th)?
        } else {
            let vals = draws
                .iter()
                .map(|d| typical_weight_observable(&d[0], model, dist, beta))
                .collect::<Result<Vec<_>>>()?;
            real_group(vals, spec.gibbs_samples, Some(&law), th)?
        };
        g.instance = Some(i);
        g.instance_seed = Some(wseed);
        g.sampler = Some(method);
        g.acceptance_rate = acceptance;
        groups.push(g);
    }
    Ok((Some(law), groups, None))
}

fn dropped_group(i: usize, seed: u64, requested: usize) -> GroupReport {
    GroupReport {
        instance: Some(i),
        instance_seed: Some(seed),
        values: Values::Reals(Vec::new()),
        requested,
        dropped: requested,
        sample_mean: f64::NAN,
        sample_var: f64::NAN,
        ks_stat: None,
        tv_stat: None,
        mean_z: None,
        var_ratio: None,
        sampler: None,
        acceptance_rate: None,
        checks: Vec::new(),
    }
}

fn stein_chen(spec: &ExperimentSpec, th: &Thresholds) -> Result<Outcome> {
    let law = LimitLaw { kind: LawKind::Poisson { lambda: 2.0 }, centering: "none".into(), scaling: "none".into() };
    let counts: Vec<u64> = (0..spec.gibbs_samples)
        .into_par_iter()
        .map(|j| {
            let mut r = rng::stream(spec.seed, Purpose::Gibbs, j as u64);
            let a = uniform_config(&spec.model, &mut r)?;
            let b = uniform_config(&spec.model, &mut r)?;
            overlap(&a, &b).map(|c| c as u64)
        })
        .collect::<Result<_>>()?;
    let mut g = count_group(counts, &law, th)?;
    g.sampler = Some(SampleMethod::SequentialExact);
    Ok((Some(law), vec![g], None))
}
