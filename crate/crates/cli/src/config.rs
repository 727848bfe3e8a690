//! Flat experiment configuration: an optional JSON file with flags on top.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::Args;
use gibbslab::models::build_model;
use gibbslab::samplers::McmcOptions;
use gibbslab::stats::{ExperimentSpec, Observable, SamplerChoice, Thresholds};
use gibbslab::{Distribution, ProblemModel};
use serde::Deserialize;

/// Keys accepted in a config file; each mirrors a flag of the same name.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub observable: Option<String>,
    pub model: Option<String>,
    pub n: Option<usize>,
    pub k: Option<usize>,
    pub dist: Option<String>,
    pub beta: Option<f64>,
    pub replicates: Option<usize>,
    pub gibbs_samples: Option<usize>,
    pub instances: Option<usize>,
    pub sampler: Option<String>,
    pub burn_in: Option<u64>,
    pub thin: Option<u64>,
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub prefix: Option<String>,
    pub thresholds: Option<Thresholds>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

/// Model, weight law and temperature, shared by every subcommand.
#[derive(Args, Debug, Clone, Default)]
pub struct InstanceArgs {
    /// matching-bipartite, matching-complete, traveling-salesman, spanning-tree or k-factor
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Degree for k-factor
    #[arg(long)]
    pub k: Option<usize>,
    /// exp:RATE, uniform:LO:HI or censored:P:<dist>
    #[arg(long)]
    pub dist: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    /// logz, cluster, overlap, typical, gibbsavg, free_energy_lln or ust_stein_chen
    #[arg(long)]
    pub observable: Option<String>,
    /// Weight replicates for the annealed observables
    #[arg(long)]
    pub replicates: Option<usize>,
    /// Gibbs samples (or pairs) per instance
    #[arg(long)]
    pub gibbs_samples: Option<usize>,
    /// Weight instances for overlap and typical
    #[arg(long)]
    pub instances: Option<usize>,
    /// auto, exact or mcmc
    #[arg(long)]
    pub sampler: Option<String>,
    /// Accepted MCMC moves before the first sample
    #[arg(long)]
    pub burn_in: Option<u64>,
    /// MCMC proposals between samples
    #[arg(long)]
    pub thin: Option<u64>,
    /// JSON file with any of the keys above; flags take precedence
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// File name stem for outputs (default: <observable>_<model>)
    #[arg(long)]
    pub prefix: Option<String>,
}

pub struct Resolved {
    pub spec: ExperimentSpec,
    pub out_dir: PathBuf,
    pub prefix: String,
}

fn required<T>(v: Option<T>, key: &str) -> Result<T> {
    v.ok_or_else(|| anyhow!("missing `{key}`: pass --{} or set it in the config file", key.replace('_', "-")))
}

pub fn model_from(family: &str, n: usize, k: Option<usize>) -> Result<ProblemModel> {
    Ok(build_model(family, n, k)?)
}

pub fn dist_from(s: &str) -> Result<Distribution> {
    Ok(s.parse::<Distribution>()?)
}

impl InstanceArgs {
    /// Flags over file values.
    fn over(&self, f: &FileConfig) -> InstanceArgs {
        InstanceArgs {
            model: self.model.clone().or_else(|| f.model.clone()),
            n: self.n.or(f.n),
            k: self.k.or(f.k),
            dist: self.dist.clone().or_else(|| f.dist.clone()),
            beta: self.beta.or(f.beta),
            seed: self.seed.or(f.seed),
        }
    }

    pub fn model(&self) -> Result<ProblemModel> {
        model_from(&required(self.model.clone(), "model")?, required(self.n, "n")?, self.k)
    }

    pub fn dist(&self) -> Result<Distribution> {
        dist_from(&required(self.dist.clone(), "dist")?)
    }

    pub fn beta(&self) -> Result<f64> {
        let b = required(self.beta, "beta")?;
        if !(b >= 0.0 && b.is_finite()) {
            bail!("invalid `beta`: must be a finite number >= 0, got {b}");
        }
        Ok(b)
    }
}

impl VerifyArgs {
    pub fn resolve(&self) -> Result<Resolved> {
        let file = match &self.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let inst = self.instance.over(&file);
        let observable: Observable = required(self.observable.clone().or(file.observable.clone()), "observable")?.parse()?;
        let model = inst.model()?;
        let mut spec = ExperimentSpec::new(observable, model, inst.dist()?, inst.beta()?, required(inst.seed, "seed")?);
        if let Some(r) = self.replicates.or(file.replicates) {
            spec.replicates = r;
        }
        if let Some(g) = self.gibbs_samples.or(file.gibbs_samples) {
            spec.gibbs_samples = g;
        }
        if let Some(i) = self.instances.or(file.instances) {
            spec.instances = i;
        }
        if let Some(s) = self.sampler.clone().or(file.sampler.clone()) {
            spec.sampler = s.parse::<SamplerChoice>()?;
        }
        let (burn_in, thin) = (self.burn_in.or(file.burn_in), self.thin.or(file.thin));
        if burn_in.is_some() || thin.is_some() {
            let d = McmcOptions::defaults(&model);
            let burn_in = burn_in.unwrap_or(d.burn_in);
            spec.mcmc = Some(McmcOptions {
                burn_in,
                thin: thin.unwrap_or(d.thin),
                max_burn_in_proposals: d.max_burn_in_proposals.max(burn_in.saturating_mul(1000)),
            });
        }
        if let Some(t) = file.thresholds {
            spec.thresholds = t;
        }
        spec.validate()?;
        let prefix = self
            .prefix
            .clone()
            .or(file.prefix)
            .unwrap_or_else(|| format!("{}_{}_n{}", observable, model.family(), model.n()));
        Ok(Resolved { spec, out_dir: self.out_dir.clone().or(file.out_dir).unwrap_or_else(|| PathBuf::from(".")), prefix })
    }
}
