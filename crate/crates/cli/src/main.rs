use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use gibbslab::limits::{gibbs_avg_clt, logz_limit, overlap_lambda, typical_clt};
use gibbslab::oracles::{check_oracle_caps, log_partition};
use gibbslab::rng::{self, Purpose};
use gibbslab::samplers::{mcmc_run, typical_weight_observable, ExactSampler, McmcOptions};
use gibbslab::selftest::run_selftest;
use gibbslab::stats::{run_experiment, SamplerChoice};
use serde_json::json;

mod config;
mod output;

use config::{model_from, InstanceArgs, VerifyArgs};
use output::{fmt_f64, write_json, write_plot_data, write_values, Paths};

#[derive(Parser, Debug)]
#[command(name = "gibbslab", version, about = "Gibbs measures on random combinatorial problems")]
struct Cli {
    /// Worker threads (default: all cores)
    #[arg(long, global = true, env = "GIBBSLAB_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact log Z and its β-derivative for one weight instance
    Oracle {
        #[command(flatten)]
        instance: InstanceArgs,
        /// Which weight replicate of the seed to use
        #[arg(long, default_value_t = 0)]
        replicate: u64,
    },
    /// Draw Gibbs samples on one weight instance
    Sample {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long, default_value_t = 100)]
        count: usize,
        /// auto, exact or mcmc
        #[arg(long, default_value = "auto")]
        sampler: String,
        #[arg(long, default_value_t = 0)]
        replicate: u64,
        /// CSV output (default: stdout)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a replicated experiment and check it against its limit law
    Verify(VerifyArgs),
    /// Print the predicted limit laws
    Limits {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long)]
        json: bool,
    },
    /// Oracle and sampler checks on tiny instances
    Selftest {
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

enum Status {
    Pass,
    Fail,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli.command) {
        Ok(Status::Pass) => ExitCode::SUCCESS,
        Ok(Status::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cmd: Command) -> Result<Status> {
    match cmd {
        Command::Oracle { instance, replicate } => oracle(&instance, replicate),
        Command::Sample { instance, count, sampler, replicate, out } => sample(&instance, count, &sampler, replicate, out),
        Command::Verify(args) => verify(&args),
        Command::Limits { instance, json } => limits(&instance, json),
        Command::Selftest { seed } => selftest(seed),
    }
}

fn oracle(a: &InstanceArgs, replicate: u64) -> Result<Status> {
    let (model, dist, beta) = (a.model()?, a.dist()?, a.beta()?);
    check_oracle_caps(&model)?;
    let seed = a.seed.unwrap_or(0);
    let w = dist.sample_weights(model.edge_count(), rng::derive_seed(seed, Purpose::Weights, replicate))?;
    let r = log_partition(&model, &w, beta)?;
    let m = model.config_size() as f64;
    let out = json!({
        "model": model,
        "dist": dist,
        "seed": seed,
        "replicate": replicate,
        "result": r,
        "gibbs_mean_weight": r.gibbs_mean_weight(),
        "log_z_minus_m_psi": r.log_z - m * dist.psi(beta)?,
    });
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(Status::Pass)
}

fn sample(a: &InstanceArgs, count: usize, sampler: &str, replicate: u64, out: Option<PathBuf>) -> Result<Status> {
    let (model, dist, beta) = (a.model()?, a.dist()?, a.beta()?);
    let choice: SamplerChoice = sampler.parse()?;
    let seed = a.seed.unwrap_or(0);
    let w = dist.sample_weights(model.edge_count(), rng::derive_seed(seed, Purpose::Weights, replicate))?;
    let gseed = rng::derive_seed(seed, Purpose::Gibbs, replicate);
    let exact = match choice {
        SamplerChoice::Mcmc => None,
        SamplerChoice::Exact => Some(ExactSampler::new(&model, &w, beta)?),
        SamplerChoice::Auto => ExactSampler::new(&model, &w, beta).ok(),
    };
    let samples = match exact {
        Some(s) => {
            let mut r = rng::stream(gseed, Purpose::Gibbs, 0);
            (0..count).map(|_| s.sample(&mut r)).collect()
        }
        None => {
            mcmc_run(&model, &w, beta, count, McmcOptions::defaults(&model), rng::stream(gseed, Purpose::Chain, 0))?
                .samples
        }
    };
    let sink: Box<dyn Write> = match &out {
        Some(p) => Box::new(std::fs::File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(std::io::stdout().lock()),
    };
    let mut wr = csv::Writer::from_writer(sink);
    wr.write_record(["index", "weight", "typical", "method", "acceptance_rate", "edges"])?;
    for (i, s) in samples.iter().enumerate() {
        let typical = typical_weight_observable(s, &model, &dist, beta).unwrap_or(f64::NAN);
        let edges: Vec<String> = s.config.edges().iter().map(|e| e.to_string()).collect();
        let method = serde_json::to_value(s.method)?.as_str().unwrap_or_default().to_string();
        let acc = s.chain_meta.map(|c| fmt_f64(c.acceptance_rate)).unwrap_or_default();
        wr.write_record([i.to_string(), fmt_f64(s.weight), fmt_f64(typical), method, acc, edges.join(" ")])?;
    }
    wr.flush()?;
    Ok(Status::Pass)
}

fn verify(args: &VerifyArgs) -> Result<Status> {
    let resolved = args.resolve()?;
    let report = run_experiment(&resolved.spec)?;
    std::fs::create_dir_all(&resolved.out_dir)
        .with_context(|| format!("creating {}", resolved.out_dir.display()))?;
    let paths = Paths::new(&resolved.out_dir, &resolved.prefix);
    write_values(&paths.values, &report)?;
    let plot = write_plot_data(&paths.plot, &report)?;
    write_json(&paths.summary, &report)?;
    if let Some(law) = &report.predicted {
        println!("{} on {} with {}, beta = {}: predicted {law}", report.observable, report.spec.model, report.spec.dist, report.spec.beta);
    }
    for (gi, g) in report.groups.iter().enumerate() {
        for c in &g.checks {
            println!("{} group {gi} {}: {:.6} ({})", if c.pass { "PASS" } else { "FAIL" }, c.name, c.value, c.bound);
        }
    }
    if let Some(s) = report.summary {
        println!("summary: {s:.6e}");
    }
    println!("dropped replicates: {}, runtime {} ms", report.dropped_replicates, report.runtime_ms);
    println!("wrote {} and {}", paths.values.display(), paths.summary.display());
    if plot {
        println!("wrote {}", paths.plot.display());
    }
    Ok(if report.pass { Status::Pass } else { Status::Fail })
}

fn limits(a: &InstanceArgs, as_json: bool) -> Result<Status> {
    let family = a.model.clone().ok_or_else(|| anyhow::anyhow!("missing `model`: pass --model"))?;
    // the laws use the n → ∞ value of γ, so any valid size will do
    let n = a.n.unwrap_or(if family == "k-factor" { a.k.unwrap_or(1) + 1 } else { 4 });
    let model = model_from(&family, n, a.k)?;
    let (dist, beta) = (a.dist()?, a.beta()?);
    let laws = [
        ("logz", logz_limit(&model, &dist, beta)?),
        ("overlap", overlap_lambda(&model, &dist, beta)?),
        ("typical", typical_clt(&dist, beta)?),
        ("gibbsavg", gibbs_avg_clt(&model, &dist, beta)?),
    ];
    let c = model.constants();
    if as_json {
        let obj: serde_json::Map<_, _> =
            laws.iter().map(|(k, l)| (k.to_string(), serde_json::to_value(l).expect("law serializes"))).collect();
        let out = json!({
            "family": model.family(),
            "dist": dist,
            "beta": beta,
            "gamma": c.gamma_real::<f64>(),
            "psi": dist.psi(beta)?,
            "v_squared": dist.v_squared(beta)?,
            "laws": obj,
        });
        println!("{}", serde_json::to_string_pretty(&out)?);
    } else {
        println!("{} with {dist}, beta = {beta}, gamma = {}", model.family(), c.gamma_real::<f64>());
        for (k, l) in &laws {
            println!("{k:>9}: {l}");
        }
    }
    Ok(Status::Pass)
}

fn selftest(seed: u64) -> Result<Status> {
    let start = std::time::Instant::now();
    let cases = run_selftest(seed);
    for c in &cases {
        println!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    println!("{} cases in {:.2} s", cases.len(), start.elapsed().as_secs_f64());
    Ok(if cases.iter().all(|c| c.pass) { Status::Pass } else { Status::Fail })
}
