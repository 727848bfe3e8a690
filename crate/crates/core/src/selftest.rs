//! A quick oracle-equivalence and sampler sanity suite on tiny instances.

use serde::Serialize;

use crate::models::ProblemModel;
use crate::oracles::{brute_force_log_partition, gibbs_law, log_partition};
use crate::rng::{self, Purpose};
use crate::samplers::ExactSampler;
use crate::Distribution;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SelftestCase {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

fn models() -> Vec<ProblemModel> {
    vec![
        ProblemModel::MatchingBipartite { n: 5 },
        ProblemModel::TravelingSalesman { n: 6 },
        ProblemModel::SpanningTree { n: 5 },
        ProblemModel::MatchingComplete { n: 3 },
        ProblemModel::KFactor { n: 3, k: 2 },
    ]
}

/// Runs every case; never panics. All cases pass on a correct build.
pub fn run_selftest(seed: u64) -> Vec<SelftestCase> {
    let dist = Distribution::exponential(1.0).expect("valid rate");
    let mut out = Vec::new();
    for model in models() {
        let mut worst_rel = 0.0f64;
        let mut worst_der = 0.0f64;
        let mut worst_zero = 0.0f64;
        let mut err = None;
        for inst in 0..3u64 {
            let w = match dist.sample_weights(model.edge_count(), rng::derive_seed(seed, Purpose::Weights, inst)) {
                Ok(w) => w,
                Err(e) => {
                    err = Some(e.to_string());
                    break;
                }
            };
            for beta in [0.0, 0.25, 1.0, 3.0] {
                let res = (|| -> crate::Result<()> {
                    let fast = log_partition(&model, &w, beta)?;
                    let slow = brute_force_log_partition(&model, &w, beta)?;
                    worst_rel = worst_rel.max((fast.log_z - slow.log).abs() / slow.log.abs().max(1.0));
                    if beta == 0.0 {
                        worst_zero = worst_zero.max(fast.log_z.abs());
                    } else {
                        let h = 1e-5;
                        let up = brute_force_log_partition(&model, &w, beta + h)?.log;
                        let dn = brute_force_log_partition(&model, &w, beta - h)?.log;
                        let fd = (up - dn) / (2.0 * h);
                        worst_der = worst_der.max((fast.dlogz_dbeta - fd).abs() / fd.abs().max(1.0));
                    }
                    Ok(())
                })();
                if let Err(e) = res {
                    err = Some(e.to_string());
                }
            }
        }
        let pass = err.is_none() && worst_rel <= 1e-9 && worst_der <= 1e-6 && worst_zero <= 1e-12;
        out.push(SelftestCase {
            name: format!("oracle {model}"),
            pass,
            detail: err.unwrap_or_else(|| {
                format!("log Z rel err {worst_rel:.2e}, derivative rel err {worst_der:.2e}, |log Z(0)| {worst_zero:.2e}")
            }),
        });
    }
    for model in models() {
        out.push(sampler_case(&model, &dist, seed));
    }
    out
}

fn sampler_case(model: &ProblemModel, dist: &Distribution, seed: u64) -> SelftestCase {
    let draws = 20_000;
    let res = (|| -> crate::Result<(f64, f64)> {
        let w = dist.sample_weights(model.edge_count(), rng::derive_seed(seed, Purpose::Weights, 99))?;
        let law = gibbs_law(model, &w, 1.0)?;
        let sampler = ExactSampler::new(model, &w, 1.0)?;
        let mut r = rng::stream(seed, Purpose::Gibbs, 0);
        let mut hits = vec![0u64; law.configs.len()];
        for _ in 0..draws {
            let s = sampler.sample(&mut r);
            let i = law.index_of(s.config.edges()).ok_or(crate::Error::Unsupported("sample outside S".into()))?;
            hits[i] += 1;
        }
        let tv = 0.5 * hits.iter().zip(&law.probs).map(|(&h, &p)| (h as f64 / draws as f64 - p).abs()).sum::<f64>();
        // expected TV under exact sampling is about Σ√(p/(2πN))
        let scale = law.probs.iter().map(|p| (p / (2.0 * std::f64::consts::PI * draws as f64)).sqrt()).sum::<f64>();
        Ok((tv, scale))
    })();
    match res {
        Ok((tv, scale)) => SelftestCase {
            name: format!("sampler {model}"),
            pass: tv <= 3.0 * scale.max(0.005),
            detail: format!("TV {tv:.4} vs sampling scale {scale:.4}"),
        },
        Err(e) => SelftestCase { name: format!("sampler {model}"), pass: false, detail: e.to_string() },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selftest_passes() {
        let cases = run_selftest(2024);
        assert_eq!(cases.len(), 10);
        for c in &cases {
            assert!(c.pass, "{}: {}", c.name, c.detail);
        }
    }
}
