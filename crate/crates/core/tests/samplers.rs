use std::collections::HashMap;

use gibbslab::oracles::{edge_marginals, gibbs_law};
use gibbslab::rng::{self, Purpose};
use gibbslab::samplers::{initial_config, mcmc_run, overlap, ExactSampler, McmcChain, McmcOptions};
use gibbslab::stats::{run_experiment, ExperimentSpec, Observable, SamplerChoice};
use gibbslab::{Distribution, ProblemModel, Weights};

fn exp1() -> Distribution {
    Distribution::exponential(1.0).unwrap()
}

fn weights(model: &ProblemModel, dist: &Distribution, i: u64) -> Weights {
    dist.sample_weights(model.edge_count(), rng::derive_seed(31, Purpose::Weights, i)).unwrap()
}

fn tv(hits: &HashMap<Vec<u32>, u64>, configs: &[Vec<u32>], probs: &[f64]) -> f64 {
    let total: u64 = hits.values().sum();
    let mut tv = 0.0;
    for (c, &p) in configs.iter().zip(probs) {
        tv += (*hits.get(c).unwrap_or(&0) as f64 / total as f64 - p).abs();
    }
    0.5 * tv
}

#[test]
fn mcmc_matches_exact_law_on_every_family() {
    let dist = Distribution::uniform(0.0, 1.0).unwrap();
    for (i, model) in [
        ProblemModel::matching_bipartite(4).unwrap(),
        ProblemModel::matching_complete(3).unwrap(),
        ProblemModel::traveling_salesman(6).unwrap(),
        ProblemModel::spanning_tree(4).unwrap(),
        ProblemModel::k_factor(3, 2).unwrap(),
        ProblemModel::k_factor(3, 3).unwrap(),
    ]
    .into_iter()
    .enumerate()
    {
        let w = weights(&model, &dist, i as u64);
        let law = gibbs_law(&model, &w, 3.0).unwrap();
        let mut hits = HashMap::new();
        for chain in 0..4 {
            let run = mcmc_run(&model, &w, 3.0, 20_000, McmcOptions::defaults(&model), rng::stream(i as u64, Purpose::Chain, chain))
                .unwrap();
            for s in run.samples {
                *hits.entry(s.config.edges().to_vec()).or_insert(0) += 1;
            }
        }
        let d = tv(&hits, &law.configs, &law.probs);
        // sampling noise is about √(|S|/N)/2
        let noise = (law.configs.len() as f64 / 80_000.0).sqrt() / 2.0;
        assert!(d < 2.0 * noise + 0.01, "{model}: TV {d}, noise scale {noise}");
    }
}

#[test]
fn exact_wilson_at_larger_beta() {
    let model = ProblemModel::spanning_tree(5).unwrap();
    let w = weights(&model, &Distribution::uniform(0.0, 2.0).unwrap(), 0);
    let law = gibbs_law(&model, &w, 4.0).unwrap();
    let s = ExactSampler::new(&model, &w, 4.0).unwrap();
    let mut r = rng::from_seed(1);
    let mut hits = HashMap::new();
    for _ in 0..200_000 {
        *hits.entry(s.sample(&mut r).config.edges().to_vec()).or_insert(0) += 1;
    }
    assert!(tv(&hits, &law.configs, &law.probs) < 0.015);
}

#[test]
fn mean_overlap_equals_sum_of_squared_marginals() {
    // E|π ∩ π′| = Σ_e P(e)² for independent Gibbs samples
    let model = ProblemModel::spanning_tree(40).unwrap();
    let w = weights(&model, &exp1(), 3);
    let marg = edge_marginals(&model, &w, 1.0).unwrap();
    let expected: f64 = marg.iter().map(|p| p * p).sum();
    let s = ExactSampler::new(&model, &w, 1.0).unwrap();
    let mut r = rng::from_seed(8);
    let n = 20_000;
    let xs: Vec<f64> =
        (0..n).map(|_| overlap(&s.sample(&mut r).config, &s.sample(&mut r).config).unwrap() as f64).collect();
    let mean = xs.iter().sum::<f64>() / n as f64;
    let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
    assert!((mean - expected).abs() < 4.0 * sd / (n as f64).sqrt(), "{mean} vs {expected}");
}

#[test]
fn mcmc_leaves_infinite_edges_when_it_can() {
    let dist = Distribution::censored(exp1(), 0.6).unwrap();
    let model = ProblemModel::traveling_salesman(8).unwrap();
    let w = (0..50)
        .map(|i| weights(&model, &dist, 100 + i))
        .find(|w| gibbs_law(&model, w, 1.0).is_ok() && initial_config(&model).weight(w).is_infinite())
        .expect("an instance with some finite tour");
    let mut chain = McmcChain::new(&model, &w, 1.0, None, rng::from_seed(2)).unwrap();
    for _ in 0..200_000 {
        chain.step();
    }
    assert!(chain.running_weight().is_finite());
    assert!(chain.current().weight.is_finite());
}

#[test]
fn typical_experiment_via_mcmc_and_exact_agree_in_mean() {
    let model = ProblemModel::matching_bipartite(8).unwrap();
    let mut spec = ExperimentSpec::new(Observable::Typical, model, exp1(), 1.0, 21);
    spec.gibbs_samples = 3000;
    spec.instances = 1;
    let exact = run_experiment(&spec).unwrap();
    spec.sampler = SamplerChoice::Mcmc;
    let mcmc = run_experiment(&spec).unwrap();
    let (a, b) = (&exact.groups[0], &mcmc.groups[0]);
    let se = (a.sample_var / 3000.0).sqrt();
    // chain samples are correlated; allow a generous band
    assert!((a.sample_mean - b.sample_mean).abs() < 8.0 * se, "{} vs {}", a.sample_mean, b.sample_mean);
}
