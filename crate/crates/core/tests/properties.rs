use gibbslab::models::graph::complete_edge_index;
use gibbslab::oracles::log_partition;
use gibbslab::stats::{ks_statistic, tv_distance_poisson};
use gibbslab::{Configuration, Distribution, ProblemModel, Weights};
use proptest::prelude::*;

fn exp1() -> Distribution {
    Distribution::exponential(1.0).unwrap()
}

fn model_strategy() -> impl Strategy<Value = ProblemModel> {
    prop_oneof![
        (2usize..7).prop_map(|n| ProblemModel::matching_bipartite(n).unwrap()),
        (3usize..8).prop_map(|n| ProblemModel::traveling_salesman(n).unwrap()),
        (2usize..30).prop_map(|n| ProblemModel::spanning_tree(n).unwrap()),
        (2usize..5).prop_map(|n| ProblemModel::matching_complete(n).unwrap()),
        Just(ProblemModel::k_factor(3, 2).unwrap()),
    ]
}

fn instance() -> impl Strategy<Value = (ProblemModel, Vec<f64>)> {
    model_strategy().prop_flat_map(|m| (Just(m), prop::collection::vec(0.0f64..3.0, m.edge_count())))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn log_z_is_nonpositive_decreasing_and_convex((model, w) in instance(), b in 0.05f64..3.0) {
        let w = Weights::from_values(w, exp1(), 0).unwrap();
        let lo = log_partition(&model, &w, b).unwrap();
        let mid = log_partition(&model, &w, b + 0.5).unwrap();
        let hi = log_partition(&model, &w, b + 1.0).unwrap();
        prop_assert!(lo.log_z <= 1e-12);
        prop_assert!(lo.dlogz_dbeta <= 1e-12);
        prop_assert!(mid.log_z <= lo.log_z + 1e-12);
        prop_assert!(lo.log_z + hi.log_z >= 2.0 * mid.log_z - 1e-9 * mid.log_z.abs().max(1.0));
    }

    #[test]
    fn scaling_weights_is_scaling_beta((model, w) in instance(), c in 0.1f64..4.0, b in 0.1f64..2.0) {
        let scaled: Vec<f64> = w.iter().map(|x| x * c).collect();
        let a = log_partition(&model, &Weights::from_values(scaled, exp1(), 0).unwrap(), b).unwrap();
        let z = log_partition(&model, &Weights::from_values(w, exp1(), 0).unwrap(), b * c).unwrap();
        prop_assert!((a.log_z - z.log_z).abs() <= 1e-9 * z.log_z.abs().max(1.0));
        prop_assert!((a.dlogz_dbeta - c * z.dlogz_dbeta).abs() <= 1e-8 * a.dlogz_dbeta.abs().max(1.0));
    }

    #[test]
    fn relabeling_vertices_leaves_trees_and_tours_unchanged(
        n in 4usize..9,
        tsp in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let model = if tsp { ProblemModel::traveling_salesman(n) } else { ProblemModel::spanning_tree(n) }.unwrap();
        let w = exp1().sample_weights(model.edge_count(), seed).unwrap();
        let perm: Vec<usize> = (0..n).rev().collect();
        let mut v = vec![0.0; model.edge_count()];
        for (e, x) in w.values.iter().enumerate() {
            let (a, b) = model.endpoints(e);
            v[complete_edge_index(n, perm[a], perm[b])] = *x;
        }
        let a = log_partition(&model, &w, 1.0).unwrap().log_z;
        let b = log_partition(&model, &Weights::from_values(v, exp1(), 0).unwrap(), 1.0).unwrap().log_z;
        prop_assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0));
    }

    #[test]
    fn single_edge_containment_is_p(model in model_strategy(), e in 0usize..1000) {
        let e = (e % model.edge_count()) as u32;
        let prob = model.containment_prob(&Configuration::new(model, vec![e]).unwrap()).unwrap();
        let p = model.constants().p;
        let want = num_rational::BigRational::new((*p.numer()).into(), (*p.denom()).into());
        prop_assert_eq!(prob, want);
    }

    #[test]
    fn ks_and_tv_are_distances(mut xs in prop::collection::vec(-5.0f64..5.0, 2..200), counts in prop::collection::vec(0u64..50, 1..20), lambda in 0.1f64..10.0) {
        xs.sort_by(f64::total_cmp);
        let d = ks_statistic(&xs, |x| 1.0 / (1.0 + (-x).exp())).unwrap();
        prop_assert!((0.0..=1.0).contains(&d));
        if counts.iter().sum::<u64>() > 0 {
            let t = tv_distance_poisson(&counts, lambda).unwrap();
            prop_assert!((0.0..=1.0).contains(&t));
        }
    }
}
