use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use udg_domatic::adapt::{connect_components, eliminate_bridges, thin_edges, ThinningStrategy};
use udg_domatic::experiment::{aggregate, read_results, run_experiment_to_dir, ExperimentConfig, Variant, RESULTS_FILE};
use udg_domatic::generator::{place_nodes_seeded, GeneratorParams};
use udg_domatic::metrics::coverage_errors;
use udg_domatic::model::{build_soft_variant, CapacityMode, CostVector, Formulation};
use udg_domatic::seeds::coverage_75_row;
use udg_domatic::solver::{brute_force, check, solve, SolveLimits, SolveStatus};
use udg_domatic::GeometricGraph;

fn small_udg(nodes: usize, r_tr: f64, seed: u64) -> GeometricGraph {
    place_nodes_seeded(&GeneratorParams::new(nodes, 0.08, r_tr).with_grid(300).with_seed(seed)).unwrap().graph
}

#[test]
fn desk_experiment_round_trips_through_csv() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = ExperimentConfig::new(vec![coverage_75_row(20, 4).unwrap(), coverage_75_row(20, 5).unwrap()]);
    config.graphs_per_row = 5;
    config.partition_sizes = vec![3];
    config.limits = SolveLimits::with_time_limit(30.0);
    config.seed = 11;
    let (records, agg) = run_experiment_to_dir(&config, dir.path()).unwrap();
    assert_eq!(records.len(), 20);
    assert!(records.iter().all(|r| r.variant == Variant::Sg1));

    let back = read_results(&dir.path().join(RESULTS_FILE)).unwrap();
    assert_eq!(back, records);
    assert_eq!(aggregate(&back), agg);
    let mut shuffled = back.clone();
    shuffled.reverse();
    assert_eq!(aggregate(&shuffled), agg);

    // same seed, same graphs
    let again = run_experiment_to_dir(&config, tempfile::tempdir().unwrap().path()).unwrap().0;
    let ids = |rs: &[udg_domatic::experiment::ResultRecord]| -> Vec<(String, String)> {
        rs.iter().map(|r| (r.graph_id.clone(), format!("{:?}", r.avg_degree))).collect()
    };
    assert_eq!(ids(&again), ids(&records));
}

#[test]
fn both_variants_share_graphs() {
    let mut config = ExperimentConfig::new(vec![coverage_75_row(20, 4).unwrap()]);
    config.graphs_per_row = 2;
    config.partition_sizes = vec![3];
    config.objectives = vec![Formulation::MaximalSoft];
    config.variants = vec![Variant::Sg1, Variant::Sg2];
    config.limits = SolveLimits::with_time_limit(30.0);
    let (records, _) = run_experiment_to_dir(&config, tempfile::tempdir().unwrap().path()).unwrap();
    assert_eq!(records.len(), 4);
    for v in [Variant::Sg1, Variant::Sg2] {
        assert_eq!(records.iter().filter(|r| r.variant == v).count(), 2);
    }
}

#[test]
fn multi_mean_models_match_the_oracle() {
    let limits = SolveLimits::with_time_limit(30.0);
    for seed in 0..12 {
        let g = small_udg(4 + (seed as usize % 2), 0.35, seed);
        let caps = [
            CapacityMode::FixedK { k: 2 },
            CapacityMode::cost(CostVector::new(vec![0.5, 0.5, 1.0]).unwrap()),
            CapacityMode::cost(CostVector::new(vec![0.25, 0.25, 0.5, 0.5]).unwrap()),
        ];
        for cap in caps {
            let n = match &cap {
                CapacityMode::Cost { costs, .. } => costs.len(),
                _ => 3,
            };
            for f in [Formulation::OptimalSoft, Formulation::MaximalSoft] {
                let m = build_soft_variant(&g, n, f, cap.clone()).unwrap();
                let got = solve(&m, &limits);
                let want = brute_force(&m).unwrap();
                assert_eq!(got.objective, want.objective, "seed {seed} {cap:?} {f:?}");
                if let Some(a) = &got.assignment {
                    assert!(a.respects(&cap));
                    check::verify(&m, a).unwrap();
                }
            }
        }
    }
}

#[test]
fn maximal_never_leaves_more_incomplete_nodes() {
    let limits = SolveLimits::with_time_limit(30.0);
    for seed in 0..15 {
        let g = small_udg(12, 0.3, seed);
        let opt = solve(&build_soft_variant(&g, 3, Formulation::OptimalSoft, CapacityMode::ExactlyOne).unwrap(), &limits);
        let max = solve(&build_soft_variant(&g, 3, Formulation::MaximalSoft, CapacityMode::ExactlyOne).unwrap(), &limits);
        assert_eq!((opt.status, max.status), (SolveStatus::Optimal, SolveStatus::Optimal));
        let eo = coverage_errors(&g, opt.assignment.as_ref().unwrap()).unwrap();
        let em = coverage_errors(&g, max.assignment.as_ref().unwrap()).unwrap();
        assert!(em.inc_nodes <= eo.inc_nodes);
        assert!(eo.miss_cov <= em.miss_cov);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn adaptation_chain_holds_its_postconditions(nodes in 3usize..40, r_tr in 0.1f64..0.4, seed in any::<u64>()) {
        let g = small_udg(nodes, r_tr, seed);
        let joined = connect_components(&g);
        prop_assert!(joined.is_connected());
        prop_assert!(joined.edge_count() >= g.edge_count());
        if joined.node_count() >= 3 {
            let d = eliminate_bridges(&joined).unwrap();
            prop_assert!(d.bridges().is_empty());
            prop_assert!(d.is_connected());
            let target = (d.avg_degree() - 1.0).max(2.0);
            if target <= d.avg_degree() {
                let strategy = ThinningStrategy::squared_length();
                let out = thin_edges(&d, target, &strategy, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
                prop_assert!(out.graph.is_connected());
                if out.reached {
                    prop_assert!(out.graph.avg_degree() <= target);
                }
            }
        }
    }

    #[test]
    fn search_objective_never_beats_bound(nodes in 5usize..30, r_tr in 0.2f64..0.5, seed in any::<u64>(), n in 2usize..5) {
        let g = small_udg(nodes, r_tr, seed);
        let m = build_soft_variant(&g, n, Formulation::MaximalSoft, CapacityMode::ExactlyOne).unwrap();
        let r = solve(&m, &SolveLimits { node_limit: Some(2000), ..SolveLimits::with_time_limit(5.0) });
        prop_assert!(matches!(r.status, SolveStatus::Optimal | SolveStatus::FeasibleTimeLimit));
        let obj = r.objective.unwrap();
        prop_assert!(obj <= r.best_bound.unwrap());
        prop_assert!(obj <= nodes as f64);
        prop_assert_eq!(check::verify(&m, r.assignment.as_ref().unwrap()).unwrap(), obj);
    }
}
