//! Live-edge sampling and spread estimation.
//!
//! A [`LiveEdgeSample`] fixes a collection of live-edge graphs; every
//! estimator here is an average of reachability indicators over that
//! collection. [`exact_spread`] enumerates outcomes instead and serves as
//! the reference for small graphs.

mod coverage;
mod exact;
mod live_edge;
mod sample;

pub use coverage::{
    coverage_vector, default_draws, evaluate_distribution, evaluate_independent, evaluate_solution,
    expected_independent_coverage, group_coverage, hoeffding_draws, initial_gains, CoverageState,
    CoverageVector,
};
pub use exact::{exact_spread, exact_spread_with_cap, ExactSpread};
pub use live_edge::{sample_live_edge_graph, LiveEdgeGraph, Model, ReverseAdjacency, Triggering};
pub(crate) use live_edge::Marks;
pub use sample::{build_sample, LiveEdgeSample, SampleOrigin, ENUMERATION_CAP};

/// Reachable set of `seeds` in one live-edge graph.
pub fn reachable_set(graph: &LiveEdgeGraph, seeds: &[crate::graph::NodeId]) -> crate::Result<Vec<usize>> {
    graph.reachable_set(seeds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{CommunityStructure, Graph};
    use crate::rng;
    use proptest::prelude::*;

    fn two_node() -> Graph {
        Graph::from_weighted(2, &[(0, 1, 0.75)]).unwrap()
    }

    fn star(n_leaves: usize, eps: f64) -> Graph {
        let w = (1.0 + eps) / n_leaves as f64;
        let edges: Vec<_> = (1..=n_leaves).map(|u| (0, u, w)).collect();
        Graph::from_weighted(n_leaves + 1, &edges).unwrap()
    }

    fn chain() -> Graph {
        Graph::from_weighted(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap()
    }

    #[test]
    fn zero_and_one_weights_are_deterministic() {
        let base = crate::graph::generate_barabasi_albert(30, 2, 1).unwrap();
        let mut r = rng::seeded(3);
        let zero = Graph::new(
            30,
            base.edges().iter().map(|e| crate::graph::Edge { weight: Some(0.0), ..*e }),
        )
        .unwrap();
        let one = Graph::new(
            30,
            base.edges().iter().map(|e| crate::graph::Edge { weight: Some(1.0), ..*e }),
        )
        .unwrap();
        for _ in 0..20 {
            let l = sample_live_edge_graph(&zero, &Model::IndependentCascade, &mut r).unwrap();
            assert!(l.live_edge_ids().is_empty());
            let l = sample_live_edge_graph(&one, &Model::IndependentCascade, &mut r).unwrap();
            assert_eq!(l.live_edge_ids().len(), one.edge_count());
        }
    }

    #[test]
    fn ic_inclusion_frequency() {
        let g = two_node();
        let s = LiveEdgeSample::build(&g, Model::IndependentCascade, 100_000, 5).unwrap();
        let live = s.graphs().iter().filter(|l| !l.live_edge_ids().is_empty()).count();
        let freq = live as f64 / 100_000.0;
        assert!((freq - 0.75).abs() < 0.01, "{freq}");
    }

    #[test]
    fn lt_picks_at_most_one_in_neighbor() {
        let g = Graph::from_weighted(3, &[(0, 2, 0.5), (1, 2, 0.3), (0, 1, 0.9)]).unwrap();
        let s = LiveEdgeSample::build(&g, Model::LinearThreshold, 20_000, 8).unwrap();
        let mut from0 = 0;
        let mut from1 = 0;
        for l in s.graphs() {
            let into2: Vec<_> = l
                .live_edge_ids()
                .iter()
                .filter(|&&id| g.edge(id as usize).target == 2)
                .collect();
            assert!(into2.len() <= 1);
            for &&id in &into2 {
                if g.edge(id as usize).source == 0 {
                    from0 += 1;
                } else {
                    from1 += 1;
                }
            }
        }
        assert!((from0 as f64 / 20_000.0 - 0.5).abs() < 0.02);
        assert!((from1 as f64 / 20_000.0 - 0.3).abs() < 0.02);
    }

    #[test]
    fn lt_rejects_overweight_nodes() {
        let g = Graph::from_weighted(3, &[(0, 2, 0.7), (1, 2, 0.6)]).unwrap();
        match LiveEdgeSample::build(&g, Model::LinearThreshold, 10, 0) {
            Err(crate::Error::ThresholdWeights { node, .. }) => assert_eq!(node, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(LiveEdgeSample::build(&g, Model::IndependentCascade, 10, 0).is_ok());
    }

    #[test]
    fn unweighted_graphs_are_rejected() {
        let g = crate::graph::load_edge_list("a b", true).unwrap();
        assert!(matches!(
            LiveEdgeSample::build(&g, Model::IndependentCascade, 3, 0),
            Err(crate::Error::UnweightedEdge { .. })
        ));
        assert!(exact_spread(&g, &[0]).is_err());
    }

    #[test]
    fn samples_are_reproducible() {
        let g = crate::graph::generate_barabasi_albert(40, 2, 2)
            .unwrap()
            .assign_uniform_weights(0.4, 9)
            .unwrap();
        let a = build_sample(&g, Model::IndependentCascade, 50, 77).unwrap();
        let b = build_sample(&g, Model::IndependentCascade, 50, 77).unwrap();
        assert_eq!(a, b);
        let c = build_sample(&g, Model::IndependentCascade, 50, 78).unwrap();
        assert_ne!(a, c);
        assert_eq!(a.seed(), Some(77));
        assert!(build_sample(&g, Model::IndependentCascade, 0, 1).is_err());
    }

    #[test]
    fn reachability_basics() {
        let g = chain();
        let s = LiveEdgeSample::build(&g, Model::IndependentCascade, 1, 0).unwrap();
        let l = s.graph(0);
        assert_eq!(reachable_set(l, &[]).unwrap(), Vec::<usize>::new());
        assert_eq!(reachable_set(l, &[0]).unwrap(), vec![0, 1, 2]);
        assert_eq!(reachable_set(l, &[0, 1, 2]).unwrap(), vec![0, 1, 2]);
        assert_eq!(reachable_set(l, &[2]).unwrap(), vec![2]);
        assert!(reachable_set(l, &[3]).is_err());
    }

    #[test]
    fn coverage_of_empty_and_seeds() {
        let g = two_node();
        let s = LiveEdgeSample::build(&g, Model::IndependentCascade, 200, 1).unwrap();
        assert_eq!(coverage_vector(&s, &[]).unwrap().as_slice(), &[0.0, 0.0]);
        let c = coverage_vector(&s, &[0]).unwrap();
        assert_eq!(c.get(0), 1.0);
        assert!(coverage_vector(&s, &[2]).is_err());
    }

    #[test]
    fn two_node_spread_converges() {
        let g = two_node();
        let s = LiveEdgeSample::build(&g, Model::IndependentCascade, 100_000, 4).unwrap();
        let c = coverage_vector(&s, &[0]).unwrap();
        assert!((c.total() - 1.75).abs() < 0.01, "{}", c.total());
        let exact = exact_spread(&g, &[0]).unwrap();
        assert_eq!(exact.per_node, vec![1.0, 0.75]);
        assert_eq!(exact.total(), 1.75);
    }

    #[test]
    fn exact_spread_cases() {
        let g = star(4, 0.0);
        let e = exact_spread(&g, &[0]).unwrap();
        assert!((e.total() - 2.0).abs() < 1e-12);
        let e = exact_spread(&g, &[]).unwrap();
        assert!(e.per_node.iter().all(|&p| p == 0.0));

        let big = star(21, 0.0);
        assert!(matches!(
            exact_spread(&big, &[0]),
            Err(crate::Error::EnumerationCap { edges: 21, cap: 20 })
        ));
        // certain edges do not count towards the cap
        let edges: Vec<_> = (1..=30).map(|u| (0, u, 1.0)).collect();
        let certain = Graph::from_weighted(31, &edges).unwrap();
        assert_eq!(exact_spread(&certain, &[0]).unwrap().total(), 31.0);
    }

    #[test]
    fn exact_sample_matches_exact_spread() {
        let g = star(10, 0.1);
        let s = LiveEdgeSample::exact(&g).unwrap();
        assert_eq!(s.len(), 1024);
        let c = coverage_vector(&s, &[0]).unwrap();
        assert!((c.total() - 2.1).abs() < 1e-12);
        let e = exact_spread(&g, &[0]).unwrap();
        for v in 0..11 {
            assert!((c.get(v) - e.per_node[v]).abs() < 1e-12);
        }
    }

    #[test]
    fn group_coverage_definitions() {
        let c = CoverageVector::new(vec![1.0, 0.5, 0.25, 0.0]);
        let singles = CommunityStructure::singletons(4);
        assert_eq!(group_coverage(&c, &singles), vec![1.0, 0.5, 0.25, 0.0]);
        let whole = CommunityStructure::whole(4);
        assert_eq!(group_coverage(&c, &whole), vec![c.total() / 4.0]);
    }

    #[test]
    fn independent_evaluation() {
        let g = two_node();
        let s = LiveEdgeSample::exact(&g).unwrap();
        let zero = evaluate_independent(&s, &[0.0, 0.0], 10, 1).unwrap();
        assert_eq!(zero.as_slice(), &[0.0, 0.0]);

        let x = [2.0 / 3.0, 1.0 / 3.0];
        let exact = expected_independent_coverage(&s, &x).unwrap();
        assert!((exact.get(0) - 2.0 / 3.0).abs() < 1e-12);
        assert!((exact.get(1) - 2.0 / 3.0).abs() < 1e-12);
        assert!((exact.total() - 4.0 / 3.0).abs() < 1e-12);

        let drawn = evaluate_independent(&s, &x, 20_000, 3).unwrap();
        assert!((drawn.get(0) - 2.0 / 3.0).abs() < 0.02);
        assert!((drawn.get(1) - 2.0 / 3.0).abs() < 0.02);

        assert!(evaluate_independent(&s, &[0.5], 10, 1).is_err());
        assert!(evaluate_independent(&s, &[1.5, 0.0], 10, 1).is_err());
    }

    #[test]
    fn default_draw_count() {
        assert_eq!(default_draws(), 150);
        assert_eq!(hoeffding_draws(0.1, 0.1), ((20f64).ln() / 0.02).ceil() as usize);
    }

    #[test]
    fn distribution_evaluation() {
        let g = two_node();
        let s = LiveEdgeSample::exact(&g).unwrap();
        let empty = evaluate_distribution(&s, &[(vec![], 1.0)]).unwrap();
        assert_eq!(empty.as_slice(), &[0.0, 0.0]);
        assert!(evaluate_distribution(&s, &[(vec![0], 0.5)]).is_err());
        let mix = evaluate_distribution(&s, &[(vec![0], 0.5), (vec![1], 0.5)]).unwrap();
        assert!((mix.get(0) - 0.5).abs() < 1e-12);
        assert!((mix.get(1) - (0.5 * 0.75 + 0.5)).abs() < 1e-12);
    }

    #[test]
    fn coverage_state_tracks_coverage_vector() {
        let g = crate::graph::generate_barabasi_albert(40, 2, 6)
            .unwrap()
            .assign_uniform_weights(0.4, 1)
            .unwrap();
        let s = build_sample(&g, Model::IndependentCascade, 300, 2).unwrap();
        let gains = initial_gains(&s, None);
        let mut state = CoverageState::new(&s);
        for (v, &gain) in gains.iter().enumerate() {
            let single = coverage_vector(&s, &[v]).unwrap().total();
            assert!((gain - single).abs() < 1e-9);
            assert!((state.gain(v, None) - single).abs() < 1e-9);
        }
        let seeds = [3, 17, 25];
        for &v in &seeds {
            let before = coverage_vector(&s, state.seeds()).unwrap().total();
            let g = state.gain(v, None);
            state.add(v);
            let after = coverage_vector(&s, state.seeds()).unwrap();
            assert!((after.total() - before - g).abs() < 1e-9);
            let tracked = state.coverage();
            for u in 0..40 {
                assert!((tracked.get(u) - after.get(u)).abs() < 1e-12);
            }
        }
    }

    fn small_weighted_graph() -> impl Strategy<Value = Graph> {
        (3usize..8).prop_flat_map(|n| {
            proptest::collection::vec((0..n, 0..n, 0.0f64..=1.0), 0..12).prop_map(move |edges| {
                let edges: Vec<_> = edges.into_iter().filter(|(u, v, _)| u != v).collect();
                Graph::from_weighted(n, &edges).unwrap()
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn coverage_is_monotone(g in small_weighted_graph(), seed in 0u64..1000, a in 0usize..8, b in 0usize..8) {
            let n = g.node_count();
            let s = build_sample(&g, Model::IndependentCascade, 64, seed).unwrap();
            let small = vec![a % n];
            let large = vec![a % n, b % n];
            let cs = coverage_vector(&s, &small).unwrap();
            let cl = coverage_vector(&s, &large).unwrap();
            for v in 0..n {
                prop_assert!(cs.get(v) <= cl.get(v));
                prop_assert!((0.0..=1.0).contains(&cl.get(v)));
            }
            let sum: f64 = cl.as_slice().iter().sum();
            prop_assert_eq!(sum, cl.total());
        }

        #[test]
        fn distribution_evaluation_is_linear(g in small_weighted_graph(), lambda in 0.0f64..=1.0, a in 0usize..8, b in 0usize..8) {
            let n = g.node_count();
            let s = build_sample(&g, Model::IndependentCascade, 32, 5).unwrap();
            let p = vec![(vec![a % n], 1.0)];
            let q = vec![(vec![b % n], 0.5), (vec![], 0.5)];
            let mix = vec![(vec![a % n], lambda), (vec![b % n], 0.5 * (1.0 - lambda)), (vec![], 0.5 * (1.0 - lambda))];
            let ep = evaluate_distribution(&s, &p).unwrap();
            let eq = evaluate_distribution(&s, &q).unwrap();
            let em = evaluate_distribution(&s, &mix).unwrap();
            for v in 0..n {
                let expect = lambda * ep.get(v) + (1.0 - lambda) * eq.get(v);
                prop_assert!((em.get(v) - expect).abs() < 1e-12);
            }
        }

        #[test]
        fn exact_sample_agrees_with_oracle(g in small_weighted_graph(), a in 0usize..8) {
            let n = g.node_count();
            let s = LiveEdgeSample::exact(&g).unwrap();
            let c = coverage_vector(&s, &[a % n]).unwrap();
            let e = exact_spread(&g, &[a % n]).unwrap();
            for v in 0..n {
                prop_assert!((c.get(v) - e.per_node[v]).abs() < 1e-9);
            }
        }
    }
}
