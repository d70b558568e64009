mod common;

use num_rational::Ratio;
use proptest::prelude::*;

use netdecomp::alt::{full_alt_decomposition, AltParams};
use netdecomp::apps::{cut_split_problem, delta_plus_one_coloring, derandomize_with, mis, DerandOptions};
use netdecomp::graph::{bfs_distances, power};
use netdecomp::power::power_decomposition;
use netdecomp::ruling::ruling_set;
use netdecomp::strong::strong_decomposition;
use netdecomp::verify::{verify_coloring, verify_mis, verify_ruling, verify_strong, verify_weak, WeakBounds};
use netdecomp::weak::{cluster_one_color, weak_decomposition};
use netdecomp::Graph;

use common::{all_pairs, arb_graph, naive_distances};

fn floor_log2(n: usize) -> usize {
    (usize::BITS - 1 - n.leading_zeros()) as usize
}

fn ceil_log2(n: usize) -> u32 {
    (0..).find(|&l| (1usize << l) >= n).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn bfs_matches_naive_scan(g in arb_graph(25), src in any::<usize>()) {
        let src = src % g.node_count();
        prop_assert_eq!(bfs_distances(&g, &[src]).to_vec(), naive_distances(&g, src));
    }

    #[test]
    fn power_graph_edges_are_pairs_within_k(g in arb_graph(20), k in 1u32..4) {
        let gk = power(&g, k).unwrap();
        let d = all_pairs(&g);
        for u in 0..g.node_count() {
            for v in 0..g.node_count() {
                let close = u != v && d[u][v].is_some_and(|x| x <= k);
                prop_assert_eq!(gk.has_edge(u, v), close);
            }
        }
        prop_assert_eq!(gk.ids(), g.ids());
    }

    #[test]
    fn graph_json_round_trips(g in arb_graph(30)) {
        let back = Graph::from_json(&g.to_json()).unwrap();
        prop_assert_eq!(back.ids(), g.ids());
        prop_assert_eq!(back.edges().collect::<Vec<_>>(), g.edges().collect::<Vec<_>>());
    }

    #[test]
    fn one_color_clusters_at_least_half(g in arb_graph(40), keep in any::<u64>()) {
        let n = g.node_count();
        let mut set: Vec<usize> = (0..n).filter(|&v| keep.rotate_left(v as u32) & 1 == 1).collect();
        if set.is_empty() {
            set.push(0);
        }
        let res = cluster_one_color(&g, &set).unwrap();
        prop_assert!(2 * res.clustered.len() >= set.len());
        prop_assert_eq!(res.clustered.len() + res.dead.len(), set.len());
        // Clusters are pairwise non-adjacent.
        let mut label_of = vec![None; n];
        for c in &res.clusters {
            for &v in &c.members {
                label_of[v] = Some(c.label);
            }
        }
        for (u, v) in g.edges() {
            if let (Some(a), Some(b)) = (label_of[u], label_of[v]) {
                prop_assert_eq!(a, b, "edge ({}, {})", u, v);
            }
        }
    }

    #[test]
    fn weak_decomposition_meets_standard_bounds(g in arb_graph(40)) {
        let dec = weak_decomposition(&g).unwrap();
        let report = verify_weak(&g, &dec, WeakBounds::standard(&g, 1));
        prop_assert!(report.passed(), "{}", report.to_json());
        prop_assert!(dec.colors <= floor_log2(g.node_count()) + 1);
    }

    #[test]
    fn power_clusters_are_k_plus_one_apart(g in arb_graph(30), k in 1u32..5) {
        let dec = power_decomposition(&g, k).unwrap();
        let d = all_pairs(&g);
        let mut cluster_of = vec![usize::MAX; g.node_count()];
        for (i, c) in dec.clusters.iter().enumerate() {
            for &v in &c.members {
                cluster_of[v] = i;
            }
        }
        for u in 0..g.node_count() {
            for v in 0..g.node_count() {
                if dec.color_of[u] == dec.color_of[v] && cluster_of[u] != cluster_of[v] {
                    prop_assert!(d[u][v].is_none_or(|x| x > k), "{} and {} at {:?}", u, v, d[u][v]);
                }
            }
        }
        let report = verify_weak(&g, &dec, WeakBounds::standard(&g, k));
        prop_assert!(report.passed(), "{}", report.to_json());
    }

    #[test]
    fn strong_components_have_small_diameter(g in arb_graph(30)) {
        let n = g.node_count();
        let dec = strong_decomposition(&g).unwrap();
        let report = verify_strong(&g, &dec, 2 * ceil_log2(n), floor_log2(n) + 1);
        prop_assert!(report.passed(), "{}", report.to_json());
        prop_assert!(dec.helper_min_separation.is_none_or(|d| d > dec.helper_k));
        for st in &dec.color_stats {
            prop_assert!(st.clustered >= st.died);
        }
    }

    #[test]
    fn ruling_set_is_independent_and_dominating(g in arb_graph(40), keep in any::<u64>()) {
        let n = g.node_count();
        let mut set: Vec<usize> = (0..n).filter(|&v| keep.rotate_left(v as u32) & 1 == 1).collect();
        if set.is_empty() {
            set.push(n - 1);
        }
        let rs = ruling_set(&g, &set).unwrap();
        let report = verify_ruling(&g, &rs.members, &set, g.bit_length());
        prop_assert!(report.passed(), "{}", report.to_json());
        prop_assert_eq!(rs.ledger.rounds(), u64::from(g.bit_length()));
    }

    #[test]
    fn alt_covers_and_separates(g in arb_graph(40), t in 2u64..6, q in 2u64..6) {
        let params = AltParams::new(t, Ratio::new(1, q)).unwrap();
        let alt = full_alt_decomposition(&g, params).unwrap();
        for call in &alt.calls {
            prop_assert!(call.colored >= call.covered_bound);
            prop_assert!(call.max_stop_index <= call.index_bound);
        }
        let bounds = WeakBounds { congestion_bound: Some(1), ..WeakBounds::separation_only(1) };
        let report = verify_weak(&g, &alt.decomposition, bounds);
        prop_assert!(report.passed(), "{}", report.to_json());
    }

    #[test]
    fn mis_and_coloring_are_valid(g in arb_graph(40)) {
        let m = mis(&g).unwrap();
        prop_assert!(verify_mis(&g, &m.members).passed());
        let c = delta_plus_one_coloring(&g).unwrap();
        prop_assert!(verify_coloring(&g, &c.colors, None).passed());
        prop_assert!(c.colors.iter().all(|&x| x <= g.max_degree() as u64));
    }

    #[test]
    fn derandomized_cut_never_exceeds_expectation(g in arb_graph(30), seed in any::<u64>(), shuffle in any::<bool>()) {
        let opts = DerandOptions { seed, shuffle_clusters: shuffle, ..DerandOptions::default() };
        let d = derandomize_with(&g, &cut_split_problem(&g), opts).unwrap();
        let mono = g.edges().filter(|&(u, v)| d.bits[u] == d.bits[v]).count();
        prop_assert_eq!(d.initial_expectation, Ratio::new(g.edge_count() as i64, 2));
        prop_assert_eq!(d.final_cost, Ratio::from_integer(mono as i64));
        prop_assert!(d.final_cost <= d.initial_expectation);
    }

    #[test]
    fn runs_are_deterministic(g in arb_graph(30)) {
        prop_assert_eq!(weak_decomposition(&g).unwrap().to_json(), weak_decomposition(&g).unwrap().to_json());
        prop_assert_eq!(strong_decomposition(&g).unwrap().to_json(), strong_decomposition(&g).unwrap().to_json());
    }
}
