#![allow(dead_code)]

use std::collections::BTreeSet;

use netdecomp::graph::bfs_distances;
use netdecomp::Graph;
use proptest::prelude::*;

/// Small graphs with arbitrary edges and distinct, possibly sparse, identifiers.
pub fn arb_graph(max_n: usize) -> impl Strategy<Value = Graph> {
    (1..=max_n).prop_flat_map(|n| {
        let pairs = proptest::collection::vec((0..n, 0..n), 0..=3 * n);
        let ids = proptest::collection::btree_set(0u64..4096, n);
        (Just(n), pairs, ids, any::<u64>()).prop_map(|(n, pairs, ids, seed)| {
            let edges: Vec<(usize, usize)> = pairs.into_iter().filter(|(u, v)| u != v).collect();
            let mut ids: Vec<u64> = ids.into_iter().collect();
            // Spread the sorted ids over the nodes in a seed-dependent order.
            let k = ids.len();
            ids.rotate_left((seed as usize) % k);
            if seed & 1 == 1 {
                ids.reverse();
            }
            Graph::from_edge_list(n, &edges, Some(ids)).unwrap()
        })
    })
}

/// All-pairs distance matrix by repeated single-source BFS.
pub fn all_pairs(g: &Graph) -> Vec<Vec<Option<u32>>> {
    (0..g.node_count()).map(|v| bfs_distances(g, &[v]).to_vec()).collect()
}

/// Plain adjacency-list BFS, independent of the library.
pub fn naive_distances(g: &Graph, src: usize) -> Vec<Option<u32>> {
    let n = g.node_count();
    let mut dist = vec![None; n];
    dist[src] = Some(0);
    let mut frontier = BTreeSet::from([src]);
    let mut d = 0;
    while !frontier.is_empty() {
        d += 1;
        let mut next = BTreeSet::new();
        for &v in &frontier {
            for w in 0..n {
                if dist[w].is_none() && g.has_edge(v, w) {
                    dist[w] = Some(d);
                    next.insert(w);
                }
            }
        }
        frontier = next;
    }
    dist
}
