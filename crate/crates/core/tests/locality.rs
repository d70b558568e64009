mod common;

use netdecomp::engine::{run_sync, Mode};
use netdecomp::ruling::RulingProgram;
use netdecomp::Graph;
use proptest::prelude::*;

use common::{arb_graph, naive_distances};

fn states_after(g: &Graph, rounds: u64) -> Vec<netdecomp::ruling::RulingState> {
    let active = vec![true; g.node_count()];
    let program = RulingProgram { active: &active, bits: g.bit_length() };
    run_sync(g, &program, Mode::Local, rounds).unwrap().states
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    /// Permuting identifiers among nodes farther than `r` from `v` leaves `v`'s state after
    /// `r` rounds unchanged.
    #[test]
    fn ruling_state_depends_only_on_the_r_ball(g in arb_graph(30), r in 1u64..=3, v_pick in any::<usize>(), shift in 1usize..30) {
        let n = g.node_count();
        let v = v_pick % n;
        let dist = naive_distances(&g, v);
        let far: Vec<usize> = (0..n).filter(|&w| dist[w].is_none_or(|d| u64::from(d) > r)).collect();
        prop_assume!(far.len() >= 2);
        let mut ids = g.ids().to_vec();
        let far_ids: Vec<u64> = far.iter().map(|&w| ids[w]).collect();
        for (i, &w) in far.iter().enumerate() {
            ids[w] = far_ids[(i + shift) % far.len()];
        }
        let permuted = g.with_ids(ids).unwrap();
        prop_assert_eq!(g.bit_length(), permuted.bit_length());
        let before = states_after(&g, r);
        let after = states_after(&permuted, r);
        prop_assert_eq!(&before[v], &after[v]);
    }
}

#[test]
fn near_ids_do_change_the_outcome() {
    // Control: on P3 with ids 1,0,2 the middle node 1 has id 0 and survives; swapping ids of
    // node 1 and node 0 (distance 1) makes node 1 leave in round 1.
    let g = Graph::from_edge_list(3, &[(0, 1), (1, 2)], Some(vec![1, 0, 2])).unwrap();
    let swapped = g.with_ids(vec![0, 1, 2]).unwrap();
    assert!(states_after(&g, 1)[1].in_set);
    assert!(!states_after(&swapped, 1)[1].in_set);
}
