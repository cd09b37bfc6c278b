//! Cross-checks the interned BFS against an independent enumeration that
//! re-derives every run word from scratch, and pins down determinism across
//! thread counts.

use std::collections::BTreeSet;

use explorer::{dump, explore, explore_with_threads, ExplorationBounds};
use mpds_core::{Configuration, MpdsSystem};
use oracles::{enumerate_runs, random_system, NodeKey};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Re-expresses an explored graph in the oracle's key space.
fn canonical_keys(
    g: &explorer::ConfigGraph,
    sys: &MpdsSystem,
) -> (BTreeSet<NodeKey>, BTreeSet<(NodeKey, u32, NodeKey)>, BTreeSet<NodeKey>) {
    let key_of = |id: u32| -> NodeKey {
        let config = g.materialize(id, sys);
        let stacks: Vec<Vec<String>> = config
            .stacks
            .iter()
            .map(|w| w.prefix_top_first().map(|s| s.spelling()).collect())
            .collect();
        (config.state.0, stacks, g.node_contexts(id), g.node_current_stack(id))
    };
    let mut nodes = BTreeSet::new();
    let mut edges = BTreeSet::new();
    let mut frontier = BTreeSet::new();
    for id in 0..g.node_count() as u32 {
        let key = key_of(id);
        if g.is_frontier(id) {
            frontier.insert(key.clone());
        }
        for (tidx, dst) in g.successors(id) {
            edges.insert((key.clone(), tidx, key_of(dst)));
        }
        nodes.insert(key);
    }
    (nodes, edges, frontier)
}

#[test]
fn matches_brute_force_enumeration_on_random_systems() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x9d5a_31c4);
    for round in 0..40 {
        let sys = random_system(&mut rng, 5, 2, 10);
        let init = Configuration::initial(&sys);
        let bounds = ExplorationBounds::new(3, 4);
        let g = explore(&sys, &init, bounds);
        let oracle = enumerate_runs(&sys, &init, 3, 4);

        let (nodes, edges, frontier) = canonical_keys(&g, &sys);
        assert_eq!(nodes, oracle.nodes, "node sets diverge in round {round}");
        assert_eq!(edges, oracle.edges, "edge sets diverge in round {round}");
        assert_eq!(frontier, oracle.frontier, "frontiers diverge in round {round}");
    }
}

#[test]
fn three_stack_systems_agree_with_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x51ee_7a02);
    for round in 0..15 {
        let sys = random_system(&mut rng, 4, 3, 9);
        let init = Configuration::initial(&sys);
        let g = explore(&sys, &init, ExplorationBounds::new(2, 3));
        let oracle = enumerate_runs(&sys, &init, 2, 3);
        let (nodes, edges, frontier) = canonical_keys(&g, &sys);
        assert_eq!(nodes, oracle.nodes, "node sets diverge in round {round}");
        assert_eq!(edges, oracle.edges, "edge sets diverge in round {round}");
        assert_eq!(frontier, oracle.frontier, "frontiers diverge in round {round}");
    }
}

#[test]
fn dump_is_bit_identical_across_thread_counts() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xc0de_1234);
    for _ in 0..10 {
        let sys = random_system(&mut rng, 6, 2, 12);
        let init = Configuration::initial(&sys);
        let bounds = ExplorationBounds::new(4, 5);
        let serial = explore_with_threads(&sys, &init, bounds, 1);
        let parallel = explore_with_threads(&sys, &init, bounds, 4);
        let a = serde_json::to_vec(&dump(&serial, &sys)).unwrap();
        let b = serde_json::to_vec(&dump(&parallel, &sys)).unwrap();
        assert_eq!(a, b, "thread count changed the exported graph");
    }
}

#[test]
fn widening_bounds_never_loses_nodes() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xfeed_5eed);
    for _ in 0..20 {
        let sys = random_system(&mut rng, 5, 2, 10);
        let init = Configuration::initial(&sys);
        let tight = explore(&sys, &init, ExplorationBounds::new(2, 3));
        let wide = explore(&sys, &init, ExplorationBounds::new(3, 4));
        let (tight_nodes, _, _) = canonical_keys(&tight, &sys);
        let (wide_nodes, _, _) = canonical_keys(&wide, &sys);
        // Interior nodes survive widening; frontier nodes may change identity
        // because the fold values embedded in the key stay the same while new
        // successors appear, so compare the non-frontier core only.
        for key in &tight_nodes {
            if key.2 < 2 {
                assert!(wide_nodes.contains(key), "interior node vanished under wider bounds");
            }
        }
    }
}
