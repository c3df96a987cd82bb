mod common;

use common::{arb_graph, floyd, girth_oracle, greedy_oracle, multiplicative_oracle, INF};
use commspan::generators::{partition_edges, random_gnm, EdgePartition, PartitionMode};
use commspan::graph::{bfs, ceil_log2, girth, verify_additive, verify_multiplicative, Distance};
use commspan::protocols::{dist_bfs, Audit};
use commspan::simnet::{run_protocol, Mode, Protocol, ProtocolContext, ProtocolOptions};
use commspan::{Edge, Graph};
use proptest::prelude::*;

fn arb_mode() -> impl Strategy<Value = PartitionMode> {
    prop::sample::select(PartitionMode::ALL.to_vec())
}

fn arb_instance(max_n: usize) -> impl Strategy<Value = (Graph, EdgePartition)> {
    (arb_graph(max_n), 1usize..6, arb_mode(), any::<u64>()).prop_map(|(g, s, mode, seed)| {
        let p = partition_edges(&g, s, mode, seed).unwrap();
        (g, p)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn greedy_token_passing_matches_the_definition((g, p) in arb_instance(16), k in 1u32..4) {
        let r = run_protocol(Protocol::Greedy { k }, &g, &p, 0, &Default::default()).unwrap();
        let order: Vec<Edge> = p.assignment().iter().flatten().copied().collect();
        prop_assert_eq!(&r.spanner, &greedy_oracle(g.n(), &order, k));
        prop_assert!(girth_oracle(&r.spanner).is_none_or(|c| c > 2 * k));
        prop_assert!(multiplicative_oracle(&g, &r.spanner, 2 * k - 1));
        let n = g.n() as f64;
        prop_assert!(r.spanner.m() as f64 <= n.powf(1.0 + 1.0 / f64::from(k)) + n);
    }

    #[test]
    fn simultaneous_union_is_a_spanner((g, p) in arb_instance(20), k in 1u32..4) {
        let r = run_protocol(Protocol::Simultaneous { k }, &g, &p, 0, &Default::default()).unwrap();
        prop_assert!(multiplicative_oracle(&g, &r.spanner, 2 * k - 1));
        prop_assert_eq!(r.transcript.rounds, 1);
        prop_assert_eq!(r.transcript.bits_down(), 0);
        let n = g.n() as u64;
        let per_player = ((n as f64).powf(1.0 + 1.0 / f64::from(k)) + n as f64) as u64 * 2 * u64::from(ceil_log2(n));
        let prefix = commspan::simnet::edge_list_prefix_bits(g.n());
        prop_assert!(r.transcript.bits_to_coordinator.iter().all(|&b| b <= per_player + prefix));
    }

    #[test]
    fn single_player_simultaneous_equals_greedy(g in arb_graph(20), k in 1u32..4) {
        let p = EdgePartition::single(&g);
        let a = run_protocol(Protocol::Simultaneous { k }, &g, &p, 0, &Default::default()).unwrap();
        let b = run_protocol(Protocol::Greedy { k }, &g, &p, 0, &Default::default()).unwrap();
        prop_assert_eq!(a.spanner, b.spanner);
    }

    #[test]
    fn distributed_bfs_equals_centralized((g, p) in arb_instance(24), root in 0usize..24) {
        let root = root % g.n();
        let mut ctx = ProtocolContext::new(&p, 0, Mode::Interactive, false);
        let t = dist_bfs(&mut ctx, root, None).unwrap();
        let oracle = floyd(&g);
        let expect: Vec<Option<u32>> = (0..g.n()).map(|v| (oracle[root][v] != INF).then_some(oracle[root][v])).collect();
        prop_assert_eq!(&t.depth, &expect);
        prop_assert_eq!(&t.depth, &bfs(&g, root).unwrap().depth);
        for e in t.edges() {
            prop_assert!(g.contains(e));
        }
    }

    #[test]
    fn outputs_are_subgraphs_and_deterministic((g, p) in arb_instance(20), seed in any::<u64>()) {
        for proto in [Protocol::Additive2, Protocol::AdditiveK { k: 7 }, Protocol::Greedy { k: 2 }, Protocol::BaswanaSen { k: 3 }] {
            let a = run_protocol(proto, &g, &p, seed, &Default::default()).unwrap();
            let b = run_protocol(proto, &g, &p, seed, &Default::default()).unwrap();
            prop_assert!(a.spanner.edges().all(|e| g.contains(e)));
            prop_assert_eq!(&a.spanner, &b.spanner);
            prop_assert_eq!(&a.transcript, &b.transcript);
        }
    }

    /// Small sampling constants make the sampling events fail often; the
    /// stretch must hold whenever they do not.
    #[test]
    fn sampling_events_imply_stretch(
        n in 16usize..40,
        density in 0.2..0.9f64,
        s in 1usize..5,
        c in 0.05..2.0f64,
        seed in any::<u64>(),
    ) {
        let m = ((n * (n - 1) / 2) as f64 * density) as usize;
        let g = random_gnm(n, m, seed).unwrap();
        let p = partition_edges(&g, s, PartitionMode::DisjointRandom, seed).unwrap();
        let options = ProtocolOptions { c_sample: c, c_sample_k: c, ..Default::default() };
        for proto in [Protocol::Additive2, Protocol::AdditiveK { k: 6 }, Protocol::BaswanaSen { k: 3 }, Protocol::BaswanaSen { k: 4 }] {
            let r = run_protocol(proto, &g, &p, seed, &options).unwrap();
            let events = r.audit.sampling_events_hold(&g, &r.spanner).unwrap();
            if events {
                prop_assert!(proto.guarantee().verify(&g, &r.spanner).unwrap(), "{proto} broke its stretch");
            }
        }
    }

    #[test]
    fn nonempty_inputs_cost_bits((g, p) in arb_instance(20)) {
        prop_assume!(g.m() > 0);
        for proto in [Protocol::Additive2, Protocol::Greedy { k: 2 }, Protocol::BaswanaSen { k: 3 }, Protocol::Simultaneous { k: 2 }] {
            let r = run_protocol(proto, &g, &p, 0, &Default::default()).unwrap();
            prop_assert!(r.transcript.bits_up() > 0);
            prop_assert!(r.transcript.messages >= p.s() as u64);
        }
    }
}

#[test]
fn baswana_radii_and_events_on_dense_graphs() {
    let g = random_gnm(64, 800, 11).unwrap();
    for seed in 0..10 {
        let p = partition_edges(&g, 4, PartitionMode::DisjointRandom, seed).unwrap();
        for k in [3, 4, 5] {
            let r = run_protocol(Protocol::BaswanaSen { k }, &g, &p, seed, &Default::default()).unwrap();
            let Audit::BaswanaSen(a) = &r.audit else {
                panic!("wrong audit")
            };
            assert!(a.levels.iter().all(|l| l.radii_hold(&r.spanner)));
            assert_eq!(a.expansion_iterations, (k / 2 - 1) as usize);
            assert!(verify_multiplicative(&g, &r.spanner, 2 * k - 1).unwrap());
        }
    }
}

#[test]
fn greedy_keeps_girth_six_graphs() {
    let g = commspan::generators::projective_incidence(3).unwrap();
    let p = partition_edges(&g, 4, PartitionMode::DuplicatedRandom, 1).unwrap();
    let r = run_protocol(Protocol::Greedy { k: 2 }, &g, &p, 0, &Default::default()).unwrap();
    assert_eq!(r.spanner, g);
    assert_eq!(girth(&r.spanner), Distance::Finite(6));
}

#[test]
fn additive_runs_verify_on_dense_graphs() {
    let g = random_gnm(64, 600, 3).unwrap();
    for seed in 0..10 {
        let p = partition_edges(&g, 2 + 2 * (seed as usize % 2), PartitionMode::DisjointRandom, seed).unwrap();
        let a = run_protocol(Protocol::Additive2, &g, &p, seed, &Default::default()).unwrap();
        assert!(verify_additive(&g, &a.spanner, 2).unwrap());
        let b = run_protocol(Protocol::AdditiveK { k: 8 }, &g, &p, seed, &Default::default()).unwrap();
        assert!(verify_additive(&g, &b.spanner, 8).unwrap());
    }
}

#[test]
fn greedy_k22_keeps_three_edges() {
    let g = Graph::from_edges(4, [(0, 2), (0, 3), (1, 2), (1, 3)]).unwrap();
    let r = run_protocol(
        Protocol::Greedy { k: 2 },
        &g,
        &EdgePartition::single(&g),
        0,
        &Default::default(),
    )
    .unwrap();
    assert_eq!(r.spanner.m(), 3);
    assert!(r.transcript.total_bits() > 0);
}

#[test]
fn empty_graph_gives_empty_spanners() {
    let g = Graph::new(8);
    let p = partition_edges(&g, 3, PartitionMode::DisjointRandom, 0).unwrap();
    for proto in [
        Protocol::Additive2,
        Protocol::AdditiveK { k: 9 },
        Protocol::Greedy { k: 2 },
        Protocol::BaswanaSen { k: 3 },
        Protocol::Simultaneous { k: 2 },
    ] {
        assert!(run_protocol(proto, &g, &p, 0, &Default::default())
            .unwrap()
            .spanner
            .is_empty());
    }
}
