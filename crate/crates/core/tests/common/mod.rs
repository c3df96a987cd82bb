//! Reference implementations used as test oracles. They are deliberately
//! naive and share no code with the library beyond the `Graph` type.

#![allow(dead_code)]

use commspan::{Edge, Graph};
use proptest::prelude::*;

pub const INF: u32 = u32::MAX;

/// Floyd-Warshall distances; `INF` for disconnected pairs.
pub fn floyd(g: &Graph) -> Vec<Vec<u32>> {
    let n = g.n();
    let mut d = vec![vec![INF; n]; n];
    for (v, row) in d.iter_mut().enumerate() {
        row[v] = 0;
    }
    for e in g.edges() {
        d[e.u][e.v] = 1;
        d[e.v][e.u] = 1;
    }
    for w in 0..n {
        for u in 0..n {
            if d[u][w] == INF {
                continue;
            }
            for v in 0..n {
                if d[w][v] != INF && d[u][w] + d[w][v] < d[u][v] {
                    d[u][v] = d[u][w] + d[w][v];
                }
            }
        }
    }
    d
}

pub fn additive_oracle(g: &Graph, h: &Graph, beta: u32) -> bool {
    let (dg, dh) = (floyd(g), floyd(h));
    (0..g.n()).all(|u| (0..g.n()).all(|v| dg[u][v] == INF || (dh[u][v] != INF && dh[u][v] <= dg[u][v] + beta)))
}

pub fn multiplicative_oracle(g: &Graph, h: &Graph, alpha: u32) -> bool {
    let (dg, dh) = (floyd(g), floyd(h));
    (0..g.n()).all(|u| (0..g.n()).all(|v| dg[u][v] == INF || (dh[u][v] != INF && dh[u][v] <= alpha * dg[u][v])))
}

/// Shortest cycle: for every edge, the distance between its endpoints once
/// it is removed, plus one. `None` for forests.
pub fn girth_oracle(g: &Graph) -> Option<u32> {
    let edges: Vec<Edge> = g.edges().collect();
    edges
        .iter()
        .filter_map(|&e| {
            let rest = Graph::from_edges(g.n(), edges.iter().filter(|&&f| f != e).map(|f| (f.u, f.v))).unwrap();
            let d = floyd(&rest)[e.u][e.v];
            (d != INF).then(|| d + 1)
        })
        .min()
}

/// Greedy spanner by the definition: keep an edge iff the spanner so far
/// has no path of length at most `2k - 1` between its endpoints.
pub fn greedy_oracle(n: usize, edges: &[Edge], k: u32) -> Graph {
    let mut h = Graph::new(n);
    for &e in edges {
        if floyd(&h)[e.u][e.v] > 2 * k - 1 {
            h.add_edge(e.u, e.v).unwrap();
        }
    }
    h
}

/// Strategy: a graph on `2..=max_n` vertices with each pair present with a
/// random probability.
pub fn arb_graph(max_n: usize) -> impl Strategy<Value = Graph> {
    (2..=max_n, 0.0..1.0f64, any::<u64>()).prop_map(|(n, p, seed)| {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.gen_bool(p) {
                    edges.push((u, v));
                }
            }
        }
        Graph::from_edges(n, edges).unwrap()
    })
}

/// Strategy: a graph and a random subgraph of it.
pub fn arb_graph_and_subgraph(max_n: usize) -> impl Strategy<Value = (Graph, Graph)> {
    (arb_graph(max_n), 0.0..1.0f64, any::<u64>()).prop_map(|(g, keep, seed)| {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let h = Graph::from_edges(g.n(), g.edges().filter(|_| rng.gen_bool(keep)).map(|e| (e.u, e.v))).unwrap();
        (g, h)
    })
}
