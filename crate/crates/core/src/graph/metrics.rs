use std::cmp::Ordering;
use std::collections::VecDeque;
use std::fmt;

use super::{bfs_distances, Graph, Vertex};
use crate::error::{domain, Result};

/// A hop distance, or the sentinel for a disconnected pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Distance {
    Finite(u32),
    Infinite,
}

impl Distance {
    pub fn finite(self) -> Option<u32> {
        match self {
            Distance::Finite(d) => Some(d),
            Distance::Infinite => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Distance::Finite(_))
    }
}

impl From<Option<u32>> for Distance {
    fn from(d: Option<u32>) -> Self {
        d.map_or(Distance::Infinite, Distance::Finite)
    }
}

impl Ord for Distance {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Distance::Finite(a), Distance::Finite(b)) => a.cmp(b),
            (Distance::Finite(_), Distance::Infinite) => Ordering::Less,
            (Distance::Infinite, Distance::Finite(_)) => Ordering::Greater,
            (Distance::Infinite, Distance::Infinite) => Ordering::Equal,
        }
    }
}

impl PartialOrd for Distance {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distance::Finite(d) => write!(f, "{d}"),
            Distance::Infinite => write!(f, "inf"),
        }
    }
}

/// All-pairs hop distances.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistanceMatrix {
    n: usize,
    dist: Vec<Option<u32>>,
}

impl DistanceMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, u: Vertex, v: Vertex) -> Distance {
        self.dist[u * self.n + v].into()
    }

    pub fn row(&self, u: Vertex) -> impl Iterator<Item = Distance> + '_ {
        self.dist[u * self.n..(u + 1) * self.n].iter().map(|&d| d.into())
    }
}

/// One BFS per source vertex.
pub fn all_pairs_distances(g: &Graph) -> DistanceMatrix {
    let n = g.n();
    let mut dist = Vec::with_capacity(n * n);
    let mut row = Vec::new();
    for u in 0..n {
        bfs_distances(g, u, &mut row);
        dist.extend_from_slice(&row);
    }
    DistanceMatrix { n, dist }
}

/// Length of the shortest cycle, or [`Distance::Infinite`] for a forest.
///
/// A BFS from every vertex; a non-tree edge `{x, y}` met while scanning `x`
/// closes a closed walk of length `d(x) + d(y) + 1`, and the minimum over all
/// roots is exactly the girth.
pub fn girth(g: &Graph) -> Distance {
    let n = g.n();
    let mut best = u32::MAX;
    let mut depth: Vec<Option<u32>> = vec![None; n];
    let mut parent: Vec<Option<Vertex>> = vec![None; n];
    let mut touched = Vec::new();
    let mut queue = VecDeque::new();
    for root in 0..n {
        for &v in &touched {
            depth[v] = None;
            parent[v] = None;
        }
        touched.clear();
        queue.clear();
        depth[root] = Some(0);
        touched.push(root);
        queue.push_back(root);
        while let Some(x) = queue.pop_front() {
            let dx = depth[x].unwrap();
            // Any cycle found from here on is at least 2*dx + 1 long.
            if 2 * dx + 1 >= best {
                break;
            }
            for &y in g.neighbors(x) {
                match depth[y] {
                    None => {
                        depth[y] = Some(dx + 1);
                        parent[y] = Some(x);
                        touched.push(y);
                        queue.push_back(y);
                    }
                    Some(dy) => {
                        if parent[x] != Some(y) {
                            best = best.min(dx + dy + 1);
                        }
                    }
                }
            }
        }
    }
    if best == u32::MAX {
        Distance::Infinite
    } else {
        Distance::Finite(best)
    }
}

/// True iff `h` and `g` share `n` and every edge of `h` is in `g`.
pub fn is_subgraph(g: &Graph, h: &Graph) -> bool {
    h.n() == g.n() && h.edges().all(|e| g.contains(e))
}

fn check_subgraph(g: &Graph, h: &Graph) -> Result<()> {
    if h.n() != g.n() {
        return Err(domain(format!("spanner has {} vertices, graph has {}", h.n(), g.n())));
    }
    if let Some(e) = h.edges().find(|&e| !g.contains(e)) {
        return Err(domain(format!("spanner edge {e} is not in the graph")));
    }
    Ok(())
}

/// Checks `d_H(u, v) <= d_G(u, v) + beta` for every connected pair of `g`.
/// Disconnected pairs of `g` impose nothing.
pub fn verify_additive(g: &Graph, h: &Graph, beta: u32) -> Result<bool> {
    check_subgraph(g, h)?;
    Ok(all_pairs_hold(g, h, |dg, dh| dh <= dg + beta))
}

/// Checks `d_H(u, v) <= alpha * d_G(u, v)` for every connected pair of `g`.
pub fn verify_multiplicative(g: &Graph, h: &Graph, alpha: u32) -> Result<bool> {
    check_subgraph(g, h)?;
    Ok(all_pairs_hold(g, h, |dg, dh| {
        u64::from(dh) <= u64::from(alpha) * u64::from(dg)
    }))
}

fn all_pairs_hold(g: &Graph, h: &Graph, ok: impl Fn(u32, u32) -> bool) -> bool {
    let mut dg = Vec::new();
    let mut dh = Vec::new();
    for u in 0..g.n() {
        bfs_distances(g, u, &mut dg);
        bfs_distances(h, u, &mut dh);
        for v in u + 1..g.n() {
            if let Some(d) = dg[v] {
                match dh[v] {
                    Some(e) if ok(d, e) => {}
                    _ => return false,
                }
            }
        }
    }
    true
}
