//! Undirected simple graphs on dense vertex ids `0..n`, plus the reference
//! algorithms (BFS, all-pairs distances, girth, stretch checks) that every
//! protocol is verified against.

pub(crate) mod io;
mod metrics;

use std::collections::VecDeque;
use std::fmt;

use crate::error::{domain, Result};

pub use io::{read_graph, write_graph};
pub use metrics::{
    all_pairs_distances, girth, is_subgraph, verify_additive, verify_multiplicative, Distance, DistanceMatrix,
};

pub type Vertex = usize;

/// An undirected edge, always stored with `u < v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub u: Vertex,
    pub v: Vertex,
}

impl Edge {
    /// Builds the normalized edge `{a, b}`. Self-loops are rejected by the
    /// graph constructors, not here.
    pub fn new(a: Vertex, b: Vertex) -> Self {
        if a <= b {
            Edge { u: a, v: b }
        } else {
            Edge { u: b, v: a }
        }
    }

    /// The endpoint opposite `x`.
    pub fn other(&self, x: Vertex) -> Vertex {
        if x == self.u {
            self.v
        } else {
            self.u
        }
    }

    pub fn touches(&self, x: Vertex) -> bool {
        self.u == x || self.v == x
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}, {}}}", self.u, self.v)
    }
}

/// Position of `{u, v}` (`u < v`) in the lexicographic enumeration of all
/// `n choose 2` vertex pairs: `u*n - u(u+1)/2 + (v - u - 1)`.
pub fn edge_index(edge: Edge, n: usize) -> u64 {
    let (u, v, n) = (edge.u as u64, edge.v as u64, n as u64);
    u * n - u * (u + 1) / 2 + (v - u - 1)
}

/// Inverse of [`edge_index`].
pub fn edge_from_index(index: u64, n: usize) -> Result<Edge> {
    let total = pair_count(n);
    if index >= total {
        return Err(domain(format!(
            "edge index {index} out of range for n = {n} ({total} pairs)"
        )));
    }
    let n64 = n as u64;
    // Row u starts at u*n - u(u+1)/2 and holds n-1-u entries.
    let mut lo = 0u64;
    let mut hi = n64 - 1;
    while lo + 1 < hi {
        let mid = (lo + hi) / 2;
        let start = mid * n64 - mid * (mid + 1) / 2;
        if start <= index {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let start = lo * n64 - lo * (lo + 1) / 2;
    let v = index - start + lo + 1;
    Ok(Edge::new(lo as usize, v as usize))
}

/// `n choose 2`.
pub fn pair_count(n: usize) -> u64 {
    let n = n as u64;
    n * n.saturating_sub(1) / 2
}

/// `ceil(log2(x))` for `x >= 1`; `ceil_log2(1) = 0`.
pub fn ceil_log2(x: u64) -> u32 {
    assert!(x >= 1, "ceil_log2 of zero");
    if x == 1 {
        0
    } else {
        64 - (x - 1).leading_zeros()
    }
}

/// Bits needed to name one of `n` vertices: `ceil(log2 n)`.
///
/// This fixes the accounting unit of the whole simulator: an edge costs twice
/// this, an integer in `[0, B)` costs `ceil(log2 B)`.
pub fn encoding_bits(n: usize) -> Result<u32> {
    if n < 2 {
        return Err(domain(format!("encoding_bits needs n >= 2, got {n}")));
    }
    Ok(ceil_log2(n as u64))
}

/// An undirected simple graph. Adjacency lists are kept sorted, so iteration
/// order is canonical and every derived artifact is deterministic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    m: usize,
    adj: Vec<Vec<Vertex>>,
}

impl Graph {
    /// The empty graph on `n` vertices.
    pub fn new(n: usize) -> Self {
        Graph {
            n,
            m: 0,
            adj: vec![Vec::new(); n],
        }
    }

    /// Builds a graph, rejecting self-loops, duplicates and out-of-range ids.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vertex, Vertex)>,
    {
        let mut g = Graph::new(n);
        for (a, b) in edges {
            g.add_edge(a, b)?;
        }
        Ok(g)
    }

    /// Builds a graph from edges that may repeat; duplicates collapse.
    /// Self-loops and out-of-range ids are still errors.
    pub fn from_edge_iter_dedup<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = Edge>,
    {
        let mut list: Vec<Edge> = edges.into_iter().collect();
        list.sort_unstable();
        list.dedup();
        let mut adj = vec![Vec::new(); n];
        for e in &list {
            if e.u == e.v {
                return Err(domain(format!("self-loop at vertex {}", e.u)));
            }
            if e.v >= n {
                return Err(domain(format!("edge {e} out of range for n = {n}")));
            }
            adj[e.u].push(e.v);
            adj[e.v].push(e.u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        Ok(Graph { n, m: list.len(), adj })
    }

    /// Inserts `{a, b}`.
    pub fn add_edge(&mut self, a: Vertex, b: Vertex) -> Result<()> {
        if a == b {
            return Err(domain(format!("self-loop at vertex {a}")));
        }
        if a >= self.n || b >= self.n {
            return Err(domain(format!("edge {{{a}, {b}}} out of range for n = {}", self.n)));
        }
        match self.adj[a].binary_search(&b) {
            Ok(_) => Err(domain(format!("duplicate edge {}", Edge::new(a, b)))),
            Err(pos) => {
                self.adj[a].insert(pos, b);
                let pos_b = self.adj[b].binary_search(&a).unwrap_err();
                self.adj[b].insert(pos_b, a);
                self.m += 1;
                Ok(())
            }
        }
    }

    /// Inserts `{a, b}` unless already present. Returns whether it was new.
    pub fn insert_edge(&mut self, edge: Edge) -> Result<bool> {
        if self.has_edge(edge.u, edge.v) {
            return Ok(false);
        }
        self.add_edge(edge.u, edge.v)?;
        Ok(true)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        &self.adj[v]
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, a: Vertex, b: Vertex) -> bool {
        a < self.n && b < self.n && self.adj[a].binary_search(&b).is_ok()
    }

    pub fn contains(&self, e: Edge) -> bool {
        self.has_edge(e.u, e.v)
    }

    /// Edges in ascending `(u, v)` order.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.adj.iter().enumerate().flat_map(|(u, list)| {
            let start = list.partition_point(|&w| w <= u);
            list[start..].iter().map(move |&v| Edge { u, v })
        })
    }

    pub fn edge_vec(&self) -> Vec<Edge> {
        self.edges().collect()
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }
}

/// A breadth-first search tree. `parent[v]` is the tree neighbor one step
/// closer to the root; `depth[v]` is `None` outside the root's component (or
/// outside the explored part, for truncated trees).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BfsTree {
    pub root: Vertex,
    pub parent: Vec<Option<Vertex>>,
    pub depth: Vec<Option<u32>>,
}

impl BfsTree {
    pub(crate) fn with_root(n: usize, root: Vertex) -> Self {
        let mut depth = vec![None; n];
        depth[root] = Some(0);
        BfsTree {
            root,
            parent: vec![None; n],
            depth,
        }
    }

    /// Tree edges, one per non-root covered vertex, in vertex order.
    pub fn edges(&self) -> Vec<Edge> {
        self.parent
            .iter()
            .enumerate()
            .filter_map(|(v, p)| p.map(|p| Edge::new(v, p)))
            .collect()
    }

    /// Number of vertices the tree covers.
    pub fn size(&self) -> usize {
        self.depth.iter().filter(|d| d.is_some()).count()
    }

    pub fn max_depth(&self) -> u32 {
        self.depth.iter().flatten().copied().max().unwrap_or(0)
    }
}

/// Centralized BFS from `root`.
pub fn bfs(g: &Graph, root: Vertex) -> Result<BfsTree> {
    if root >= g.n() {
        return Err(domain(format!("bfs root {root} out of range for n = {}", g.n())));
    }
    let mut tree = BfsTree::with_root(g.n(), root);
    let mut queue = VecDeque::from([root]);
    while let Some(x) = queue.pop_front() {
        let dx = tree.depth[x].expect("queued vertices are reached");
        for &y in g.neighbors(x) {
            if tree.depth[y].is_none() {
                tree.depth[y] = Some(dx + 1);
                tree.parent[y] = Some(x);
                queue.push_back(y);
            }
        }
    }
    Ok(tree)
}

/// Hop distances from `root`; `None` for unreachable vertices.
pub(crate) fn bfs_distances(g: &Graph, root: Vertex, out: &mut Vec<Option<u32>>) {
    out.clear();
    out.resize(g.n(), None);
    out[root] = Some(0);
    let mut queue = VecDeque::from([root]);
    while let Some(x) = queue.pop_front() {
        let dx = out[x].unwrap();
        for &y in g.neighbors(x) {
            if out[y].is_none() {
                out[y] = Some(dx + 1);
                queue.push_back(y);
            }
        }
    }
}
