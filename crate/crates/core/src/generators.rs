//! Seeded graph constructors and edge partitions. All randomness comes from a
//! `ChaCha8Rng` seeded with a single `u64`, so outputs are reproducible.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{domain, parse, Error, Result};
use crate::graph::io::{content_lines, parse_fields};
use crate::graph::{edge_from_index, pair_count, Edge, Graph};

pub(crate) fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub(crate) fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// `K_{a,b}` with the left side on `0..a` and the right side on `a..a+b`.
pub fn complete_bipartite(a: usize, b: usize) -> Result<Graph> {
    if a == 0 || b == 0 {
        return Err(domain("complete_bipartite needs both sides nonempty"));
    }
    Graph::from_edges(a + b, (0..a).flat_map(|x| (a..a + b).map(move |y| (x, y))))
}

/// A uniformly random simple graph with exactly `m` edges.
pub fn random_gnm(n: usize, m: usize, seed: u64) -> Result<Graph> {
    let pairs = pair_count(n);
    if m as u64 > pairs {
        return Err(domain(format!(
            "{m} edges requested but only {pairs} pairs exist on {n} vertices"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let picked = index::sample(&mut rng, pairs as usize, m);
    let edges = picked
        .into_iter()
        .map(|i| edge_from_index(i as u64, n))
        .collect::<Result<Vec<_>>>()?;
    Graph::from_edge_iter_dedup(n, edges)
}

fn is_prime(q: u64) -> bool {
    q >= 2 && (2..).take_while(|d| d * d <= q).all(|d| !q.is_multiple_of(d))
}

/// Normalized representatives of the points of PG(2, q): nonzero vectors in
/// GF(q)^3 whose first nonzero coordinate is 1, in lexicographic order.
fn projective_points(q: u64) -> Vec<[u64; 3]> {
    let mut out = Vec::new();
    for a in 0..q {
        for b in 0..q {
            for c in 0..q {
                let v = [a, b, c];
                if v.iter().find(|&&x| x != 0) == Some(&1) {
                    out.push(v);
                }
            }
        }
    }
    out
}

fn check_prime(q: u64) -> Result<()> {
    if is_prime(q) {
        Ok(())
    } else {
        Err(domain(format!("q = {q} is not a supported (prime) order")))
    }
}

/// Point-line incidence graph of PG(2, q). Points are `0..N`, lines are
/// `N..2N` with `N = q^2 + q + 1`; point `p` meets line `l` iff `p . l = 0`.
pub fn projective_incidence(q: u64) -> Result<Graph> {
    check_prime(q)?;
    let pts = projective_points(q);
    let n = pts.len();
    let mut edges = Vec::with_capacity(n * (q as usize + 1));
    for (i, p) in pts.iter().enumerate() {
        for (j, l) in pts.iter().enumerate() {
            if (p[0] * l[0] + p[1] * l[1] + p[2] * l[2]) % q == 0 {
                edges.push((i, n + j));
            }
        }
    }
    Graph::from_edges(2 * n, edges)
}

/// Splits every line vertex of the PG(2, q) incidence graph into `g` copies,
/// each taking `(q+1)/g` consecutive point neighbors in ascending order.
///
/// Points keep vertex ids `0..N` and degree `q+1`; copy `c` of line `j` is
/// vertex `N + j*g + c` with degree `(q+1)/g`. Splitting a vertex never
/// creates a cycle, so girth stays at least 6.
pub fn biregular_girth6(q: u64, g: u64) -> Result<Graph> {
    check_prime(q)?;
    if g == 0 || !(q + 1).is_multiple_of(g) {
        return Err(domain(format!("g = {g} does not divide q + 1 = {}", q + 1)));
    }
    let base = projective_incidence(q)?;
    let n_pts = base.n() / 2;
    let g = g as usize;
    let per = (q as usize + 1) / g;
    let mut edges = Vec::with_capacity(base.m());
    for j in 0..n_pts {
        for (idx, &p) in base.neighbors(n_pts + j).iter().enumerate() {
            edges.push((p, n_pts + j * g + idx / per));
        }
    }
    Graph::from_edges(n_pts + g * n_pts, edges)
}

/// The multiplicative-3 hard instance built on `biregular_girth6(q, 1)`.
pub fn hard_instance_mult3(q: u64, s: usize) -> Result<(Graph, EdgePartition)> {
    hard_instance(q, 1, s)
}

/// `s` copies of the left (point) side of `biregular_girth6(q, g)` sharing one
/// right side. Player `i` owns every edge at its own copy, so each base edge
/// appears once per player and the partition is disjoint.
pub fn hard_instance(q: u64, g: u64, s: usize) -> Result<(Graph, EdgePartition)> {
    if s == 0 {
        return Err(domain("hard instance needs at least one player"));
    }
    let base = biregular_girth6(q, g)?;
    let left = (q * q + q + 1) as usize;
    let right = base.n() - left;
    let n = s * left + right;
    let mut assignment = vec![Vec::with_capacity(base.m()); s];
    for (i, owned) in assignment.iter_mut().enumerate() {
        for e in base.edges() {
            // Base edges always run point (u < left) to line copy (v >= left).
            owned.push(Edge::new(i * left + e.u, s * left + (e.v - left)));
        }
    }
    let graph = Graph::from_edge_iter_dedup(n, assignment.iter().flatten().copied())?;
    let partition = EdgePartition::new(n, assignment, false)?;
    Ok((graph, partition))
}

/// How `partition_edges` distributes edges among players.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PartitionMode {
    DisjointRandom,
    DuplicatedRandom,
    AdversarialByVertex,
}

impl PartitionMode {
    pub const ALL: [PartitionMode; 3] = [
        PartitionMode::DisjointRandom,
        PartitionMode::DuplicatedRandom,
        PartitionMode::AdversarialByVertex,
    ];

    pub fn allows_duplication(self) -> bool {
        self == PartitionMode::DuplicatedRandom
    }
}

impl fmt::Display for PartitionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PartitionMode::DisjointRandom => "disjoint-random",
            PartitionMode::DuplicatedRandom => "duplicated-random",
            PartitionMode::AdversarialByVertex => "adversarial-by-vertex",
        })
    }
}

impl FromStr for PartitionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PartitionMode::ALL
            .into_iter()
            .find(|m| m.to_string() == s)
            .ok_or_else(|| domain(format!("unknown partition mode `{s}`")))
    }
}

/// Assignment of edges to `s` players. Each player's list is sorted and
/// duplicate-free.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgePartition {
    n: usize,
    assignment: Vec<Vec<Edge>>,
    allow_duplication: bool,
}

impl EdgePartition {
    /// Normalizes each player's list; rejects out-of-range edges, repeats
    /// within one player, and overlap between players when duplication is off.
    pub fn new(n: usize, mut assignment: Vec<Vec<Edge>>, allow_duplication: bool) -> Result<Self> {
        if assignment.is_empty() {
            return Err(domain("a partition needs at least one player"));
        }
        for (i, list) in assignment.iter_mut().enumerate() {
            list.sort_unstable();
            if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
                return Err(domain(format!("player {i} holds {} twice", w[0])));
            }
            if let Some(e) = list.iter().find(|e| e.u == e.v || e.v >= n) {
                return Err(domain(format!("player {i} holds invalid edge {e}")));
            }
        }
        if !allow_duplication {
            let mut all: Vec<Edge> = assignment.iter().flatten().copied().collect();
            all.sort_unstable();
            if let Some(w) = all.windows(2).find(|w| w[0] == w[1]) {
                return Err(domain(format!(
                    "edge {} held by two players in a partition without duplication",
                    w[0]
                )));
            }
        }
        Ok(EdgePartition {
            n,
            assignment,
            allow_duplication,
        })
    }

    /// Puts every edge of `g` on a single player.
    pub fn single(g: &Graph) -> Self {
        EdgePartition {
            n: g.n(),
            assignment: vec![g.edge_vec()],
            allow_duplication: false,
        }
    }

    pub fn s(&self) -> usize {
        self.assignment.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn allow_duplication(&self) -> bool {
        self.allow_duplication
    }

    pub fn player_edges(&self, player: usize) -> &[Edge] {
        &self.assignment[player]
    }

    pub fn assignment(&self) -> &[Vec<Edge>] {
        &self.assignment
    }

    /// Total number of (player, edge) pairs.
    pub fn total_held(&self) -> usize {
        self.assignment.iter().map(Vec::len).sum()
    }

    /// The subgraph held by one player.
    pub fn local_graph(&self, player: usize) -> Graph {
        Graph::from_edge_iter_dedup(self.n, self.assignment[player].iter().copied())
            .expect("partition edges were validated on construction")
    }

    /// Checks that the union of player sets is exactly the edge set of `g`.
    pub fn validate(&self, g: &Graph) -> Result<()> {
        if self.n != g.n() {
            return Err(domain(format!(
                "partition is over {} vertices, graph has {}",
                self.n,
                g.n()
            )));
        }
        let mut all: Vec<Edge> = self.assignment.iter().flatten().copied().collect();
        all.sort_unstable();
        all.dedup();
        if let Some(e) = all.iter().find(|e| !g.contains(**e)) {
            return Err(domain(format!("partition holds {e}, which is not in the graph")));
        }
        if all.len() != g.m() {
            return Err(domain(format!(
                "partition covers {} of the graph's {} edges",
                all.len(),
                g.m()
            )));
        }
        Ok(())
    }
}

/// Distributes the edges of `g` among `s` players.
pub fn partition_edges(g: &Graph, s: usize, mode: PartitionMode, seed: u64) -> Result<EdgePartition> {
    if s == 0 {
        return Err(domain("partition needs s >= 1"));
    }
    let mut rng = rng_from_seed(seed);
    let mut assignment = vec![Vec::new(); s];
    for e in g.edges() {
        match mode {
            PartitionMode::DisjointRandom => assignment[rng.gen_range(0..s)].push(e),
            PartitionMode::AdversarialByVertex => {
                assignment[(splitmix64(e.u as u64 ^ seed) % s as u64) as usize].push(e)
            }
            PartitionMode::DuplicatedRandom => {
                for i in random_nonempty_subset(&mut rng, s) {
                    assignment[i].push(e);
                }
            }
        }
    }
    EdgePartition::new(g.n(), assignment, mode.allows_duplication())
}

fn random_nonempty_subset(rng: &mut ChaCha8Rng, s: usize) -> Vec<usize> {
    if s < 64 {
        let mask: u64 = rng.gen_range(1..(1u64 << s));
        (0..s).filter(|i| mask >> i & 1 == 1).collect()
    } else {
        loop {
            let picked: Vec<usize> = (0..s).filter(|_| rng.gen::<bool>()).collect();
            if !picked.is_empty() {
                return picked;
            }
        }
    }
}

/// Reads the partition format: header `s n allow_dup`, then `player u v`.
pub fn read_partition<R: BufRead>(reader: R) -> Result<EdgePartition> {
    let mut lines = content_lines(reader);
    let (header_line, header) = lines
        .next()
        .transpose()?
        .ok_or_else(|| parse(1, "missing `s n allow_dup` header"))?;
    let [s, n, dup] = parse_fields::<3>(header_line, &header)?;
    if s == 0 {
        return Err(parse(header_line, "a partition needs at least one player"));
    }
    if dup > 1 {
        return Err(parse(header_line, "allow_dup must be 0 or 1"));
    }
    let n = n as usize;
    let mut assignment: Vec<Vec<Edge>> = vec![Vec::new(); s as usize];
    for item in lines {
        let (line_no, line) = item?;
        let [p, u, v] = parse_fields::<3>(line_no, &line)?;
        if p >= s {
            return Err(parse(line_no, format!("player {p} out of range for s = {s}")));
        }
        let (u, v) = (u as usize, v as usize);
        if u >= v || v >= n {
            return Err(parse(line_no, format!("edge `{u} {v}` needs u < v < n")));
        }
        assignment[p as usize].push(Edge::new(u, v));
    }
    EdgePartition::new(n, assignment, dup == 1)
}

pub fn write_partition<W: Write>(mut out: W, p: &EdgePartition, comments: &[String]) -> Result<()> {
    for c in comments {
        writeln!(out, "# {c}")?;
    }
    writeln!(out, "{} {} {}", p.s(), p.n, u8::from(p.allow_duplication))?;
    for (i, list) in p.assignment.iter().enumerate() {
        for e in list {
            writeln!(out, "{i} {} {}", e.u, e.v)?;
        }
    }
    Ok(())
}
