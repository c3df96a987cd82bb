use std::collections::VecDeque;

use super::BaswanaParams;
use crate::graph::{bfs, bfs_distances, Graph, Vertex};

/// Cluster membership after one level of Baswana-Sen clustering.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClusterState {
    pub level: usize,
    /// Sorted cluster centers; a cluster is named by its center.
    pub centers: Vec<Vertex>,
    /// Per vertex: `(center, depth in the cluster tree)`.
    pub membership: Vec<Option<(Vertex, u32)>>,
}

impl ClusterState {
    pub fn radius_bound(&self) -> u32 {
        self.level as u32 + 1
    }

    pub fn assignment(&self) -> Vec<Option<Vertex>> {
        self.membership.iter().map(|m| m.map(|(c, _)| c)).collect()
    }

    /// Every member's recorded depth is within the radius bound, and the
    /// spanner `h` really connects it to its center within that depth.
    pub fn radii_hold(&self, h: &Graph) -> bool {
        let mut dist = Vec::new();
        self.centers.iter().all(|&c| {
            bfs_distances(h, c, &mut dist);
            self.membership.iter().enumerate().all(|(v, m)| match *m {
                Some((center, depth)) if center == c => {
                    depth <= self.radius_bound() && dist[v].is_some_and(|d| d <= depth)
                }
                _ => true,
            })
        })
    }
}

#[derive(Clone, Debug)]
pub struct BaswanaAudit {
    pub params: BaswanaParams,
    pub high_degree: Vec<bool>,
    /// Levels `0..ell`, one per clustering step.
    pub levels: Vec<ClusterState>,
    pub expansion_iterations: usize,
    /// High-degree vertices with no sampled center in reach after phase 1.
    pub uncovered_high: Vec<Vertex>,
}

/// A protocol's random choices, kept for post-hoc event checks.
#[derive(Clone, Debug)]
pub enum Audit {
    None,
    Additive2 {
        low: Vec<bool>,
        samples: Vec<Vertex>,
    },
    AdditiveK {
        k: u32,
        low: Vec<bool>,
        full_roots: Vec<Vertex>,
    },
    BaswanaSen(BaswanaAudit),
}

impl Audit {
    /// Whether the sampling events the correctness argument relies on held
    /// in this run. `None` for deterministic protocols. Each event is chosen
    /// so that it implies the promised stretch outright.
    pub fn sampling_events_hold(&self, g: &Graph, h: &Graph) -> Option<bool> {
        match self {
            Audit::None => None,
            Audit::Additive2 { low, samples } => Some(every_high_vertex_hit(g, low, samples)),
            Audit::AdditiveK { k, low, full_roots } => Some(additive_k_events(g, h, *k, low, full_roots)),
            Audit::BaswanaSen(a) => Some(a.uncovered_high.is_empty() && a.levels.iter().all(|l| l.radii_hold(h))),
        }
    }
}

/// Every vertex outside the low-degree class has a sampled neighbor.
fn every_high_vertex_hit(g: &Graph, low: &[bool], samples: &[Vertex]) -> bool {
    let mut sampled = vec![false; g.n()];
    for &r in samples {
        sampled[r] = true;
    }
    (0..g.n()).all(|v| low[v] || g.neighbors(v).iter().any(|&w| sampled[w]))
}

/// (a) every pair whose canonical shortest path has at least `k` edges
/// between high-degree vertices has a full-BFS root on or next to one of
/// those edges; (b) every edge between high-degree vertices is in `h`, is
/// bridged by a 2-path in `h`, or has an endpoint within distance 3 of a
/// full-BFS root. Together these give stretch `+k` for `k >= 6`.
fn additive_k_events(g: &Graph, h: &Graph, k: u32, low: &[bool], roots: &[Vertex]) -> bool {
    let n = g.n();
    let root_dist = multi_source_distances(g, roots);
    let near_root: Vec<bool> = root_dist.iter().map(|d| d.is_some_and(|d| d <= 1)).collect();
    let high_edge = |x: Vertex, y: Vertex| !low[x] && !low[y];

    let bridged = g.edges().filter(|e| high_edge(e.u, e.v)).all(|e| {
        h.contains(e)
            || common_neighbor(h, e.u, e.v)
            || root_dist[e.u].is_some_and(|d| d <= 3)
            || root_dist[e.v].is_some_and(|d| d <= 3)
    });
    if !bridged {
        return false;
    }
    for u in 0..n {
        let tree = bfs(g, u).expect("u < n");
        for v in u + 1..n {
            if tree.depth[v].is_none() {
                continue;
            }
            let (mut missing, mut covered) = (0u32, false);
            let mut x = v;
            while let Some(p) = tree.parent[x] {
                if high_edge(x, p) {
                    missing += 1;
                    covered |= near_root[x] || near_root[p];
                }
                x = p;
            }
            if missing >= k && !covered {
                return false;
            }
        }
    }
    true
}

fn common_neighbor(h: &Graph, a: Vertex, b: Vertex) -> bool {
    let (mut i, mut j) = (0, 0);
    let (na, nb) = (h.neighbors(a), h.neighbors(b));
    while i < na.len() && j < nb.len() {
        match na[i].cmp(&nb[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return true,
        }
    }
    false
}

fn multi_source_distances(g: &Graph, sources: &[Vertex]) -> Vec<Option<u32>> {
    let mut dist = vec![None; g.n()];
    let mut queue = VecDeque::new();
    for &s in sources {
        if dist[s].is_none() {
            dist[s] = Some(0);
            queue.push_back(s);
        }
    }
    while let Some(x) = queue.pop_front() {
        let dx = dist[x].unwrap_or(0);
        for &y in g.neighbors(x) {
            if dist[y].is_none() {
                dist[y] = Some(dx + 1);
                queue.push_back(y);
            }
        }
    }
    dist
}
