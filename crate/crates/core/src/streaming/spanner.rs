use std::collections::BTreeMap;
use std::sync::Arc;

use rand::Rng;

use super::sampler::{GroupSampler, GroupShape, HashFamily, L0Sampler};
use super::TurnstileStream;
use crate::error::{domain, Result};
use crate::generators::rng_from_seed;
use crate::graph::{ceil_log2, edge_from_index, Edge, Graph, Vertex};
use crate::protocols::ClusterState;

/// Tuning knobs of the streaming spanner.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StreamOptions {
    /// A vertex that finds no sampled cluster is expected to see at most
    /// `c_group * n^(1/k) * ln n` clusters; group samplers are sized for it.
    pub c_group: f64,
    /// Sampler failure probability; `None` means `n^-3`.
    pub delta: Option<f64>,
}

impl Default for StreamOptions {
    fn default() -> Self {
        StreamOptions {
            c_group: 2.0,
            delta: None,
        }
    }
}

/// Sketch memory in machine words, maximized over passes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SpaceReport {
    /// Every sampler the algorithm may need, fully allocated.
    pub worst_case_words: u64,
    /// Words held by samplers the stream actually touched.
    pub instantiated_words: u64,
}

impl SpaceReport {
    fn absorb(&mut self, other: SpaceReport) {
        self.worst_case_words = self.worst_case_words.max(other.worst_case_words);
        self.instantiated_words = self.instantiated_words.max(other.instantiated_words);
    }
}

#[derive(Clone, Debug)]
pub struct StreamSpannerResult {
    pub spanner: Graph,
    pub passes: usize,
    pub space: SpaceReport,
    /// Cluster levels `0..floor(k/2)`.
    pub levels: Vec<ClusterState>,
}

/// Per-vertex cluster and depth, or `None` when the vertex is unclustered.
type Membership = Vec<Option<(Vertex, u32)>>;

struct Pass<'a> {
    stream: &'a TurnstileStream,
    n: usize,
    passes: usize,
    space: SpaceReport,
    seed_rng: rand_chacha::ChaCha8Rng,
    delta: f64,
}

impl Pass<'_> {
    fn family(&mut self) -> Result<Arc<HashFamily>> {
        let seed = self.seed_rng.gen();
        Ok(Arc::new(HashFamily::new(self.stream.dimension(), self.delta, seed)?))
    }

    /// Feeds every update, as `(index, edge)`, to `visit`.
    fn run(&mut self, mut visit: impl FnMut(u64, Edge, i64) -> Result<()>) -> Result<()> {
        self.passes += 1;
        for u in self.stream.updates() {
            visit(u.index, edge_from_index(u.index, self.n)?, u.delta)?;
        }
        Ok(())
    }
}

/// Multiplicative `(2k-1)`-spanner of a turnstile stream in `floor(k/2) + 1`
/// passes, by cluster-cluster joining with `l0`-samplers.
///
/// With `ell = floor(k/2)`: pass 1 samples centers with probability
/// `n^(-1/k)` and lets each vertex join an adjacent center; passes
/// `2..ell` each keep a `n^(-1/k)` fraction of clusters and grow them by one
/// layer. In every such pass a vertex that finds no sampled cluster retires
/// and keeps one edge to each adjacent cluster of the previous level, found
/// by a group sampler. The last pass keeps one edge between every adjacent
/// pair of final clusters (odd `k`), or between every final cluster and
/// every adjacent cluster one level below (even `k`; below level 0 every
/// vertex is its own cluster).
pub fn stream_spanner(
    stream: &TurnstileStream,
    k: u32,
    seed: u64,
    options: &StreamOptions,
) -> Result<StreamSpannerResult> {
    if k < 2 {
        return Err(domain(format!("streaming spanner needs k >= 2, got {k}")));
    }
    let n = stream.n();
    let ell = (k / 2) as usize;
    let nf = n.max(2) as f64;
    let p = nf.powf(-1.0 / f64::from(k));
    let delta = options.delta.unwrap_or(nf.powi(-3));
    let expected_clusters = (options.c_group * nf.powf(1.0 / f64::from(k)) * nf.ln()).ceil() as u64;
    let buckets = 2 * expected_clusters.max(1);
    let tables = ceil_log2(n.max(2) as u64) as usize;

    let mut rng = rng_from_seed(seed);
    let mut pass = Pass {
        stream,
        n,
        passes: 0,
        space: SpaceReport::default(),
        seed_rng: rng_from_seed(rng.gen()),
        delta,
    };
    let mut h: Vec<Edge> = Vec::new();

    // Below level 0 every vertex is a cluster of its own.
    let singletons: Membership = (0..n).map(|v| Some((v, 0))).collect();
    let mut levels: Vec<ClusterState> = Vec::with_capacity(ell);
    for level in 0..ell {
        let prev = levels.last().map_or(&singletons, |s: &ClusterState| &s.membership);
        let prev_centers: Vec<Vertex> = match levels.last() {
            None => (0..n).collect(),
            Some(s) => s.centers.clone(),
        };
        let sampled: Vec<Vertex> = prev_centers.into_iter().filter(|_| rng.gen_bool(p)).collect();
        let (membership, edges) = expand(&mut pass, prev, &sampled, tables, buckets)?;
        h.extend(edges);
        levels.push(ClusterState {
            level,
            centers: sampled,
            membership,
        });
    }

    let odd = k % 2 == 1;
    let last = &levels[ell - 1].membership;
    let other = match (odd, ell) {
        (true, _) => last,
        (false, 1) => &singletons,
        (false, _) => &levels[ell - 2].membership,
    };
    h.extend(connect(&mut pass, last, other, odd)?);

    let spanner = Graph::from_edge_iter_dedup(n, h)?;
    Ok(StreamSpannerResult {
        spanner,
        passes: pass.passes,
        space: pass.space,
        levels,
    })
}

/// One expansion pass. Members of unsampled clusters look for an edge into a
/// sampled cluster; those that find none keep one edge per adjacent cluster.
fn expand(
    pass: &mut Pass<'_>,
    prev: &Membership,
    sampled: &[Vertex],
    tables: usize,
    buckets: u64,
) -> Result<(Membership, Vec<Edge>)> {
    let n = pass.n;
    let mut is_sampled = vec![false; n];
    for &c in sampled {
        is_sampled[c] = true;
    }
    let cluster = |v: Vertex| prev[v].map(|(c, _)| c);
    let candidate: Vec<bool> = (0..n).map(|v| cluster(v).is_some_and(|c| !is_sampled[c])).collect();

    let join_family = pass.family()?;
    let group_family = pass.family()?;
    let group_seed = pass.seed_rng.gen();
    let shape = GroupShape::new(group_family, tables, buckets, group_seed)?;
    let mut join: BTreeMap<Vertex, L0Sampler> = BTreeMap::new();
    let mut group: BTreeMap<Vertex, GroupSampler> = BTreeMap::new();
    pass.run(|index, e, delta| {
        for (x, y) in [(e.u, e.v), (e.v, e.u)] {
            if !candidate[x] {
                continue;
            }
            let Some(cy) = cluster(y) else { continue };
            if is_sampled[cy] {
                join.entry(x)
                    .or_insert_with(|| L0Sampler::with_family(Arc::clone(&join_family)))
                    .update(index, delta)?;
            }
            if Some(cy) != cluster(x) {
                group
                    .entry(x)
                    .or_insert_with(|| shape.sampler())
                    .update(cy as u64, index, delta)?;
            }
        }
        Ok(())
    })?;
    let candidates = candidate.iter().filter(|&&c| c).count() as u64;
    pass.space.absorb(SpaceReport {
        worst_case_words: candidates * (join_family.worst_case_words() + shape.worst_case_words()),
        instantiated_words: join.values().map(L0Sampler::words).sum::<u64>()
            + group.values().map(GroupSampler::words).sum::<u64>(),
    });

    let mut membership: Membership = prev.iter().map(|m| m.filter(|&(c, _)| is_sampled[c])).collect();
    let mut edges = Vec::new();
    for x in (0..n).filter(|&x| candidate[x]) {
        let joined = join.get(&x).and_then(L0Sampler::query);
        match joined {
            Some(index) => {
                let e = edge_from_index(index, n)?;
                let (c, d) = prev[e.other(x)].expect("join target is clustered");
                membership[x] = Some((c, d + 1));
                edges.push(e);
            }
            None => {
                if let Some(g) = group.get(&x) {
                    for index in g.recover() {
                        edges.push(edge_from_index(index, n)?);
                    }
                }
            }
        }
    }
    Ok((membership, edges))
}

/// Final pass: one sampler per adjacent pair of clusters `(last, other)`.
fn connect(pass: &mut Pass<'_>, last: &Membership, other: &Membership, odd: bool) -> Result<Vec<Edge>> {
    let family = pass.family()?;
    let mut pairs: BTreeMap<(Vertex, Vertex), L0Sampler> = BTreeMap::new();
    pass.run(|index, e, delta| {
        let mut keys = [None, None];
        for (slot, (x, y)) in [(e.u, e.v), (e.v, e.u)].into_iter().enumerate() {
            if let (Some((a, _)), Some((b, _))) = (last[x], other[y]) {
                if a != b {
                    keys[slot] = Some(if odd { (a.min(b), a.max(b)) } else { (a, b) });
                }
            }
        }
        if keys[0] == keys[1] {
            keys[1] = None;
        }
        for key in keys.into_iter().flatten() {
            pairs
                .entry(key)
                .or_insert_with(|| L0Sampler::with_family(Arc::clone(&family)))
                .update(index, delta)?;
        }
        Ok(())
    })?;
    let count = |m: &Membership| {
        let mut c: Vec<Vertex> = m.iter().flatten().map(|&(c, _)| c).collect();
        c.sort_unstable();
        c.dedup();
        c.len() as u64
    };
    let (a, b) = (count(last), count(other));
    let pair_bound = if odd { a * a.saturating_sub(1) / 2 } else { a * b };
    pass.space.absorb(SpaceReport {
        worst_case_words: pair_bound * family.worst_case_words(),
        instantiated_words: pairs.values().map(L0Sampler::words).sum(),
    });
    pairs
        .values()
        .filter_map(L0Sampler::query)
        .map(|index| edge_from_index(index, pass.n))
        .collect()
}
