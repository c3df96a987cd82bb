use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;

use super::{collect_incident_edges, degree_exchange, known_degrees, Audit, BaswanaAudit, ClusterState};
use crate::error::{domain, Result};
use crate::graph::{Edge, Vertex};
use crate::simnet::{Payload, PlayerView, ProtocolContext, ProtocolOptions};

/// Derived parameters of a Baswana-Sen run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BaswanaParams {
    pub k: u32,
    /// `floor(k / 2)`: number of clustering levels.
    pub ell: usize,
    /// Low-degree threshold `s^(1-2/k) n^(1/k)`.
    pub d1: f64,
    /// Expansion threshold `n^(1/k) / s^(2/k)`.
    pub d2: f64,
    /// Center sampling probability.
    pub p1: f64,
    /// Cluster sampling probability during expansion.
    pub p2: f64,
}

impl BaswanaParams {
    pub fn new(n: usize, s: usize, k: u32, options: &ProtocolOptions) -> Result<Self> {
        if k < 3 {
            return Err(domain(format!(
                "baswana-sen needs k >= 3, got {k}; use additive2 or greedy for small k"
            )));
        }
        let (nf, sf, kf) = (n.max(1) as f64, s as f64, f64::from(k));
        let d1 = sf.powf(1.0 - 2.0 / kf) * nf.powf(1.0 / kf);
        let d2 = nf.powf(1.0 / kf) / sf.powf(2.0 / kf);
        Ok(BaswanaParams {
            k,
            ell: (k / 2) as usize,
            d1,
            d2,
            p1: options.sample_probability(d1, n),
            p2: options.sample_probability(d2, n),
        })
    }

    pub fn is_odd(&self) -> bool {
        self.k % 2 == 1
    }

    /// Expansion iterations: `ell - 1` for both parities.
    pub fn iterations(&self) -> usize {
        self.ell - 1
    }
}

/// All cluster assignments broadcast so far, oldest first.
fn known_levels<'a>(view: &'a PlayerView<'_>) -> Vec<&'a [Option<Vertex>]> {
    view.inbox().iter().filter_map(|p| p.as_assignment()).collect()
}

/// What a player needs for one join step: which vertices are looking for a
/// cluster, and which center each potential target vertex leads to.
#[derive(Default)]
struct JoinMemory {
    candidate: Vec<bool>,
    target: Vec<Option<Vertex>>,
}

/// `prev_level = None` joins vertices to sampled centers (phase 1);
/// `Some(i)` joins members of unsampled level-`i` clusters to sampled ones.
fn join_rules(n: usize, sampled: &[Vertex], prev: Option<&[Option<Vertex>]>) -> (Vec<bool>, Vec<Option<Vertex>>) {
    let mut is_sampled = vec![false; n];
    for &c in sampled {
        is_sampled[c] = true;
    }
    match prev {
        None => (
            is_sampled.iter().map(|&b| !b).collect(),
            (0..n).map(|v| is_sampled[v].then_some(v)).collect(),
        ),
        Some(prev) => (
            prev.iter().map(|c| c.is_some_and(|c| !is_sampled[c])).collect(),
            prev.iter().map(|c| c.filter(|&c| is_sampled[c])).collect(),
        ),
    }
}

/// Players flag each candidate vertex adjacent to a target with one bit;
/// the coordinator then fetches one edge per flagged vertex from the lowest
/// flagging player. Returns `(vertex, neighbor it joins through)`.
fn join_step(ctx: &mut ProtocolContext, prev_level: Option<usize>) -> Result<Vec<(Vertex, Vertex)>> {
    let n = ctx.n();
    let flags = ctx.query_all(|view| {
        let sampled = view.latest(Payload::as_vertex_set).unwrap_or(&[]).to_vec();
        let levels = known_levels(view);
        let prev = prev_level.map(|i| levels[i]);
        let (candidate, target) = join_rules(n, &sampled, prev);
        let (local, _, mem) = view.parts::<JoinMemory>();
        let bits = (0..n)
            .map(|v| candidate[v] && local.neighbors(v).iter().any(|&w| target[w].is_some()))
            .collect();
        *mem = JoinMemory { candidate, target };
        Payload::Bits(bits)
    })?;
    let mut requests: Vec<Vec<Vertex>> = vec![Vec::new(); ctx.s()];
    for v in 0..n {
        if let Some(p) = flags.iter().position(|f| f.as_bits().is_some_and(|b| b[v])) {
            requests[p].push(v);
        }
    }
    // Candidates and targets are disjoint, so the requested endpoint of each
    // returned edge is the joining vertex.
    let mut joins = Vec::new();
    for (p, req) in requests.into_iter().enumerate() {
        if req.is_empty() {
            continue;
        }
        let mut asked = vec![false; n];
        for &v in &req {
            asked[v] = true;
        }
        ctx.send_to_player(p, Payload::VertexSet(req))?;
        let reply = ctx.query_player(p, |view| {
            let req = view.latest(Payload::as_vertex_set).unwrap_or(&[]).to_vec();
            let (local, _, mem) = view.parts::<JoinMemory>();
            let edges = req
                .iter()
                .filter(|&&v| mem.candidate[v])
                .filter_map(|&v| {
                    let w = local.neighbors(v).iter().find(|&&w| mem.target[w].is_some())?;
                    Some(Edge::new(v, *w))
                })
                .collect();
            Payload::EdgeList(edges)
        })?;
        for e in reply.as_edge_list().unwrap_or(&[]) {
            joins.push(if asked[e.u] { (e.u, e.v) } else { (e.v, e.u) });
        }
    }
    Ok(joins)
}

/// Baswana-Sen cluster-cluster joining in the coordinator model.
///
/// Phase 1 keeps every edge at a vertex of degree at most `d1` and clusters
/// the rest around centers sampled with probability about `ln n / d1`.
/// Phase 2 runs `ell - 1` expansion iterations with sampling probability
/// about `ln n / d2`. Phase 3 links every adjacent pair of final clusters
/// (odd `k`), or every final cluster with every adjacent level `ell - 2`
/// cluster (even `k`).
///
/// High-degree vertices that phase 1 leaves unclustered keep one edge to
/// each adjacent level-0 cluster plus all edges among themselves, so the
/// output is a `(2k-1)`-spanner whatever the samples.
pub fn baswana_sen(ctx: &mut ProtocolContext, k: u32, options: &ProtocolOptions) -> Result<(Vec<Edge>, Audit)> {
    let (n, s) = (ctx.n(), ctx.s());
    let params = BaswanaParams::new(n, s, k, options)?;
    let d1 = params.d1;
    let degrees = degree_exchange(ctx)?;
    let high: Vec<bool> = degrees.iter().map(|&d| f64::from(d) > d1).collect();
    let mut h: BTreeSet<Edge> = collect_incident_edges(ctx, |view, v| f64::from(known_degrees(view)[v]) <= d1)?
        .into_iter()
        .collect();

    // Phase 1: sample centers, attach adjacent vertices.
    let centers: Vec<Vertex> = (0..n).filter(|_| ctx.rng().gen_bool(params.p1)).collect();
    ctx.broadcast_shared_randomness(Payload::VertexSet(centers.clone()))?;
    let mut membership: Vec<Option<(Vertex, u32)>> = vec![None; n];
    for &c in &centers {
        membership[c] = Some((c, 0));
    }
    for (v, w) in join_step(ctx, None)? {
        membership[v] = Some((w, 1));
        h.insert(Edge::new(v, w));
    }
    let level0 = ClusterState {
        level: 0,
        centers,
        membership,
    };
    ctx.broadcast(Payload::Assignment(level0.assignment()))?;
    let uncovered_high: Vec<Vertex> = (0..n).filter(|&v| high[v] && level0.membership[v].is_none()).collect();
    if !uncovered_high.is_empty() {
        let replies = ctx.query_all(|view| {
            let degrees = known_degrees(view);
            let level = known_levels(view)[0];
            let uncovered = |v: Vertex| f64::from(degrees[v]) > d1 && level[v].is_none();
            let mut seen = BTreeSet::new();
            let edges = view
                .local()
                .edges()
                .flat_map(|e| [(e.u, e.v), (e.v, e.u)])
                .filter(|&(a, b)| {
                    uncovered(a)
                        && match level[b] {
                            None => uncovered(b) && a < b,
                            Some(c) => seen.insert((a, c)),
                        }
                })
                .map(|(a, b)| Edge::new(a, b))
                .collect();
            Payload::EdgeList(edges)
        })?;
        let mut seen = BTreeSet::new();
        for e in replies.iter().flat_map(|r| r.as_edge_list().unwrap_or(&[])) {
            let keep = match (level0.membership[e.u], level0.membership[e.v]) {
                (None, None) => true,
                (None, Some((c, _))) => seen.insert((e.u, c)),
                (Some((c, _)), None) => seen.insert((e.v, c)),
                (Some(_), Some(_)) => false,
            };
            if keep {
                h.insert(*e);
            }
        }
    }
    let mut levels = vec![level0];

    // Phase 2: expand clusters one layer per iteration.
    for i in 1..=params.iterations() {
        let prev = &levels[i - 1];
        let sampled: Vec<Vertex> = prev
            .centers
            .iter()
            .copied()
            .filter(|_| ctx.rng().gen_bool(params.p2))
            .collect();
        ctx.broadcast_shared_randomness(Payload::VertexSet(sampled.clone()))?;
        let mut is_sampled = vec![false; n];
        for &c in &sampled {
            is_sampled[c] = true;
        }
        let mut membership: Vec<Option<(Vertex, u32)>> = prev
            .membership
            .iter()
            .map(|m| m.filter(|&(c, _)| is_sampled[c]))
            .collect();
        let prev = &levels[i - 1];
        for (v, w) in join_step(ctx, Some(i - 1))? {
            let (c, d) = prev.membership[w].expect("join target is clustered");
            membership[v] = Some((c, d + 1));
            h.insert(Edge::new(v, w));
        }
        let state = ClusterState {
            level: i,
            centers: sampled,
            membership,
        };
        ctx.broadcast(Payload::Assignment(state.assignment()))?;
        let retiring = (0..n).any(|v| prev.membership[v].is_some() && state.membership[v].is_none());
        if retiring {
            let replies = ctx.query_all(|view| {
                let levels = known_levels(view);
                let (before, after) = (levels[i - 1], levels[i]);
                let mut seen = BTreeSet::new();
                let edges = view
                    .local()
                    .edges()
                    .flat_map(|e| [(e.u, e.v), (e.v, e.u)])
                    .filter(|&(a, b)| {
                        let retires = before[a].is_some() && after[a].is_none();
                        retires && before[b].is_some_and(|c| Some(c) != before[a] && seen.insert((a, c)))
                    })
                    .map(|(a, b)| Edge::new(a, b))
                    .collect();
                Payload::EdgeList(edges)
            })?;
            let mut seen = BTreeSet::new();
            for e in replies.iter().flat_map(|r| r.as_edge_list().unwrap_or(&[])) {
                for (a, b) in [(e.u, e.v), (e.v, e.u)] {
                    let retires = prev.membership[a].is_some() && state.membership[a].is_none();
                    if let (true, Some((c, _))) = (retires, prev.membership[b]) {
                        if Some(c) != prev.membership[a].map(|m| m.0) && seen.insert((a, c)) {
                            h.insert(*e);
                        }
                    }
                }
            }
        }
        levels.push(state);
    }

    // Phase 3: one edge per adjacent pair of clusters.
    let odd = params.is_odd();
    let (last, other) = (params.ell - 1, if odd { params.ell - 1 } else { params.ell - 2 });
    let replies = ctx.query_all(|view| {
        let levels = known_levels(view);
        let edges = pair_edges(view.local().edges(), levels[last], levels[other], odd);
        Payload::EdgeList(edges.into_values().collect())
    })?;
    let final_assign = levels[last].assignment();
    let other_assign = levels[other].assignment();
    let merged = pair_edges(
        replies
            .iter()
            .flat_map(|r| r.as_edge_list().unwrap_or(&[]).iter().copied()),
        &final_assign,
        &other_assign,
        odd,
    );
    h.extend(merged.into_values());

    let audit = BaswanaAudit {
        params,
        high_degree: high,
        expansion_iterations: levels.len() - 1,
        levels,
        uncovered_high,
    };
    Ok((h.into_iter().collect(), Audit::BaswanaSen(audit)))
}

/// First edge, in iteration order, for each pair `(final cluster, other
/// cluster)`. For odd `k` both levels coincide and pairs are unordered.
fn pair_edges<I>(
    edges: I,
    last: &[Option<Vertex>],
    other: &[Option<Vertex>],
    odd: bool,
) -> BTreeMap<(Vertex, Vertex), Edge>
where
    I: IntoIterator<Item = Edge>,
{
    let mut out = BTreeMap::new();
    for e in edges {
        for (x, y) in [(e.u, e.v), (e.v, e.u)] {
            if let (Some(a), Some(b)) = (last[x], other[y]) {
                if a != b {
                    let key = if odd { (a.min(b), a.max(b)) } else { (a, b) };
                    out.entry(key).or_insert(e);
                }
            }
        }
    }
    out
}
