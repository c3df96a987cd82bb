use std::collections::VecDeque;

use crate::error::{domain, Error, Result};
use crate::graph::{Edge, Graph, Vertex};
use crate::simnet::{Mode, Payload, ProtocolContext};

/// Incremental greedy `(2k-1)`-spanner: an offered edge `{u, v}` is kept iff
/// the current spanner has no `u`-`v` path of length at most `2k - 1`, i.e.
/// iff adding it closes no cycle of length at most `2k`.
pub struct GreedyBuilder {
    f: Graph,
    limit: u32,
    epoch: u64,
    stamp: Vec<u64>,
    dist: Vec<u32>,
    seen_v: Vec<u64>,
    dist_v: Vec<u32>,
    queue: VecDeque<Vertex>,
}

impl GreedyBuilder {
    pub fn new(n: usize, k: u32) -> Result<Self> {
        Self::with_initial(Graph::new(n), k)
    }

    /// Continues from an existing spanner `f`.
    pub fn with_initial(f: Graph, k: u32) -> Result<Self> {
        if k == 0 {
            return Err(domain("greedy spanner needs k >= 1"));
        }
        let n = f.n();
        Ok(GreedyBuilder {
            f,
            limit: 2 * k - 1,
            epoch: 0,
            stamp: vec![0; n],
            dist: vec![0; n],
            seen_v: vec![0; n],
            dist_v: vec![0; n],
            queue: VecDeque::new(),
        })
    }

    /// Offers an edge; returns whether it was added.
    pub fn offer(&mut self, e: Edge) -> bool {
        if self.f.contains(e) || self.within_limit(e.u, e.v) {
            return false;
        }
        self.f.add_edge(e.u, e.v).expect("edge is new and in range");
        true
    }

    pub fn spanner(&self) -> &Graph {
        &self.f
    }

    pub fn into_spanner(self) -> Graph {
        self.f
    }

    /// Meet-in-the-middle: ball of radius `limit/2` around `u`, then a BFS of
    /// radius `limit - limit/2` from `v` looking for a marked vertex.
    fn within_limit(&mut self, u: Vertex, v: Vertex) -> bool {
        let ru = self.limit / 2;
        let rv = self.limit - ru;
        self.epoch += 2;
        let (mark_u, mark_v) = (self.epoch - 1, self.epoch);
        self.stamp[u] = mark_u;
        self.dist[u] = 0;
        self.queue.clear();
        self.queue.push_back(u);
        while let Some(x) = self.queue.pop_front() {
            let dx = self.dist[x];
            if dx == ru {
                continue;
            }
            for &y in self.f.neighbors(x) {
                if self.stamp[y] != mark_u {
                    self.stamp[y] = mark_u;
                    self.dist[y] = dx + 1;
                    self.queue.push_back(y);
                }
            }
        }
        // Any vertex of the ball around `u` met within radius `rv` of `v`
        // closes a short path.
        self.seen_v[v] = mark_v;
        self.queue.clear();
        self.queue.push_back(v);
        self.dist_v[v] = 0;
        while let Some(x) = self.queue.pop_front() {
            let dx = self.dist_v[x];
            if self.stamp[x] == mark_u && self.dist[x] + dx <= self.limit {
                return true;
            }
            if dx == rv {
                continue;
            }
            for &y in self.f.neighbors(x) {
                if self.seen_v[y] != mark_v {
                    self.seen_v[y] = mark_v;
                    self.dist_v[y] = dx + 1;
                    self.queue.push_back(y);
                }
            }
        }
        false
    }
}

/// Centralized greedy spanner over `edges` in the given order.
pub fn greedy_spanner<I>(n: usize, edges: I, k: u32) -> Result<Graph>
where
    I: IntoIterator<Item = Edge>,
{
    let mut b = GreedyBuilder::new(n, k)?;
    for e in edges {
        b.offer(e);
    }
    Ok(b.into_spanner())
}

/// Token-passing greedy: player `i` extends the current spanner `F` with its
/// own edges in sorted order and forwards `F` to player `i + 1` through the
/// coordinator; the last player sends `F` to the coordinator.
pub fn greedy_mult(ctx: &mut ProtocolContext, k: u32) -> Result<Vec<Edge>> {
    if k == 0 {
        return Err(domain("greedy spanner needs k >= 1"));
    }
    let s = ctx.s();
    let extend = move |view: &mut crate::simnet::PlayerView<'_>| -> Payload {
        let n = view.n();
        let f = match view.latest(Payload::as_edge_list) {
            Some(list) if view.id() > 0 => {
                Graph::from_edge_iter_dedup(n, list.iter().copied()).expect("relayed spanner edges are valid")
            }
            _ => Graph::new(n),
        };
        let mut b = GreedyBuilder::with_initial(f, k).expect("k checked above");
        for e in view.local().edges() {
            b.offer(e);
        }
        Payload::EdgeList(b.into_spanner().edge_vec())
    };
    for i in 0..s - 1 {
        ctx.relay(i, i + 1, extend)?;
    }
    let last = ctx.query_player(s - 1, extend)?;
    Ok(last.as_edge_list().unwrap_or(&[]).to_vec())
}

/// One round: every player sends a greedy spanner of its own edges; the
/// coordinator outputs the union.
pub fn simultaneous_mult(ctx: &mut ProtocolContext, k: u32) -> Result<Vec<Edge>> {
    if ctx.mode() != Mode::Simultaneous {
        return Err(Error::ProtocolViolation(
            "simultaneous protocol run in interactive mode".into(),
        ));
    }
    if k == 0 {
        return Err(domain("greedy spanner needs k >= 1"));
    }
    let replies = ctx.query_all(|view| {
        let local = greedy_spanner(view.n(), view.local().edges(), k).expect("k checked above");
        Payload::EdgeList(local.edge_vec())
    })?;
    let mut out: Vec<Edge> = replies
        .iter()
        .flat_map(|r| r.as_edge_list().unwrap_or(&[]).iter().copied())
        .collect();
    out.sort_unstable();
    out.dedup();
    Ok(out)
}
