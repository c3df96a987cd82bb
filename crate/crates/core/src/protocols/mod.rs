//! Spanner protocols expressed over the simnet primitives. Each protocol
//! returns the coordinator's output edges plus an [`Audit`] of its random
//! choices, so tests can check the sampling events after the fact.

mod additive;
mod audit;
mod baswana;
mod bfs;
mod greedy;

pub use additive::{additive2, additive_k};
pub use audit::{Audit, BaswanaAudit, ClusterState};
pub use baswana::{baswana_sen, BaswanaParams};
pub use bfs::dist_bfs;
pub use greedy::{greedy_mult, greedy_spanner, simultaneous_mult, GreedyBuilder};

use rand::Rng;

use crate::error::Result;
use crate::graph::{Edge, Vertex};
use crate::simnet::{Payload, PlayerView, ProtocolContext};

/// Every party learns every vertex's degree: players send their local degree
/// vectors and the coordinator broadcasts the (clamped) sums.
///
/// With duplicated edges the sums over-count; protocols use degrees only for
/// thresholding, and an over-count merely moves a vertex into the
/// high-degree class, which the protocols cover by sampling.
pub fn degree_exchange(ctx: &mut ProtocolContext) -> Result<Vec<u32>> {
    let n = ctx.n();
    let replies = ctx.query_all(|view| {
        let g = view.local();
        Payload::Degrees((0..g.n()).map(|v| g.degree(v) as u32).collect())
    })?;
    let cap = n.saturating_sub(1) as u32;
    let mut total = vec![0u32; n];
    for reply in &replies {
        for (t, d) in total.iter_mut().zip(reply.as_degrees().unwrap_or(&[])) {
            *t = t.saturating_add(*d);
        }
    }
    for t in &mut total {
        *t = (*t).min(cap);
    }
    ctx.broadcast(Payload::Degrees(total.clone()))?;
    Ok(total)
}

/// Degrees as last broadcast to this player.
pub(crate) fn known_degrees<'a>(view: &'a PlayerView<'_>) -> &'a [u32] {
    view.latest(Payload::as_degrees).unwrap_or(&[])
}

/// `count` uniform vertices with replacement, returned as a sorted set.
pub(crate) fn sample_with_replacement(ctx: &mut ProtocolContext, count: usize) -> Vec<Vertex> {
    let n = ctx.n();
    if n == 0 {
        return Vec::new();
    }
    let mut picked: Vec<Vertex> = (0..count).map(|_| ctx.rng().gen_range(0..n)).collect();
    picked.sort_unstable();
    picked.dedup();
    picked
}

/// Each player sends every local edge with at least one endpoint in `keep`.
pub(crate) fn collect_incident_edges(
    ctx: &mut ProtocolContext,
    keep: impl Fn(&PlayerView<'_>, Vertex) -> bool,
) -> Result<Vec<Edge>> {
    let replies = ctx.query_all(|view| {
        let edges = view
            .local()
            .edges()
            .filter(|e| keep(view, e.u) || keep(view, e.v))
            .collect();
        Payload::EdgeList(edges)
    })?;
    Ok(replies
        .iter()
        .flat_map(|r| r.as_edge_list().unwrap_or(&[]).iter().copied())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::EdgePartition;
    use crate::graph::Graph;
    use crate::simnet::Mode;

    #[test]
    fn degree_exchange_star() {
        let star = Graph::from_edges(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        let e = star.edge_vec();
        let p = EdgePartition::new(4, vec![e[..1].to_vec(), e[1..].to_vec()], false).unwrap();
        let mut ctx = ProtocolContext::new(&p, 0, Mode::Interactive, false);
        assert_eq!(degree_exchange(&mut ctx).unwrap(), [3, 1, 1, 1]);
        // Each of 2 players sends 4 two-bit degrees and receives the same.
        assert_eq!(ctx.transcript().total_bits(), 2 * 2 * 4 * 2);
    }

    #[test]
    fn degree_exchange_empty_and_duplicated() {
        let p = EdgePartition::new(5, vec![Vec::new(); 3], false).unwrap();
        let mut ctx = ProtocolContext::new(&p, 0, Mode::Interactive, false);
        assert_eq!(degree_exchange(&mut ctx).unwrap(), [0; 5]);

        let e = Edge::new(0, 1);
        let p = EdgePartition::new(3, vec![vec![e], vec![e]], true).unwrap();
        let mut ctx = ProtocolContext::new(&p, 0, Mode::Interactive, false);
        // Over-counted and then clamped to n - 1.
        assert_eq!(degree_exchange(&mut ctx).unwrap(), [2, 2, 0]);
    }
}
