use std::collections::BTreeSet;

use super::{collect_incident_edges, degree_exchange, dist_bfs, known_degrees, sample_with_replacement, Audit};
use crate::error::{domain, Result};
use crate::graph::{Edge, Vertex};
use crate::simnet::{Payload, ProtocolContext, ProtocolOptions};

/// Low-degree edges for threshold `t`: every edge with an endpoint of degree
/// at most `t`. Players recompute the low set from the broadcast degrees.
fn low_degree_edges(ctx: &mut ProtocolContext, threshold: f64) -> Result<(Vec<bool>, Vec<Edge>)> {
    let degrees = degree_exchange(ctx)?;
    let low: Vec<bool> = degrees.iter().map(|&d| f64::from(d) <= threshold).collect();
    let edges = collect_incident_edges(ctx, |view, v| f64::from(known_degrees(view)[v]) <= threshold)?;
    Ok((low, edges))
}

/// Broadcasts `roots` and grows a BFS tree (optionally truncated) from each.
fn grow_trees(
    ctx: &mut ProtocolContext,
    roots: &[Vertex],
    budget: Option<usize>,
    out: &mut BTreeSet<Edge>,
) -> Result<()> {
    ctx.broadcast_shared_randomness(Payload::VertexSet(roots.to_vec()))?;
    for &r in roots {
        out.extend(dist_bfs(ctx, r, budget)?.edges());
    }
    Ok(())
}

/// Additive-2 spanner without duplication: keep every edge at a vertex of
/// degree at most `sqrt(sn)`, then grow full BFS trees from about
/// `c * sqrt(n/s) * ln(n/delta)` uniformly sampled roots.
pub fn additive2(ctx: &mut ProtocolContext, options: &ProtocolOptions) -> Result<(Vec<Edge>, Audit)> {
    let (n, s) = (ctx.n(), ctx.s());
    let threshold = ((s * n) as f64).sqrt();
    let (low, e1) = low_degree_edges(ctx, threshold)?;
    let count = options.sample_count(options.c_sample, (n as f64 / s as f64).sqrt(), n);
    let samples = sample_with_replacement(ctx, count);
    let mut h: BTreeSet<Edge> = e1.into_iter().collect();
    grow_trees(ctx, &samples, None, &mut h)?;
    Ok((h.into_iter().collect(), Audit::Additive2 { low, samples }))
}

/// Additive-k spanner without duplication. For `k < 6` this is exactly
/// [`additive2`]. Otherwise: low-degree edges at threshold `sqrt(sn/k)`, full
/// BFS trees from a sample `R1` of size `O~(sqrt(n/(sk))) + O~(k)`, and
/// truncated trees of `ceil(n/k)` vertices from a sample `R2` of size
/// `O~(sqrt(kn/s))`.
pub fn additive_k(ctx: &mut ProtocolContext, k: u32, options: &ProtocolOptions) -> Result<(Vec<Edge>, Audit)> {
    if k == 0 {
        return Err(domain("additive-k needs k >= 1"));
    }
    if k < 6 {
        return additive2(ctx, options);
    }
    let (n, s) = (ctx.n(), ctx.s());
    let kf = f64::from(k);
    let threshold = ((s * n) as f64 / kf).sqrt();
    let (low, e1) = low_degree_edges(ctx, threshold)?;
    let r1_count = options.sample_count(options.c_sample, (n as f64 / (s as f64 * kf)).sqrt(), n)
        + options.sample_count(options.c_sample_k, kf, n);
    let r1 = sample_with_replacement(ctx, r1_count);
    let r2_count = options.sample_count(options.c_sample, (kf * n as f64 / s as f64).sqrt(), n);
    let r2 = sample_with_replacement(ctx, r2_count);
    let mut h: BTreeSet<Edge> = e1.into_iter().collect();
    grow_trees(ctx, &r1, None, &mut h)?;
    let budget = n.div_ceil(k as usize);
    grow_trees(ctx, &r2, Some(budget), &mut h)?;
    Ok((h.into_iter().collect(), Audit::AdditiveK { k, low, full_roots: r1 }))
}
