use crate::error::{domain, Result};
use crate::graph::{BfsTree, Edge, Vertex};
use crate::simnet::{Payload, ProtocolContext};

#[derive(Default)]
struct BfsMemory {
    ever_active: Vec<bool>,
}

/// Distributed BFS from `root`. Each round the coordinator broadcasts the
/// active set; every player replies with the not-yet-active neighbors of that
/// set, each with one edge to its lowest-id active neighbor. The coordinator
/// takes the first report per vertex in player order.
///
/// With `budget = Some(b)` the tree stops growing once it holds `b` vertices,
/// filling the last level in ascending vertex id.
pub fn dist_bfs(ctx: &mut ProtocolContext, root: Vertex, budget: Option<usize>) -> Result<BfsTree> {
    let n = ctx.n();
    if root >= n {
        return Err(domain(format!("BFS root {root} out of range for n = {n}")));
    }
    let budget = budget.unwrap_or(n).max(1);
    ctx.clear_player_memory();
    let mut tree = BfsTree::with_root(n, root);
    let mut size = 1;
    let mut active = vec![root];
    let mut depth = 0u32;
    while !active.is_empty() && size < budget {
        ctx.broadcast(Payload::VertexSet(active.clone()))?;
        let replies = ctx.query_all(|view| {
            let n = view.n();
            let (local, inbox, mem) = view.parts::<BfsMemory>();
            let a_t = inbox.iter().rev().find_map(|p| p.as_vertex_set()).unwrap_or(&[]);
            if mem.ever_active.len() != n {
                mem.ever_active = vec![false; n];
            }
            for &a in a_t {
                mem.ever_active[a] = true;
            }
            let mut reported = vec![false; n];
            let mut edges = Vec::new();
            for &a in a_t {
                for &w in local.neighbors(a) {
                    if !mem.ever_active[w] && !reported[w] {
                        reported[w] = true;
                        edges.push(Edge::new(a, w));
                    }
                }
            }
            Payload::EdgeList(edges)
        })?;
        depth += 1;
        let mut next: Vec<(Vertex, Vertex)> = Vec::new();
        for reply in &replies {
            for e in reply.as_edge_list().unwrap_or(&[]) {
                let (parent, child) = if tree.depth[e.u].is_some() {
                    (e.u, e.v)
                } else {
                    (e.v, e.u)
                };
                if tree.depth[child].is_none() && tree.depth[parent] == Some(depth - 1) {
                    tree.depth[child] = Some(depth);
                    tree.parent[child] = Some(parent);
                    next.push((child, parent));
                }
            }
        }
        next.sort_unstable();
        let room = budget - size;
        for &(child, _) in next.iter().skip(room) {
            tree.depth[child] = None;
            tree.parent[child] = None;
        }
        next.truncate(room);
        size += next.len();
        active = next.into_iter().map(|(child, _)| child).collect();
    }
    Ok(tree)
}
