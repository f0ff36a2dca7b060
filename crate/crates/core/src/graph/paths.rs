use std::collections::VecDeque;

use super::Graph;
use crate::{Error, Result};

/// Distance recorded for nodes that were not reached (or lie beyond the
/// depth limit).
pub const UNREACHED: u32 = u32::MAX;

/// Hop distances from `source`. With `max_depth = Some(d)` the search stops
/// expanding at depth `d`, so every node farther away reads [`UNREACHED`].
pub fn bfs_distances(g: &Graph, source: usize, max_depth: Option<u32>) -> Result<Vec<u32>> {
    let n = g.node_count();
    if source >= n {
        return Err(Error::invalid(format!("source {source} out of range for n = {n}")));
    }
    let limit = max_depth.unwrap_or(UNREACHED - 1);
    let mut dist = vec![UNREACHED; n];
    let mut queue = VecDeque::new();
    dist[source] = 0;
    queue.push_back(source);
    while let Some(v) = queue.pop_front() {
        let next = dist[v] + 1;
        if next > limit {
            continue;
        }
        for &w in g.neighbors(v) {
            if dist[w] == UNREACHED {
                dist[w] = next;
                queue.push_back(w);
            }
        }
    }
    Ok(dist)
}

/// True iff a BFS from node 0 reaches every node. The empty graph counts as
/// connected.
pub fn is_connected(g: &Graph) -> bool {
    if g.node_count() == 0 {
        return true;
    }
    let mut seen = vec![false; g.node_count()];
    let mut stack = vec![0usize];
    seen[0] = true;
    let mut reached = 1;
    while let Some(v) = stack.pop() {
        for &w in g.neighbors(v) {
            if !seen[w] {
                seen[w] = true;
                reached += 1;
                stack.push(w);
            }
        }
    }
    reached == g.node_count()
}
