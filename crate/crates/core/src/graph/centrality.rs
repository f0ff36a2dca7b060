//! Brandes betweenness, plain and restricted to observed endpoint pairs.

use std::collections::VecDeque;

use super::{Graph, UNREACHED};

/// Per-node centrality values, indexed by node id.
#[derive(Debug, Clone, PartialEq)]
pub struct CentralityScores(pub Vec<f64>);

impl CentralityScores {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// Unnormalized betweenness: for every node `v`, the sum over unordered
/// pairs `{x, y}` with `v` not an endpoint of the fraction of shortest
/// `x`-`y` paths through `v`.
pub fn betweenness(g: &Graph) -> CentralityScores {
    let n = g.node_count();
    let all = vec![true; n];
    CentralityScores(brandes(g, &all, &all))
}

/// Betweenness restricted to shortest paths whose two endpoints are both in
/// `observed`. Sums over unordered observed pairs; duplicate ids in
/// `observed` are ignored.
pub fn observed_betweenness(g: &Graph, observed: &[usize]) -> CentralityScores {
    let mut mask = vec![false; g.node_count()];
    for &v in observed {
        mask[v] = true;
    }
    CentralityScores(brandes(g, &mask, &mask))
}

/// Brandes accumulation over sources with `is_source`, crediting only
/// targets with `is_target`. Every unordered pair with both ends in both
/// masks is visited twice, hence the final halving.
fn brandes(g: &Graph, is_source: &[bool], is_target: &[bool]) -> Vec<f64> {
    let n = g.node_count();
    let mut score = vec![0.0f64; n];
    let mut sigma = vec![0.0f64; n];
    let mut delta = vec![0.0f64; n];
    let mut dist = vec![UNREACHED; n];
    let mut order: Vec<usize> = Vec::with_capacity(n);
    let mut queue = VecDeque::with_capacity(n);

    for s in (0..n).filter(|&s| is_source[s]) {
        for &v in &order {
            sigma[v] = 0.0;
            delta[v] = 0.0;
            dist[v] = UNREACHED;
        }
        order.clear();

        sigma[s] = 1.0;
        dist[s] = 0;
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &w in g.neighbors(v) {
                if dist[w] == UNREACHED {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] += sigma[v];
                }
            }
        }

        for &w in order.iter().rev() {
            let credit = if is_target[w] { 1.0 } else { 0.0 };
            let coeff = (credit + delta[w]) / sigma[w];
            if dist[w] > 0 {
                for &v in g.neighbors(w) {
                    if dist[v] != UNREACHED && dist[v] + 1 == dist[w] {
                        delta[v] += sigma[v] * coeff;
                    }
                }
            }
            if w != s {
                score[w] += delta[w];
            }
        }
    }
    for x in &mut score {
        *x *= 0.5;
    }
    score
}
