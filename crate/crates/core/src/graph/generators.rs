//! Random network models.

use std::collections::BTreeSet;

use rand::Rng;

use super::{is_connected, Graph};
use crate::rng::rng_from_seed;
use crate::{Error, Result};

/// Barabási–Albert parameters: `m` edges per arriving node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenParamsBA {
    pub n: usize,
    pub m: usize,
    pub seed: u64,
}

/// Watts–Strogatz parameters: ring degree `k` (even) and rewiring
/// probability `p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenParamsWS {
    pub n: usize,
    pub k: usize,
    pub p: f64,
    pub seed: u64,
}

/// Number of seeds tried by [`generate_ws`] before giving up on connectivity.
pub const WS_MAX_ATTEMPTS: u32 = 100;

impl GenParamsBA {
    pub fn validate(&self) -> Result<()> {
        if self.m < 1 || self.m >= self.n {
            return Err(Error::invalid(format!(
                "BA needs 1 <= m < n, got m = {}, n = {}",
                self.m, self.n
            )));
        }
        Ok(())
    }
}

impl GenParamsWS {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || !self.k.is_multiple_of(2) || self.k >= self.n {
            return Err(Error::invalid(format!(
                "WS needs an even k with 0 < k < n, got k = {}, n = {}",
                self.k, self.n
            )));
        }
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::invalid(format!("WS rewiring probability {} outside [0, 1]", self.p)));
        }
        Ok(())
    }
}

/// Preferential-attachment graph with exactly `m * (n - m)` edges.
///
/// Nodes `0..m` start isolated; node `m` links to all of them. Every later
/// node picks `m` distinct targets from an urn that holds each existing node
/// once per incident edge, redrawing on duplicates.
pub fn generate_ba(params: &GenParamsBA) -> Result<Graph> {
    params.validate()?;
    let GenParamsBA { n, m, seed } = *params;
    let mut rng = rng_from_seed(seed);
    let mut edges = Vec::with_capacity(m * (n - m));
    let mut urn: Vec<usize> = Vec::with_capacity(2 * m * (n - m));
    let mut chosen: Vec<usize> = Vec::with_capacity(m);

    for node in m..n {
        chosen.clear();
        if node == m {
            chosen.extend(0..m);
        } else {
            while chosen.len() < m {
                let candidate = urn[rng.random_range(0..urn.len())];
                if !chosen.contains(&candidate) {
                    chosen.push(candidate);
                }
            }
        }
        for &target in &chosen {
            edges.push((target, node));
            urn.push(target);
            urn.push(node);
        }
    }
    Graph::from_edges(n, &edges)
}

/// Connected small-world graph with exactly `n * k / 2` edges.
///
/// Builds the ring lattice joining every node to its `k / 2` nearest
/// neighbours on each side, then visits the lattice edges `(u, u + j)` for
/// `j = 1..=k/2` and `u = 0..n`, rewiring the far endpoint with probability
/// `p` to a uniform node that is neither `u` nor already adjacent to `u`.
/// Disconnected results are discarded and rebuilt from `seed + 1`, `seed + 2`,
/// ... up to [`WS_MAX_ATTEMPTS`] seeds.
pub fn generate_ws(params: &GenParamsWS) -> Result<Graph> {
    params.validate()?;
    for attempt in 0..WS_MAX_ATTEMPTS {
        let g = ws_once(params, params.seed.wrapping_add(attempt as u64))?;
        if is_connected(&g) {
            return Ok(g);
        }
    }
    Err(Error::Disconnected {
        attempts: WS_MAX_ATTEMPTS,
    })
}

fn ws_once(params: &GenParamsWS, seed: u64) -> Result<Graph> {
    let GenParamsWS { n, k, p, .. } = *params;
    let mut rng = rng_from_seed(seed);
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for u in 0..n {
        for j in 1..=k / 2 {
            let v = (u + j) % n;
            adj[u].insert(v);
            adj[v].insert(u);
        }
    }
    for j in 1..=k / 2 {
        for u in 0..n {
            if rng.random::<f64>() >= p {
                continue;
            }
            if adj[u].len() >= n - 1 {
                continue;
            }
            let v = (u + j) % n;
            let w = loop {
                let w = rng.random_range(0..n);
                if w != u && !adj[u].contains(&w) {
                    break w;
                }
            };
            adj[u].remove(&v);
            adj[v].remove(&u);
            adj[u].insert(w);
            adj[w].insert(u);
        }
    }
    let edges: Vec<_> = adj
        .iter()
        .enumerate()
        .flat_map(|(u, set)| set.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
        .collect();
    Graph::from_edges(n, &edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn assert_simple(g: &Graph) {
        for v in 0..g.node_count() {
            let nb = g.neighbors(v);
            assert!(!nb.contains(&v), "self-loop at {v}");
            assert!(nb.windows(2).all(|w| w[0] < w[1]), "duplicate at {v}");
            for &w in nb {
                assert!(g.has_edge(w, v), "asymmetric {v}-{w}");
            }
        }
    }

    #[test]
    fn ba_single_arrival_links_all_seeds() {
        let g = generate_ba(&GenParamsBA { n: 5, m: 4, seed: 1 }).unwrap();
        assert_eq!(g.edge_count(), 4);
        assert_eq!(g.neighbors(4), &[0, 1, 2, 3]);
    }

    #[test]
    fn ba_edge_count() {
        let g = generate_ba(&GenParamsBA { n: 3000, m: 4, seed: 9 }).unwrap();
        assert_eq!(g.edge_count(), 11984);
        assert_simple(&g);
        assert!(is_connected(&g));
    }

    #[test]
    fn ba_seed_changes_edges_not_count() {
        let a = generate_ba(&GenParamsBA { n: 1000, m: 4, seed: 1 }).unwrap();
        let b = generate_ba(&GenParamsBA { n: 1000, m: 4, seed: 2 }).unwrap();
        assert_ne!(a, b);
        assert_eq!(a.edge_count(), b.edge_count());
        assert_eq!(a, generate_ba(&GenParamsBA { n: 1000, m: 4, seed: 1 }).unwrap());
    }

    #[test]
    fn ba_rejects_bad_params() {
        assert!(generate_ba(&GenParamsBA { n: 4, m: 4, seed: 0 }).is_err());
        assert!(generate_ba(&GenParamsBA { n: 4, m: 0, seed: 0 }).is_err());
    }

    #[test]
    fn ws_without_rewiring_is_the_lattice() {
        let g = generate_ws(&GenParamsWS { n: 10, k: 4, p: 0.0, seed: 3 }).unwrap();
        assert_eq!(g.edge_count(), 20);
        for v in 0..10 {
            assert_eq!(g.degree(v), 4);
            assert!(g.has_edge(v, (v + 1) % 10) && g.has_edge(v, (v + 2) % 10));
        }
    }

    #[test]
    fn ws_full_scale_edge_count() {
        let g = generate_ws(&GenParamsWS { n: 3000, k: 8, p: 0.3, seed: 5 }).unwrap();
        assert_eq!(g.edge_count(), 12000);
        assert_simple(&g);
        assert!(is_connected(&g));
    }

    #[test]
    fn ws_full_rewiring_stays_simple() {
        for seed in 0..50 {
            let g = generate_ws(&GenParamsWS { n: 6, k: 2, p: 1.0, seed }).unwrap();
            assert_eq!(g.edge_count(), 6);
            assert_simple(&g);
        }
    }

    #[test]
    fn ws_rejects_bad_params() {
        for (n, k, p) in [(10, 3, 0.1), (10, 0, 0.1), (10, 10, 0.1), (10, 4, 1.5), (10, 4, -0.1)] {
            assert!(generate_ws(&GenParamsWS { n, k, p, seed: 0 }).is_err());
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn generators_produce_simple_graphs(n in 8usize..60, m in 1usize..5, half_k in 1usize..4, p in 0.0f64..=1.0, seed: u64) {
            let m = m.min(n - 1);
            let ba = generate_ba(&GenParamsBA { n, m, seed }).unwrap();
            assert_simple(&ba);
            prop_assert_eq!(ba.edge_count(), m * (n - m));
            prop_assert_eq!(&ba, &generate_ba(&GenParamsBA { n, m, seed }).unwrap());

            let k = 2 * half_k;
            match generate_ws(&GenParamsWS { n, k, p, seed }) {
                Ok(ws) => {
                    assert_simple(&ws);
                    prop_assert_eq!(ws.edge_count(), n * k / 2);
                    prop_assert!(is_connected(&ws));
                    prop_assert_eq!(&ws, &generate_ws(&GenParamsWS { n, k, p, seed }).unwrap());
                }
                Err(Error::Disconnected { .. }) => prop_assert!(p > 0.0),
                Err(e) => return Err(TestCaseError::fail(e.to_string())),
            }
        }
    }
}
