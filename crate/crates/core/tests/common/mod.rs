//! Slow, obviously-correct reference implementations shared by the
//! integration tests and the acceptance harness.
#![allow(dead_code)]

use asymdetect::epidemic::SiState;
use asymdetect::features::{compute_features, normalize_features};
use asymdetect::gcn::{backward, forward, masked_bce, GcnInput, GcnModel, NormalizedAdjacency};
use asymdetect::graph::Graph;
use asymdetect::rng::{rng_from_seed, ChaCha8Rng};
use rand::seq::SliceRandom;
use rand::Rng;

pub const INF: u32 = u32::MAX;

/// Erdős–Rényi graph, possibly disconnected.
pub fn gnp(n: usize, p: f64, rng: &mut ChaCha8Rng) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, &edges).unwrap()
}

/// All-pairs hop distances by Floyd–Warshall.
pub fn floyd_warshall(g: &Graph) -> Vec<Vec<u32>> {
    let n = g.node_count();
    let mut d = vec![vec![INF; n]; n];
    for u in 0..n {
        d[u][u] = 0;
        for &v in g.neighbors(u) {
            d[u][v] = 1;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] != INF && d[k][j] != INF && d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d
}

/// Betweenness by explicitly listing every shortest path between each
/// unordered pair of endpoints (all nodes when `endpoints` is `None`).
pub fn brute_betweenness(g: &Graph, endpoints: Option<&[usize]>) -> Vec<f64> {
    let n = g.node_count();
    let d = floyd_warshall(g);
    let ends: Vec<usize> = match endpoints {
        Some(e) => e.to_vec(),
        None => (0..n).collect(),
    };
    let mut score = vec![0.0; n];
    for (a, &s) in ends.iter().enumerate() {
        for &t in &ends[a + 1..] {
            if d[s][t] == INF {
                continue;
            }
            let mut paths = Vec::new();
            let mut stack = vec![s];
            enumerate_paths(g, &d, t, &mut stack, &mut paths);
            let total = paths.len() as f64;
            let mut through = vec![0usize; n];
            for path in &paths {
                for &v in &path[1..path.len() - 1] {
                    through[v] += 1;
                }
            }
            for v in 0..n {
                score[v] += through[v] as f64 / total;
            }
        }
    }
    score
}

fn enumerate_paths(g: &Graph, d: &[Vec<u32>], t: usize, stack: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    let u = *stack.last().unwrap();
    if u == t {
        out.push(stack.clone());
        return;
    }
    for &w in g.neighbors(u) {
        if d[w][t] != INF && d[w][t] + 1 == d[u][t] {
            stack.push(w);
            enumerate_paths(g, d, t, stack, out);
            stack.pop();
        }
    }
}

/// Fraction of `trials` in which a susceptible node with `r` infected
/// neighbours becomes infected after one synchronous step.
pub fn one_step_infection_frequency(beta: f64, r: usize, trials: usize, seed: u64) -> f64 {
    let edges: Vec<_> = (1..=r).map(|i| (0, i)).collect();
    let g = Graph::from_edges(r + 1, &edges).unwrap();
    let infected: Vec<usize> = (1..=r).collect();
    let mut rng = rng_from_seed(seed);
    let mut hits = 0usize;
    for _ in 0..trials {
        let mut state = SiState::new(&g, &infected);
        assert_eq!(state.pressure(0), r as u32);
        state.step(beta, &mut rng);
        hits += state.is_infected(0) as usize;
    }
    hits as f64 / trials as f64
}

/// A random connected graph with `n` nodes, a random observed infected set,
/// normalized features, random labels on the unobserved nodes and a model
/// with nonzero biases.
pub struct GradCase {
    pub input: GcnInput,
    pub labels: Vec<f64>,
    pub mask: Vec<usize>,
    pub model: GcnModel,
}

pub fn grad_case(n: usize, hidden: usize, seed: u64) -> GradCase {
    let mut rng = rng_from_seed(seed);
    // Random spanning tree plus extra edges keeps the graph connected.
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut edges: Vec<(usize, usize)> = (1..n)
        .map(|i| (order[rng.random_range(0..i)], order[i]))
        .collect();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(0.2) && !edges.contains(&(u, v)) && !edges.contains(&(v, u)) {
                edges.push((u, v));
            }
        }
    }
    let g = Graph::from_edges(n, &edges).unwrap();
    let observed: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.4)).collect();
    let x = normalize_features(&compute_features(&g, &observed));
    let input = GcnInput::new(NormalizedAdjacency::from_graph(&g), &x).unwrap();
    let mut labels = vec![0.0; n];
    let mut mask = Vec::new();
    for v in 0..n {
        if observed.binary_search(&v).is_err() {
            mask.push(v);
            labels[v] = if rng.random_bool(0.5) { 1.0 } else { 0.0 };
        }
    }
    if mask.is_empty() {
        mask.push(0);
    }
    let mut model = GcnModel::glorot(x.as_slice().len() / n, hidden, rng.random());
    for b in &mut model.b1 {
        *b = rng.random_range(-0.5..0.5);
    }
    model.b2 = rng.random_range(-0.5..0.5);
    GradCase {
        input,
        labels,
        mask,
        model,
    }
}

pub fn loss_at(case: &GradCase, model: &GcnModel) -> f64 {
    let cache = forward(model, &case.input).unwrap();
    masked_bce(&cache.scores, &case.labels, &case.mask).unwrap()
}

/// Largest per-parameter relative error between the analytic gradient and
/// central differences with step `h`. Components where both gradients are
/// below `floor` in magnitude are compared against `floor`.
pub fn max_gradient_error(case: &GradCase, h: f64, floor: f64) -> f64 {
    let cache = forward(&case.model, &case.input).unwrap();
    let analytic = backward(&case.model, &case.input, &cache, &case.labels, &case.mask)
        .unwrap()
        .to_flat();
    let base = case.model.to_flat();
    let mut probe = case.model.clone();
    let mut worst = 0.0f64;
    for i in 0..base.len() {
        let mut params = base.clone();
        params[i] = base[i] + h;
        probe.set_flat(&params);
        let up = loss_at(case, &probe);
        params[i] = base[i] - h;
        probe.set_flat(&params);
        let down = loss_at(case, &probe);
        let numeric = (up - down) / (2.0 * h);
        let scale = analytic[i].abs().max(numeric.abs()).max(floor);
        worst = worst.max((analytic[i] - numeric).abs() / scale);
    }
    worst
}
