//! The eight per-node input features and their per-instance z-scoring.

use std::io::Write;

use crate::graph::{betweenness, observed_betweenness, Graph};
use crate::{Error, Result};

/// Column names, in matrix order.
pub const FEATURE_NAMES: [&str; 8] = [
    "infection_observation",
    "degree",
    "contact_1",
    "contact_2",
    "contact_3",
    "neighbourhood_contact_2",
    "betweenness",
    "observed_betweenness",
];

pub const FEATURE_COUNT: usize = FEATURE_NAMES.len();

/// Row-major `n x 8` feature matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    n: usize,
    data: Vec<f64>,
    normalized: bool,
}

impl FeatureMatrix {
    pub fn from_rows(n: usize, data: Vec<f64>, normalized: bool) -> Result<Self> {
        if data.len() != n * FEATURE_COUNT {
            return Err(Error::ShapeMismatch(format!(
                "{} values for {n} rows of {FEATURE_COUNT} features",
                data.len()
            )));
        }
        Ok(FeatureMatrix { n, data, normalized })
    }

    pub fn rows(&self) -> usize {
        self.n
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, v: usize) -> &[f64] {
        &self.data[v * FEATURE_COUNT..(v + 1) * FEATURE_COUNT]
    }

    pub fn get(&self, v: usize, col: usize) -> f64 {
        self.data[v * FEATURE_COUNT + col]
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.n).map(|v| self.get(v, col)).collect()
    }

    fn set_column(&mut self, col: usize, values: &[f64]) {
        for (v, &x) in values.iter().enumerate() {
            self.data[v * FEATURE_COUNT + col] = x;
        }
    }

    /// Copy with row `v` moved to row `perm[v]`.
    pub fn permute_rows(&self, perm: &[usize]) -> Self {
        let mut out = self.clone();
        for v in 0..self.n {
            out.data[perm[v] * FEATURE_COUNT..(perm[v] + 1) * FEATURE_COUNT].copy_from_slice(self.row(v));
        }
        out
    }

    /// CSV with a `node` column followed by the feature columns.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "node,{}", FEATURE_NAMES.join(","))?;
        for v in 0..self.n {
            write!(out, "{v}")?;
            for x in self.row(v) {
                write!(out, ",{x}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Observed and total node counts at exact distances 1, 2 and 3 from one
/// node (index 0 unused).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct RingCounts {
    total: [usize; 4],
    observed: [usize; 4],
}

impl RingCounts {
    fn contact(&self, k: usize) -> f64 {
        ratio(self.observed[k], self.total[k])
    }

    fn within_two(&self) -> f64 {
        ratio(self.observed[1] + self.observed[2], self.total[1] + self.total[2])
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Depth-3 BFS from every node, tallying ring sizes and observed members.
fn ring_counts(g: &Graph, observed: &[bool]) -> Vec<RingCounts> {
    let n = g.node_count();
    let mut stamp = vec![usize::MAX; n];
    let mut frontier = Vec::new();
    let mut next = Vec::new();
    (0..n)
        .map(|v| {
            let mut counts = RingCounts::default();
            frontier.clear();
            frontier.push(v);
            stamp[v] = v;
            for depth in 1..=3 {
                next.clear();
                for &u in &frontier {
                    for &w in g.neighbors(u) {
                        if stamp[w] != v {
                            stamp[w] = v;
                            next.push(w);
                            counts.total[depth] += 1;
                            counts.observed[depth] += observed[w] as usize;
                        }
                    }
                }
                std::mem::swap(&mut frontier, &mut next);
            }
            counts
        })
        .collect()
}

fn mask(n: usize, observed: &[usize]) -> Vec<bool> {
    let mut m = vec![false; n];
    for &v in observed {
        m[v] = true;
    }
    m
}

/// Fraction of the nodes at distance exactly `k` that are observed; 0 when
/// no node lies at that distance.
pub fn contact_k(g: &Graph, observed: &[usize], k: usize) -> Result<Vec<f64>> {
    if !(1..=3).contains(&k) {
        return Err(Error::invalid(format!("contact radius {k} not in 1..=3")));
    }
    let counts = ring_counts(g, &mask(g.node_count(), observed));
    Ok(counts.iter().map(|c| c.contact(k)).collect())
}

/// Fraction of the nodes within distance 2 (the node itself excluded) that
/// are observed; 0 for isolated nodes.
pub fn neighbourhood_contact_2(g: &Graph, observed: &[usize]) -> Vec<f64> {
    let counts = ring_counts(g, &mask(g.node_count(), observed));
    counts.iter().map(RingCounts::within_two).collect()
}

/// Raw (unnormalized) features in [`FEATURE_NAMES`] order.
pub fn compute_features(g: &Graph, observed: &[usize]) -> FeatureMatrix {
    let n = g.node_count();
    let obs = mask(n, observed);
    let rings = ring_counts(g, &obs);
    let between = betweenness(g).into_inner();
    let obs_between = observed_betweenness(g, observed).into_inner();
    let mut data = Vec::with_capacity(n * FEATURE_COUNT);
    for v in 0..n {
        let r = &rings[v];
        data.extend_from_slice(&[
            if obs[v] { 1.0 } else { 0.0 },
            g.degree(v) as f64,
            r.contact(1),
            r.contact(2),
            r.contact(3),
            r.within_two(),
            between[v],
            obs_between[v],
        ]);
    }
    FeatureMatrix {
        n,
        data,
        normalized: false,
    }
}

/// Z-scores every column except the observation flag using the population
/// mean and standard deviation over the instance's nodes. Constant columns
/// become all zeros. Already-normalized input is returned unchanged.
pub fn normalize_features(raw: &FeatureMatrix) -> FeatureMatrix {
    let mut out = raw.clone();
    if raw.normalized {
        return out;
    }
    out.normalized = true;
    if raw.n == 0 {
        return out;
    }
    for col in 1..FEATURE_COUNT {
        let values = raw.column(col);
        out.set_column(col, &zscore(&values));
    }
    out
}

fn zscore(values: &[f64]) -> Vec<f64> {
    let n = values.len() as f64;
    let first = values[0];
    if values.iter().all(|&x| x == first) {
        return vec![0.0; values.len()];
    }
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let std = var.sqrt();
    if std == 0.0 || !std.is_finite() {
        return vec![0.0; values.len()];
    }
    values.iter().map(|x| (x - mean) / std).collect()
}
