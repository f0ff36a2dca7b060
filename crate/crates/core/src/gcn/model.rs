use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::NormalizedAdjacency;
use crate::epidemic::EpidemicInstance;
use crate::features::{compute_features, normalize_features, FeatureMatrix, FEATURE_COUNT};
use crate::rng::rng_from_seed;
use crate::{Error, Result};

/// Probabilities are clamped to `[PROB_CLAMP, 1 - PROB_CLAMP]` inside the log.
pub const PROB_CLAMP: f64 = 1e-7;

/// Parameters of the two-layer network. The same shape doubles as the
/// gradient container and as the Adam moment buffers.
///
/// `w1` is row-major `input_dim x hidden`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GcnModel {
    pub input_dim: usize,
    pub hidden: usize,
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
}

impl GcnModel {
    pub fn zeros(input_dim: usize, hidden: usize) -> Self {
        GcnModel {
            input_dim,
            hidden,
            w1: vec![0.0; input_dim * hidden],
            b1: vec![0.0; hidden],
            w2: vec![0.0; hidden],
            b2: 0.0,
        }
    }

    /// Glorot-uniform weights and zero biases.
    pub fn glorot(input_dim: usize, hidden: usize, seed: u64) -> Self {
        let mut rng = rng_from_seed(seed);
        let mut m = Self::zeros(input_dim, hidden);
        let a1 = (6.0 / (input_dim + hidden) as f64).sqrt();
        for w in &mut m.w1 {
            *w = rng.random_range(-a1..a1);
        }
        let a2 = (6.0 / (hidden + 1) as f64).sqrt();
        for w in &mut m.w2 {
            *w = rng.random_range(-a2..a2);
        }
        m
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.input_dim, self.hidden)
    }

    pub fn param_count(&self) -> usize {
        self.w1.len() + self.b1.len() + self.w2.len() + 1
    }

    /// Parameters in `w1, b1, w2, b2` order.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        out.extend_from_slice(&self.w1);
        out.extend_from_slice(&self.b1);
        out.extend_from_slice(&self.w2);
        out.push(self.b2);
        out
    }

    pub fn set_flat(&mut self, flat: &[f64]) {
        assert_eq!(flat.len(), self.param_count());
        let (w1, rest) = flat.split_at(self.w1.len());
        let (b1, rest) = rest.split_at(self.b1.len());
        let (w2, rest) = rest.split_at(self.w2.len());
        self.w1.copy_from_slice(w1);
        self.b1.copy_from_slice(b1);
        self.w2.copy_from_slice(w2);
        self.b2 = rest[0];
    }

    /// Mutable views of every parameter block, `b2` last.
    pub fn blocks_mut(&mut self) -> [&mut [f64]; 4] {
        [
            &mut self.w1,
            &mut self.b1,
            &mut self.w2,
            std::slice::from_mut(&mut self.b2),
        ]
    }

    pub fn blocks(&self) -> [&[f64]; 4] {
        [&self.w1, &self.b1, &self.w2, std::slice::from_ref(&self.b2)]
    }

    pub fn is_finite(&self) -> bool {
        self.blocks().iter().all(|b| b.iter().all(|x| x.is_finite()))
    }

    /// `self += other`, blockwise.
    pub fn add_assign(&mut self, other: &GcnModel) {
        for (dst, src) in self.blocks_mut().into_iter().zip(other.blocks()) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d += s;
            }
        }
    }
}

/// Network input for one graph: the adjacency and the once-propagated
/// features `A X` (row-major `n x input_dim`). The first layer only ever
/// sees `A X`, so it is computed up front.
#[derive(Debug, Clone, PartialEq)]
pub struct GcnInput {
    pub adj: NormalizedAdjacency,
    pub propagated: Vec<f64>,
    pub input_dim: usize,
}

impl GcnInput {
    pub fn new(adj: NormalizedAdjacency, x: &FeatureMatrix) -> Result<Self> {
        if x.rows() != adj.n() {
            return Err(Error::ShapeMismatch(format!(
                "{} feature rows for {} nodes",
                x.rows(),
                adj.n()
            )));
        }
        let propagated = adj.mul_dense(x.as_slice(), FEATURE_COUNT);
        Ok(GcnInput {
            adj,
            propagated,
            input_dim: FEATURE_COUNT,
        })
    }

    pub fn n(&self) -> usize {
        self.adj.n()
    }
}

/// A training or validation graph: network input, per-node labels and the
/// nodes the loss and metrics are restricted to.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphSample {
    pub input: GcnInput,
    pub labels: Vec<f64>,
    /// Ascending node ids.
    pub mask: Vec<usize>,
}

impl GraphSample {
    /// Features, labels (asymptomatic = 1) and the evaluation pool of an
    /// epidemic snapshot.
    pub fn from_instance(inst: &EpidemicInstance) -> Result<Self> {
        let x = normalize_features(&compute_features(&inst.graph, &inst.observed));
        Self::from_parts(inst, &x)
    }

    /// As [`GraphSample::from_instance`] with precomputed normalized features.
    pub fn from_parts(inst: &EpidemicInstance, normalized: &FeatureMatrix) -> Result<Self> {
        let input = GcnInput::new(NormalizedAdjacency::from_graph(&inst.graph), normalized)?;
        Ok(GraphSample {
            input,
            labels: inst.labels(),
            mask: inst.pool(),
        })
    }
}

/// Intermediate values of a forward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// `A X W1 + b1`, row-major `n x hidden`.
    pub hidden_pre: Vec<f64>,
    /// `relu(hidden_pre) · w2`.
    pub projected: Vec<f64>,
    /// Output logits `A · projected + b2`.
    pub logits: Vec<f64>,
    pub scores: Vec<f64>,
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn check_dims(model: &GcnModel, input: &GcnInput) -> Result<()> {
    if model.input_dim != input.input_dim {
        return Err(Error::ShapeMismatch(format!(
            "model expects {} input features, got {}",
            model.input_dim, input.input_dim
        )));
    }
    Ok(())
}

pub fn forward(model: &GcnModel, input: &GcnInput) -> Result<ForwardCache> {
    check_dims(model, input)?;
    let n = input.n();
    let (d, h) = (model.input_dim, model.hidden);
    let mut hidden_pre = vec![0.0; n * h];
    let mut projected = vec![0.0; n];
    for i in 0..n {
        let row = &mut hidden_pre[i * h..(i + 1) * h];
        row.copy_from_slice(&model.b1);
        for (k, &p) in input.propagated[i * d..(i + 1) * d].iter().enumerate() {
            if p != 0.0 {
                for (r, w) in row.iter_mut().zip(&model.w1[k * h..(k + 1) * h]) {
                    *r += p * w;
                }
            }
        }
        projected[i] = row.iter().zip(&model.w2).map(|(&r, w)| r.max(0.0) * w).sum();
    }
    let mut logits = vec![0.0; n];
    input.adj.mul_vec(&projected, &mut logits);
    for l in &mut logits {
        *l += model.b2;
    }
    let scores = logits.iter().map(|&l| sigmoid(l)).collect();
    Ok(ForwardCache {
        hidden_pre,
        projected,
        logits,
        scores,
    })
}

/// Mean binary cross-entropy over the `mask` nodes.
pub fn masked_bce(scores: &[f64], labels: &[f64], mask: &[usize]) -> Result<f64> {
    if mask.is_empty() {
        return Err(Error::EmptyMask);
    }
    Ok(bce_sum(scores, labels, mask) / mask.len() as f64)
}

fn bce_sum(scores: &[f64], labels: &[f64], mask: &[usize]) -> f64 {
    mask.iter()
        .map(|&i| {
            let s = scores[i].clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
            let y = labels[i];
            -(y * s.ln() + (1.0 - y) * (1.0 - s).ln())
        })
        .sum()
}

/// Gradient of [`masked_bce`] through [`forward`].
///
/// Uses `d loss / d logit = s - y` on masked nodes, which is exact wherever
/// the probability clamp is inactive.
pub fn backward(
    model: &GcnModel,
    input: &GcnInput,
    cache: &ForwardCache,
    labels: &[f64],
    mask: &[usize],
) -> Result<GcnModel> {
    if mask.is_empty() {
        return Err(Error::EmptyMask);
    }
    check_dims(model, input)?;
    Ok(backward_weighted(model, input, cache, labels, mask, 1.0 / mask.len() as f64))
}

/// Gradient of `weight * sum_{i in mask} bce_i`.
fn backward_weighted(
    model: &GcnModel,
    input: &GcnInput,
    cache: &ForwardCache,
    labels: &[f64],
    mask: &[usize],
    weight: f64,
) -> GcnModel {
    let n = input.n();
    let (d, h) = (model.input_dim, model.hidden);
    let mut grad = model.zeros_like();

    let mut d_logits = vec![0.0; n];
    for &i in mask {
        d_logits[i] = weight * (cache.scores[i] - labels[i]);
    }
    grad.b2 = mask.iter().map(|&i| d_logits[i]).sum();

    let mut d_projected = vec![0.0; n];
    input.adj.mul_vec(&d_logits, &mut d_projected);

    let mut d_hidden = vec![0.0; h];
    for i in 0..n {
        let dz = d_projected[i];
        if dz == 0.0 {
            continue;
        }
        let pre = &cache.hidden_pre[i * h..(i + 1) * h];
        for j in 0..h {
            let active = pre[j] > 0.0;
            grad.w2[j] += if active { pre[j] * dz } else { 0.0 };
            d_hidden[j] = if active { dz * model.w2[j] } else { 0.0 };
        }
        for (b, &g) in grad.b1.iter_mut().zip(&d_hidden) {
            *b += g;
        }
        for (k, &p) in input.propagated[i * d..(i + 1) * d].iter().enumerate() {
            if p != 0.0 {
                for (w, &g) in grad.w1[k * h..(k + 1) * h].iter_mut().zip(&d_hidden) {
                    *w += p * g;
                }
            }
        }
    }
    grad
}

/// Loss and gradient of a mini-batch of graphs: binary cross-entropy
/// averaged over every masked node in the batch. Graphs are processed in
/// parallel; per-graph results are summed in batch order so the outcome
/// does not depend on the thread count.
pub fn batch_loss_and_grad(model: &GcnModel, batch: &[&GraphSample]) -> Result<(f64, GcnModel)> {
    let total: usize = batch.iter().map(|s| s.mask.len()).sum();
    if total == 0 {
        return Err(Error::EmptyMask);
    }
    let weight = 1.0 / total as f64;
    let parts: Vec<(f64, GcnModel)> = batch
        .par_iter()
        .map(|s| -> Result<(f64, GcnModel)> {
            let cache = forward(model, &s.input)?;
            let loss = bce_sum(&cache.scores, &s.labels, &s.mask);
            let grad = backward_weighted(model, &s.input, &cache, &s.labels, &s.mask, weight);
            Ok((loss, grad))
        })
        .collect::<Result<_>>()?;
    let mut grad = model.zeros_like();
    let mut loss = 0.0;
    for (l, g) in &parts {
        loss += l;
        grad.add_assign(g);
    }
    Ok((loss * weight, grad))
}
