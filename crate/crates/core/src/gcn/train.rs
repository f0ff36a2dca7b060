use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{adam_step, batch_loss_and_grad, forward, AdamConfig, AdamState, GcnModel, GraphSample};
use crate::eval::auc;
use crate::features::FEATURE_COUNT;
use crate::rng::{derive_seed, rng_from_seed};
use crate::{Error, Result};

/// Training hyperparameters. [`Default`]: 1000 epochs, batch 128, hidden 128, lr 1e-3.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    /// Graphs per mini-batch.
    pub batch_size: usize,
    pub hidden: usize,
    /// Validation runs after every `validation_every`-th epoch (and after the
    /// last epoch when it is not a multiple).
    pub validation_every: usize,
    /// Share of the training instances held out for model selection.
    pub validation_fraction: f64,
    pub adam: AdamConfig,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 1000,
            batch_size: 128,
            hidden: 128,
            validation_every: 50,
            validation_fraction: 0.1,
            adam: AdamConfig::default(),
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = self.epochs > 0 && self.batch_size > 0 && self.hidden > 0 && self.validation_every > 0;
        let adam = self.adam.lr > 0.0
            && (0.0..1.0).contains(&self.adam.beta1)
            && (0.0..1.0).contains(&self.adam.beta2)
            && self.adam.eps > 0.0;
        if !positive || !adam {
            return Err(Error::invalid(format!("non-positive training hyperparameter in {self:?}")));
        }
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0) {
            return Err(Error::invalid(format!(
                "validation fraction {} outside (0, 1)",
                self.validation_fraction
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Validation {
    pub epoch: usize,
    /// Mean AUC over validation graphs with a defined AUC; `None` if none had one.
    pub auc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainHistory {
    /// Mean masked loss of every epoch, in order.
    pub epoch_loss: Vec<f64>,
    pub validations: Vec<Validation>,
    /// Epoch of the returned snapshot.
    pub best_epoch: usize,
    pub train_indices: Vec<usize>,
    pub validation_indices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub model: GcnModel,
    pub history: TrainHistory,
}

/// Mean AUC of `model` over the samples' masks, skipping single-class masks.
pub fn validation_auc(model: &GcnModel, samples: &[&GraphSample]) -> Result<Option<f64>> {
    let aucs: Vec<Option<f64>> = samples
        .par_iter()
        .map(|s| Ok(auc(&forward(model, &s.input)?.scores, &s.labels, &s.mask)))
        .collect::<Result<_>>()?;
    let defined: Vec<f64> = aucs.into_iter().flatten().collect();
    if defined.is_empty() {
        return Ok(None);
    }
    Ok(Some(defined.iter().sum::<f64>() / defined.len() as f64))
}

/// Splits off a validation set, trains with shuffled mini-batches and Adam,
/// and returns the snapshot with the best validation AUC (earliest on ties).
pub fn train(samples: &[GraphSample], cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    if samples.len() < 2 {
        return Err(Error::TooFewInstances(samples.len()));
    }
    let mut order: Vec<usize> = (0..samples.len()).collect();
    order.shuffle(&mut rng_from_seed(derive_seed(cfg.seed, "split", 0)));
    let n_val = ((cfg.validation_fraction * samples.len() as f64).round() as usize).clamp(1, samples.len() - 1);
    let mut validation_indices = order[..n_val].to_vec();
    let mut train_indices = order[n_val..].to_vec();
    validation_indices.sort_unstable();
    train_indices.sort_unstable();
    let validation: Vec<&GraphSample> = validation_indices.iter().map(|&i| &samples[i]).collect();

    let mut model = GcnModel::glorot(FEATURE_COUNT, cfg.hidden, derive_seed(cfg.seed, "init", 0));
    let mut state = AdamState::new(&model);
    let mut history = TrainHistory {
        train_indices: train_indices.clone(),
        validation_indices,
        ..Default::default()
    };
    let mut best: Option<(f64, GcnModel)> = None;

    let mut epoch_order = train_indices.clone();
    for epoch in 1..=cfg.epochs {
        epoch_order.shuffle(&mut rng_from_seed(derive_seed(cfg.seed, "shuffle", epoch as u64)));
        let mut loss_sum = 0.0;
        let mut weight_sum = 0usize;
        for chunk in epoch_order.chunks(cfg.batch_size) {
            let batch: Vec<&GraphSample> = chunk.iter().map(|&i| &samples[i]).collect();
            let masked: usize = batch.iter().map(|s| s.mask.len()).sum();
            if masked == 0 {
                continue;
            }
            let (loss, grad) = batch_loss_and_grad(&model, &batch)?;
            adam_step(&mut model, &grad, &mut state, &cfg.adam)?;
            loss_sum += loss * masked as f64;
            weight_sum += masked;
        }
        if !model.is_finite() {
            return Err(Error::Format(format!("non-finite parameters after epoch {epoch}")));
        }
        history.epoch_loss.push(if weight_sum > 0 { loss_sum / weight_sum as f64 } else { 0.0 });

        if epoch % cfg.validation_every == 0 || epoch == cfg.epochs {
            let score = validation_auc(&model, &validation)?;
            history.validations.push(Validation { epoch, auc: score });
            let value = score.unwrap_or(f64::NEG_INFINITY);
            if best.as_ref().is_none_or(|(b, _)| value > *b) {
                best = Some((value, model.clone()));
                history.best_epoch = epoch;
            }
        }
    }

    let (_, model) = best.expect("at least one validation pass");
    Ok(TrainOutcome { model, history })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureMatrix;
    use crate::gcn::{GcnInput, NormalizedAdjacency};
    use crate::graph::{generate_ws, GenParamsWS};
    use rand::Rng;

    /// Labels are a threshold of `A A X a`, which the network can represent
    /// exactly, so training should separate them.
    fn separable(count: usize, seed: u64) -> Vec<GraphSample> {
        let mut rng = rng_from_seed(seed);
        let direction: Vec<f64> = (0..FEATURE_COUNT).map(|_| rng.random_range(-1.0..1.0)).collect();
        (0..count)
            .map(|i| {
                let g = generate_ws(&GenParamsWS { n: 60, k: 4, p: 0.2, seed: seed + i as u64 }).unwrap();
                let data: Vec<f64> = (0..60 * FEATURE_COUNT).map(|_| rng.random_range(-1.5..1.5)).collect();
                let x = FeatureMatrix::from_rows(60, data, true).unwrap();
                let adj = NormalizedAdjacency::from_graph(&g);
                let input = GcnInput::new(adj.clone(), &x).unwrap();
                let proj: Vec<f64> = (0..60)
                    .map(|v| (0..FEATURE_COUNT).map(|k| input.propagated[v * FEATURE_COUNT + k] * direction[k]).sum())
                    .collect();
                let mut twice = vec![0.0; 60];
                adj.mul_vec(&proj, &mut twice);
                let mut sorted = twice.clone();
                sorted.sort_by(f64::total_cmp);
                let median = sorted[30];
                let labels = twice.iter().map(|&t| if t > median { 1.0 } else { 0.0 }).collect();
                GraphSample {
                    input,
                    labels,
                    mask: (0..60).collect(),
                }
            })
            .collect()
    }

    fn quick(epochs: usize) -> TrainConfig {
        TrainConfig {
            epochs,
            hidden: 16,
            validation_every: 25,
            adam: AdamConfig { lr: 1e-2, ..AdamConfig::default() },
            seed: 5,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn learns_a_separable_problem() {
        let data = separable(20, 1);
        let out = train(&data, &quick(400)).unwrap();
        let all: Vec<&GraphSample> = out.history.train_indices.iter().map(|&i| &data[i]).collect();
        let train_auc = validation_auc(&out.model, &all).unwrap().unwrap();
        assert!(train_auc > 0.99, "training AUC {train_auc}");
    }

    #[test]
    fn training_is_deterministic() {
        let data = separable(6, 2);
        let a = train(&data, &quick(30)).unwrap();
        let b = train(&data, &quick(30)).unwrap();
        assert_eq!(a, b);
        let bits = |h: &TrainHistory| h.epoch_loss.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a.history), bits(&b.history));
    }

    #[test]
    fn selection_picks_earliest_maximum() {
        let data = separable(8, 3);
        let out = train(&data, &quick(100)).unwrap();
        let h = &out.history;
        assert_eq!(h.validations.iter().map(|v| v.epoch).collect::<Vec<_>>(), vec![25, 50, 75, 100]);
        let best = h
            .validations
            .iter()
            .map(|v| v.auc.unwrap_or(f64::NEG_INFINITY))
            .fold(f64::NEG_INFINITY, f64::max);
        let first = h.validations.iter().find(|v| v.auc.unwrap_or(f64::NEG_INFINITY) == best).unwrap();
        assert_eq!(h.best_epoch, first.epoch);
        let val: Vec<&GraphSample> = h.validation_indices.iter().map(|&i| &data[i]).collect();
        assert_eq!(validation_auc(&out.model, &val).unwrap().unwrap(), best);
    }

    #[test]
    fn loss_falls_early() {
        let data = separable(10, 4);
        let cfg = TrainConfig {
            adam: AdamConfig::default(),
            ..quick(50)
        };
        let out = train(&data, &cfg).unwrap();
        let loss = &out.history.epoch_loss;
        let avg: Vec<f64> = loss.windows(10).map(|w| w.iter().sum::<f64>() / 10.0).collect();
        assert!(avg.windows(2).all(|w| w[1] <= w[0]), "{avg:?}");
    }

    #[test]
    fn rejects_tiny_datasets_and_bad_config() {
        let data = separable(2, 5);
        assert!(matches!(train(&data[..1], &quick(5)), Err(Error::TooFewInstances(1))));
        let bad = TrainConfig {
            validation_fraction: 1.0,
            ..quick(5)
        };
        assert!(train(&data, &bad).is_err());
    }
}
