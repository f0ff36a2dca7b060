use serde::{Deserialize, Serialize};

use super::GcnModel;
use crate::{Error, Result};

/// Adam hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// First and second moment estimates plus the step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub first: GcnModel,
    pub second: GcnModel,
    pub step: u64,
}

impl AdamState {
    pub fn new(model: &GcnModel) -> Self {
        AdamState {
            first: model.zeros_like(),
            second: model.zeros_like(),
            step: 0,
        }
    }
}

/// One bias-corrected Adam update of `model` in place.
pub fn adam_step(model: &mut GcnModel, grads: &GcnModel, state: &mut AdamState, cfg: &AdamConfig) -> Result<()> {
    if grads.param_count() != model.param_count() || state.first.param_count() != model.param_count() {
        return Err(Error::ShapeMismatch("gradient or optimizer state does not match the model".into()));
    }
    state.step += 1;
    let t = state.step as i32;
    let correct1 = 1.0 - cfg.beta1.powi(t);
    let correct2 = 1.0 - cfg.beta2.powi(t);
    let params = model.blocks_mut();
    let firsts = state.first.blocks_mut();
    let seconds = state.second.blocks_mut();
    for (((p, g), m), v) in params.into_iter().zip(grads.blocks()).zip(firsts).zip(seconds) {
        for i in 0..p.len() {
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
            let m_hat = m[i] / correct1;
            let v_hat = v[i] / correct2;
            p[i] -= cfg.lr * m_hat / (v_hat.sqrt() + cfg.eps);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn filled(value: f64) -> GcnModel {
        let mut m = GcnModel::zeros(2, 3);
        let n = m.param_count();
        m.set_flat(&(0..n).map(|i| if i % 2 == 0 { value } else { -value * 0.5 }).collect::<Vec<_>>());
        m
    }

    #[test]
    fn first_step_moves_by_lr_against_the_sign() {
        let mut model = filled(1.0);
        let before = model.to_flat();
        let grads = filled(0.3);
        let mut state = AdamState::new(&model);
        let cfg = AdamConfig::default();
        adam_step(&mut model, &grads, &mut state, &cfg).unwrap();
        for ((a, b), g) in model.to_flat().iter().zip(&before).zip(grads.to_flat()) {
            let expected = -cfg.lr * g.signum();
            assert!((a - b - expected).abs() < 1e-10, "{} vs {}", a - b, expected);
        }
        assert_eq!(state.step, 1);
    }

    #[test]
    fn zero_gradient_leaves_parameters() {
        let mut model = filled(2.0);
        let before = model.clone();
        let mut state = AdamState::new(&model);
        let zero = model.zeros_like();
        adam_step(&mut model, &zero, &mut state, &AdamConfig::default()).unwrap();
        assert_eq!(model, before);
        assert_eq!(state.step, 1);
        assert!(state.second.to_flat().iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn constant_gradient_steps_approach_lr() {
        let mut model = filled(0.0);
        let grads = filled(0.05);
        let mut state = AdamState::new(&model);
        let cfg = AdamConfig::default();
        let mut last = model.to_flat();
        for _ in 0..2000 {
            adam_step(&mut model, &grads, &mut state, &cfg).unwrap();
            let now = model.to_flat();
            for (a, b) in now.iter().zip(&last) {
                assert!((a - b).abs() <= cfg.lr * (1.0 + 1e-6));
            }
            last = now;
        }
        let before = model.to_flat();
        adam_step(&mut model, &grads, &mut state, &cfg).unwrap();
        for (a, b) in model.to_flat().iter().zip(&before) {
            assert!(((a - b).abs() - cfg.lr).abs() < 1e-9);
        }
    }

    #[test]
    fn mismatched_shapes_are_rejected() {
        let mut model = GcnModel::zeros(2, 3);
        let mut state = AdamState::new(&model);
        let bad = GcnModel::zeros(2, 4);
        assert!(adam_step(&mut model, &bad, &mut state, &AdamConfig::default()).is_err());
    }
}
