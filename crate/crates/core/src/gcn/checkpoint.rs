//! Versioned JSON checkpoints.
//!
//! Top-level fields, in serialization order: `format`, `version`,
//! `feature_names`, `input_dim`, `hidden`, `w1` (row-major
//! `input_dim x hidden`), `b1`, `w2`, `b2`, `config`, `history`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{GcnModel, TrainConfig, TrainHistory};
use crate::features::FEATURE_NAMES;
use crate::{Error, Result};

pub const CHECKPOINT_FORMAT: &str = "asymdetect-gcn";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub feature_names: Vec<String>,
    #[serde(flatten)]
    pub model: GcnModel,
    pub config: TrainConfig,
    pub history: TrainHistory,
}

impl Checkpoint {
    pub fn new(model: GcnModel, config: TrainConfig, history: TrainHistory) -> Self {
        Checkpoint {
            format: CHECKPOINT_FORMAT.to_string(),
            version: CHECKPOINT_VERSION,
            feature_names: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
            model,
            config,
            history,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let ckpt: Checkpoint = serde_json::from_str(text).map_err(|e| Error::Format(format!("checkpoint: {e}")))?;
        ckpt.check()?;
        Ok(ckpt)
    }

    /// Verifies format, version, shapes and that the features match the ones
    /// this build computes.
    pub fn check(&self) -> Result<()> {
        if self.format != CHECKPOINT_FORMAT {
            return Err(Error::Format(format!("not a checkpoint (format {:?})", self.format)));
        }
        if self.version != CHECKPOINT_VERSION {
            return Err(Error::SchemaVersion {
                found: self.version,
                expected: CHECKPOINT_VERSION,
            });
        }
        if self.feature_names != FEATURE_NAMES {
            return Err(Error::FeatureSchema(format!(
                "checkpoint features {:?} differ from {:?}",
                self.feature_names, FEATURE_NAMES
            )));
        }
        let m = &self.model;
        if m.input_dim != FEATURE_NAMES.len()
            || m.w1.len() != m.input_dim * m.hidden
            || m.b1.len() != m.hidden
            || m.w2.len() != m.hidden
        {
            return Err(Error::ShapeMismatch("checkpoint parameter shapes are inconsistent".into()));
        }
        if !m.is_finite() {
            return Err(Error::Format("checkpoint holds non-finite parameters".into()));
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()? + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Checkpoint {
        Checkpoint::new(GcnModel::glorot(8, 4, 2), TrainConfig::default(), TrainHistory::default())
    }

    #[test]
    fn round_trips_exactly() {
        let c = sample();
        let back = Checkpoint::from_json(&c.to_json().unwrap()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_json().unwrap(), c.to_json().unwrap());
    }

    #[test]
    fn rejects_foreign_feature_schema() {
        let mut c = sample();
        c.feature_names[7] = "pagerank".into();
        let err = Checkpoint::from_json(&c.to_json().unwrap()).unwrap_err();
        assert!(matches!(err, Error::FeatureSchema(_)));
    }

    #[test]
    fn rejects_other_versions_and_shapes() {
        let mut c = sample();
        c.version = 9;
        assert!(matches!(Checkpoint::from_json(&c.to_json().unwrap()), Err(Error::SchemaVersion { .. })));
        let mut c = sample();
        c.model.w2.pop();
        assert!(matches!(Checkpoint::from_json(&c.to_json().unwrap()), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn field_order_is_stable() {
        let text = sample().to_json().unwrap();
        let keys = ["\"format\"", "\"version\"", "\"feature_names\"", "\"input_dim\"", "\"hidden\"", "\"w1\"", "\"b1\"", "\"w2\"", "\"b2\"", "\"config\"", "\"history\""];
        let pos: Vec<usize> = keys.iter().map(|k| text.find(k).unwrap()).collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]));
    }
}
