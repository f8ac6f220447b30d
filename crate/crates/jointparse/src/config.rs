//! Run configuration: one JSON document with `data`, `model`, `train` and
//! `eval` sections. Unknown keys anywhere are rejected; missing keys take
//! their defaults.

use std::path::PathBuf;

use jointparse_core::model::ModelConfig;
use jointparse_core::train::TrainConfig;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub data: DataConfig,
    pub model: ModelConfig,
    pub train: TrainConfig,
    pub eval: EvalConfig,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataConfig {
    /// Joint treebank used when none is given on the command line.
    pub treebank: Option<PathBuf>,
    /// Keep only the first `limit` documents.
    pub limit: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalConfig {
    /// Worker threads for dev evaluation; all cores when absent.
    pub jobs: Option<usize>,
    /// Write a checkpoint after every epoch, not only the best one.
    pub keep_epochs: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            jobs: None,
            keep_epochs: true,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("invalid config: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid config: {0}")]
    Value(String),
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks everything that does not depend on the treebank.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |msg: &str| Err(ConfigError::Value(msg.to_string()));
        let m = self.model;
        if m.word_dim == 0 || m.lstm_dim == 0 || m.hidden_dim == 0 {
            return bad("model dimensions must be positive");
        }
        let t = &self.train;
        if !(0.0..=1.0).contains(&t.beta) {
            return bad("train.beta must lie in [0, 1]");
        }
        if !(0.0..1.0).contains(&t.dropout) {
            return bad("train.dropout must lie in [0, 1)");
        }
        if !(0.0..=1.0).contains(&t.unk_replace) {
            return bad("train.unk_replace must lie in [0, 1]");
        }
        let o = t.optimizer;
        if o.learning_rate.is_nan() || o.learning_rate <= 0.0 || !(0.0..1.0).contains(&o.beta1) || !(0.0..1.0).contains(&o.beta2) {
            return bad("train.optimizer needs learning_rate > 0 and betas in [0, 1)");
        }
        if o.clip_norm.is_some_and(|c| c.is_nan() || c <= 0.0) {
            return bad("train.optimizer.clip_norm must be positive");
        }
        if self.eval.jobs == Some(0) {
            return bad("eval.jobs must be positive");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use jointparse_core::train::TrainMode;

    #[test]
    fn defaults_and_partial_sections() {
        let c = RunConfig::from_json("{}").unwrap();
        assert_eq!(c, RunConfig::default());
        let c = RunConfig::from_json(r#"{"train": {"beta": 1.0, "mode": "gold-edus", "optimizer": {"learning_rate": 0.01}}, "model": {"lstm_dim": 8}}"#).unwrap();
        assert_eq!(c.train.beta, 1.0);
        assert_eq!(c.train.mode, TrainMode::GoldEdus);
        assert_eq!(c.train.optimizer.learning_rate, 0.01);
        assert_eq!(c.train.optimizer.clip_norm, Some(5.0));
        assert_eq!(c.model.lstm_dim, 8);
        assert_eq!(c.model.word_dim, 50);
        assert!(c.eval.keep_epochs);
    }

    #[test]
    fn unknown_keys_rejected() {
        for text in [
            r#"{"extra": 1}"#,
            r#"{"train": {"betta": 0.5}}"#,
            r#"{"train": {"optimizer": {"lr": 0.5}}}"#,
            r#"{"model": {"dims": 3}}"#,
            r#"{"data": {"path": "x"}}"#,
        ] {
            assert!(matches!(RunConfig::from_json(text), Err(ConfigError::Json(_))), "{text}");
        }
    }

    #[test]
    fn values_checked() {
        for text in [
            r#"{"train": {"beta": 1.5}}"#,
            r#"{"train": {"dropout": 1.0}}"#,
            r#"{"model": {"word_dim": 0}}"#,
            r#"{"train": {"optimizer": {"learning_rate": -1}}}"#,
            r#"{"eval": {"jobs": 0}}"#,
        ] {
            assert!(matches!(RunConfig::from_json(text), Err(ConfigError::Value(_))), "{text}");
        }
    }
}
