use serde::{Deserialize, Serialize};

use crate::error::{KdmError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OptimizerKind {
    #[serde(rename = "sgd")]
    Sgd,
    #[serde(rename = "adaptive-moment", alias = "adam")]
    Adam,
}

/// How the RBF bandwidth is initialized before training.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SigmaInit {
    /// Median pairwise distance of up to 1000 subsampled rows, over √2.
    MedianHeuristic,
    Explicit(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub num_components: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub optimizer: OptimizerKind,
    pub seed: u64,
    pub sigma_init: SigmaInit,
    pub sigma_min: f64,
    pub train_y_components: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            num_components: 32,
            epochs: 100,
            batch_size: 64,
            learning_rate: 1e-3,
            optimizer: OptimizerKind::Adam,
            seed: 0,
            sigma_init: SigmaInit::MedianHeuristic,
            sigma_min: 1e-3,
            train_y_components: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(KdmError::InvalidConfig(what.to_string()));
        if self.num_components == 0 {
            return bad("num_components must be positive");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be positive");
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return bad("learning_rate must be positive");
        }
        if !(self.sigma_min.is_finite() && self.sigma_min > 0.0) {
            return bad("sigma_min must be positive");
        }
        if let SigmaInit::Explicit(s) = self.sigma_init {
            if !(s.is_finite() && s > 0.0) {
                return bad("explicit sigma must be positive");
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_defaults_and_enums() {
        let cfg: TrainConfig = serde_json::from_str(r#"{"epochs": 3}"#).unwrap();
        assert_eq!(cfg.epochs, 3);
        assert_eq!(cfg.optimizer, OptimizerKind::Adam);
        assert_eq!(cfg.sigma_init, SigmaInit::MedianHeuristic);
        let cfg: TrainConfig = serde_json::from_str(
            r#"{"optimizer": "sgd", "sigma_init": {"explicit": 0.5}}"#,
        )
        .unwrap();
        assert_eq!(cfg.optimizer, OptimizerKind::Sgd);
        assert_eq!(cfg.sigma_init, SigmaInit::Explicit(0.5));
        let s = serde_json::to_string(&TrainConfig::default()).unwrap();
        assert!(s.contains(r#""optimizer":"adaptive-moment""#));
        assert!(s.contains(r#""sigma_init":"median-heuristic""#));
        assert!(serde_json::from_str::<TrainConfig>(r#"{"epoch": 3}"#).is_err());
    }

    #[test]
    fn validation() {
        assert!(TrainConfig::default().validate().is_ok());
        let cfg = TrainConfig {
            learning_rate: 0.0,
            ..TrainConfig::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = TrainConfig {
            sigma_init: SigmaInit::Explicit(-1.0),
            ..TrainConfig::default()
        };
        assert!(cfg.validate().is_err());
    }
}
