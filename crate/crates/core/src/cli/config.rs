use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{KdmError, Result};
use crate::kernels::KernelSpec;
use crate::training::{Loss, TrainConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Density,
    Classify,
    Regress,
    Llp,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelKind {
    Rbf,
    Cosine,
}

impl KernelKind {
    /// Kernel of the given dimension. The rbf bandwidth is a placeholder;
    /// training sets it from `sigma_init`.
    pub fn spec(self, dim: usize) -> Result<KernelSpec> {
        match self {
            KernelKind::Rbf => KernelSpec::rbf(dim, 1.0),
            KernelKind::Cosine => KernelSpec::cosine(dim),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitMethod {
    /// Gradient training of `num_components` components.
    #[default]
    Gradient,
    /// One uniformly weighted component per training row.
    Nonparametric,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BagConfig {
    pub bag_size: usize,
    pub lp_range: (f64, f64),
    /// Defaults to rows / bag_size.
    #[serde(default)]
    pub n_bags: Option<usize>,
    /// Read bags from this JSON-lines file instead of building them.
    #[serde(default)]
    pub file: Option<PathBuf>,
    /// Hold out this fraction of bags and keep the epoch with the lowest
    /// held-out bag loss.
    #[serde(default)]
    pub validation_fraction: Option<f64>,
    #[serde(default)]
    pub patience: Option<usize>,
}

/// Configuration of `kdm fit`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub task: Task,
    pub data: PathBuf,
    /// Tabular schema; density tasks without one read a numeric matrix.
    #[serde(default)]
    pub schema: Option<PathBuf>,
    #[serde(default = "default_x_kernel")]
    pub x_kernel: KernelKind,
    /// Defaults to cosine for classify and llp, rbf for regress. A density
    /// task with a y kernel fits the joint density of features and labels.
    #[serde(default)]
    pub y_kernel: Option<KernelKind>,
    #[serde(default)]
    pub method: FitMethod,
    /// Defaults to cross-entropy for classify, mse for regress.
    #[serde(default)]
    pub loss: Option<Loss>,
    #[serde(default)]
    pub train: TrainConfig,
    /// Standardize numeric features with training statistics.
    #[serde(default)]
    pub standardize: bool,
    #[serde(default)]
    pub bags: Option<BagConfig>,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

fn default_x_kernel() -> KernelKind {
    KernelKind::Rbf
}

/// Reads a JSON config; relative paths inside resolve against its directory.
pub(crate) fn read_config<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| KdmError::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    Ok(serde_json::from_str(&text)?)
}

pub(crate) fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let mut cfg: Self = read_config(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.data = resolve(base, &cfg.data);
        cfg.schema = cfg.schema.map(|s| resolve(base, &s));
        if let Some(b) = cfg.bags.as_mut() {
            b.file = b.file.take().map(|f| resolve(base, &f));
        }
        cfg.out = cfg.out.map(|o| resolve(base, &o));
        Ok(cfg)
    }

    pub fn y_kernel(&self) -> Option<KernelKind> {
        match self.task {
            Task::Density => self.y_kernel,
            Task::Classify | Task::Llp => Some(self.y_kernel.unwrap_or(KernelKind::Cosine)),
            Task::Regress => Some(self.y_kernel.unwrap_or(KernelKind::Rbf)),
        }
    }

    pub fn loss(&self) -> Loss {
        self.loss.unwrap_or(match self.task {
            Task::Regress => Loss::Mse,
            _ => Loss::CrossEntropy,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.train.validate()?;
        let need_schema = !matches!(self.task, Task::Density) || self.y_kernel.is_some();
        if need_schema && self.schema.is_none() {
            return Err(KdmError::InvalidConfig(format!(
                "task {:?} needs a schema",
                self.task
            )));
        }
        match (self.task, &self.bags) {
            (Task::Llp, None) => {
                return Err(KdmError::InvalidConfig("task llp needs bags".into()))
            }
            (Task::Llp, Some(b)) => {
                if b.bag_size == 0 {
                    return Err(KdmError::InvalidConfig("bag_size must be positive".into()));
                }
                if let Some(f) = b.validation_fraction {
                    if !(0.0 < f && f < 1.0) {
                        return Err(KdmError::InvalidConfig(format!(
                            "validation_fraction {f} is not in (0, 1)"
                        )));
                    }
                }
            }
            (_, Some(_)) => {
                return Err(KdmError::InvalidConfig("bags are only used by task llp".into()))
            }
            _ => {}
        }
        if self.method == FitMethod::Nonparametric && self.task != Task::Density {
            return Err(KdmError::InvalidConfig(
                "the nonparametric method is only available for density tasks".into(),
            ));
        }
        if self.task == Task::Classify && self.loss() == Loss::CrossEntropy
            && self.y_kernel() != Some(KernelKind::Cosine)
        {
            return Err(KdmError::InvalidConfig(
                "cross-entropy needs a cosine y kernel".into(),
            ));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form. The output directory is left
    /// out so reruns into different directories share a fingerprint.
    pub fn fingerprint(&self) -> String {
        let keyed = ExperimentConfig { out: None, ..self.clone() };
        let bytes = serde_json::to_vec(&keyed).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> ExperimentConfig {
        serde_json::from_str(r#"{"task":"classify","data":"d.csv","schema":"s.json"}"#).unwrap()
    }

    #[test]
    fn defaults_by_task() {
        let c = base();
        assert_eq!(c.y_kernel(), Some(KernelKind::Cosine));
        assert_eq!(c.loss(), Loss::CrossEntropy);
        assert_eq!(c.x_kernel, KernelKind::Rbf);
        c.validate().unwrap();
        let r = ExperimentConfig { task: Task::Regress, ..c };
        assert_eq!((r.y_kernel(), r.loss()), (Some(KernelKind::Rbf), Loss::Mse));
    }

    #[test]
    fn fingerprint_tracks_every_field() {
        let c = base();
        assert_eq!(c.fingerprint(), base().fingerprint());
        assert_eq!(c.fingerprint().len(), 64);
        let variants = [
            ExperimentConfig { standardize: true, ..base() },
            ExperimentConfig { x_kernel: KernelKind::Cosine, ..base() },
            ExperimentConfig { data: "e.csv".into(), ..base() },
            ExperimentConfig {
                train: TrainConfig { seed: 1, ..TrainConfig::default() },
                ..base()
            },
            ExperimentConfig {
                train: TrainConfig { learning_rate: 1.0000000000000002e-3, ..TrainConfig::default() },
                ..base()
            },
        ];
        let mut seen = vec![c.fingerprint()];
        for v in &variants {
            let f = v.fingerprint();
            assert!(!seen.contains(&f));
            seen.push(f);
        }
        let moved = ExperimentConfig { out: Some("o".into()), ..base() };
        assert_eq!(moved.fingerprint(), c.fingerprint());
    }

    #[test]
    fn validation_errors() {
        let no_schema = ExperimentConfig { schema: None, ..base() };
        assert!(matches!(no_schema.validate(), Err(KdmError::InvalidConfig(_))));
        let llp = ExperimentConfig { task: Task::Llp, ..base() };
        assert!(llp.validate().is_err());
        let np = ExperimentConfig { method: FitMethod::Nonparametric, ..base() };
        assert!(np.validate().is_err());
        assert!(serde_json::from_str::<ExperimentConfig>(
            r#"{"task":"density","data":"d.csv","typo":1}"#
        )
        .is_err());
    }

    #[test]
    fn relative_paths_resolve_against_config_dir() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        std::fs::write(&p, r#"{"task":"density","data":"x.csv","out":"/abs/o"}"#).unwrap();
        let c = ExperimentConfig::from_path(&p).unwrap();
        assert_eq!(c.data, dir.path().join("x.csv"));
        assert_eq!(c.out, Some(PathBuf::from("/abs/o")));
    }
}
