//! Learning-from-label-proportions benchmark protocol.
//!
//! For every (bag size, proportion range) cell and repetition: draw `T`
//! training rows from the pooled data (the rest is test), standardize the
//! numeric features on the training rows, build `T / bag_size` bags and hold
//! out a fraction of them. Models are trained on the remaining bags and keep
//! the epoch with the lowest held-out bag cross-entropy. Hyperparameters are
//! picked by the same held-out loss; the score is instance-level test AUC.

use std::path::{Path, PathBuf};
use std::time::Instant;

use ndarray::{concatenate, Axis};
use serde::{Deserialize, Serialize};

use crate::data::{load_csv, make_bags, split, Standardizer, TabularSchema};
use crate::density::JointKDM;
use crate::error::{KdmError, Result};
use crate::inference::predict_pmf;
use crate::kernels::KernelSpec;
use crate::metrics::{auc, t_interval};
use crate::sampling::RngState;
use crate::training::{
    fit_llp_validated, objective_value, BagDataset, LabeledDataset, Loss, ModelParams, Objective,
    TrainConfig, WeightedInput,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub num_components: Vec<usize>,
    pub learning_rate: Vec<f64>,
    /// Floors on the rbf bandwidth; empty means the training config's.
    #[serde(default)]
    pub sigma_min: Vec<f64>,
}

/// One grid point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    pub num_components: usize,
    pub learning_rate: f64,
    pub sigma_min: f64,
}

impl HyperParams {
    fn apply(&self, base: &TrainConfig, seed: u64) -> TrainConfig {
        TrainConfig {
            num_components: self.num_components,
            learning_rate: self.learning_rate,
            sigma_min: self.sigma_min,
            seed,
            ..base.clone()
        }
    }
}

impl Grid {
    pub fn points(&self, base: &TrainConfig) -> Vec<HyperParams> {
        let floors = if self.sigma_min.is_empty() {
            vec![base.sigma_min]
        } else {
            self.sigma_min.clone()
        };
        let mut out = Vec::new();
        for &num_components in &self.num_components {
            for &learning_rate in &self.learning_rate {
                for &sigma_min in &floors {
                    out.push(HyperParams {
                        num_components,
                        learning_rate,
                        sigma_min,
                    });
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LlpBenchConfig {
    pub name: String,
    /// CSV files pooled into one dataset; categories are learned from the
    /// first.
    pub files: Vec<PathBuf>,
    pub schema: PathBuf,
    /// Training rows per repetition (`T`).
    pub train_size: usize,
    /// Cap on test rows per repetition; all remaining rows when absent.
    #[serde(default)]
    pub test_size: Option<usize>,
    pub bag_sizes: Vec<usize>,
    pub lp_ranges: Vec<(f64, f64)>,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub train: TrainConfig,
    pub grid: Grid,
    #[serde(default = "default_validation")]
    pub validation_fraction: f64,
    /// Early-stopping patience in epochs; train all epochs when absent.
    #[serde(default)]
    pub patience: Option<usize>,
    /// Tune on every repetition instead of only the first of each cell.
    #[serde(default)]
    pub tune_every_repetition: bool,
    /// Use only this many pooled rows (smoke runs).
    #[serde(default)]
    pub subsample: Option<usize>,
    #[serde(default = "default_confidence")]
    pub confidence: f64,
}

impl LlpBenchConfig {
    /// Reads a config; relative paths resolve against its directory.
    pub fn from_path(path: &Path) -> Result<Self> {
        let mut cfg: Self = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &Path| if p.is_absolute() { p.to_path_buf() } else { base.join(p) };
        cfg.files = cfg.files.iter().map(|f| resolve(f)).collect();
        cfg.schema = resolve(&cfg.schema);
        Ok(cfg)
    }
}

fn default_repetitions() -> usize {
    5
}

fn default_validation() -> f64 {
    0.1
}

fn default_confidence() -> f64 {
    0.99
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub dataset: String,
    pub bag_size: usize,
    pub lp_range: (f64, f64),
    pub repetitions: usize,
    pub aucs: Vec<f64>,
    pub mean_auc: f64,
    /// Half-width of the Student-t interval; absent for one repetition.
    pub ci_half_width: Option<f64>,
    pub confidence: f64,
    pub chosen: HyperParams,
    /// Best epoch of each repetition's model.
    pub best_epochs: Vec<usize>,
    pub wall_time: f64,
}

/// Pooled, encoded dataset plus the positions of its numeric features.
#[derive(Clone, Debug)]
pub struct Pool {
    pub data: LabeledDataset,
    pub numeric_columns: Vec<usize>,
}

pub fn load_pool(cfg: &LlpBenchConfig) -> Result<Pool> {
    let schema = TabularSchema::from_path(&cfg.schema)?;
    let (first, rest) = cfg
        .files
        .split_first()
        .ok_or_else(|| KdmError::InvalidConfig("no data files".into()))?;
    let table = load_csv(first, &schema)?;
    let mut xs = vec![table.data.x.clone()];
    let mut ys = vec![table.data.y.clone()];
    for f in rest {
        let t = table.encoder.load(f)?;
        xs.push(t.data.x);
        ys.push(t.data.y);
    }
    let xv: Vec<_> = xs.iter().map(|a| a.view()).collect();
    let yv: Vec<_> = ys.iter().map(|a| a.view()).collect();
    let mut data = LabeledDataset::new(
        concatenate(Axis(0), &xv).map_err(|e| KdmError::ShapeMismatch(e.to_string()))?,
        concatenate(Axis(0), &yv).map_err(|e| KdmError::ShapeMismatch(e.to_string()))?,
    )?;
    if let Some(n) = cfg.subsample {
        let s = split(data.len(), (1.0, 0.0, 0.0), cfg.seed)?;
        let mut idx = s.train;
        idx.truncate(n.min(data.len()));
        data = data.select(&idx);
    }
    Ok(Pool {
        data,
        numeric_columns: table.encoder.numeric_columns(),
    })
}

/// Train/test rows of one repetition, standardized on train.
pub fn repetition_split(
    pool: &Pool,
    train_size: usize,
    test_size: Option<usize>,
    seed: u64,
) -> Result<(LabeledDataset, LabeledDataset)> {
    let n = pool.data.len();
    if train_size >= n {
        return Err(KdmError::InvalidConfig(format!(
            "train size {train_size} leaves no test rows out of {n}"
        )));
    }
    let f = train_size as f64 / n as f64;
    let s = split(n, (f, 0.0, 1.0 - f), seed)?;
    let mut test_idx = s.test;
    if let Some(cap) = test_size {
        test_idx.truncate(cap);
    }
    let mut train = pool.data.select(&s.train);
    let mut test = pool.data.select(&test_idx);
    let st = Standardizer::fit(train.x.view(), &pool.numeric_columns)?;
    st.apply(&mut train.x);
    st.apply(&mut test.x);
    Ok((train, test))
}

fn kernels(dim: usize) -> Result<(KernelSpec, KernelSpec)> {
    // The rbf bandwidth is set by the training configuration.
    Ok((KernelSpec::rbf(dim, 1.0)?, KernelSpec::cosine(2)?))
}

fn subset(bags: &BagDataset, idx: &[usize]) -> Result<BagDataset> {
    BagDataset::new(
        idx.iter().map(|&i| bags.bags[i].clone()).collect(),
        bags.proportions.select(Axis(0), idx),
    )
}

/// Mean bag-level cross-entropy of a trained model.
pub fn bag_loss(joint: &JointKDM, bags: &BagDataset) -> Result<f64> {
    let params = ModelParams::from_joint(joint)?;
    let inputs: Vec<WeightedInput> = bags
        .bags
        .iter()
        .map(|b| WeightedInput {
            rows: b.clone(),
            weights: ndarray::Array1::from_elem(b.nrows(), 1.0 / b.nrows() as f64),
        })
        .collect();
    objective_value(
        &params,
        &Objective::Discriminative {
            inputs: &inputs,
            targets: bags.proportions.view(),
            loss: Loss::CrossEntropy,
        },
    )
}

/// Instance-level AUC with the positive-class probability as score.
pub fn test_auc(joint: &JointKDM, test: &LabeledDataset) -> Result<f64> {
    let pmf = predict_pmf(test.x.view(), joint)?;
    let scores: Vec<f64> = pmf.column(1).to_vec();
    let labels: Vec<bool> = test.class_indices().iter().map(|c| *c == 1).collect();
    auc(&scores, &labels)
}

/// Bags held out for model selection.
pub fn holdout(bags: &BagDataset, fraction: f64, seed: u64) -> Result<(BagDataset, BagDataset)> {
    let s = split(bags.len(), (1.0 - fraction, fraction, 0.0), seed)?;
    if s.validation.is_empty() || s.train.is_empty() {
        return Err(KdmError::InvalidConfig(format!(
            "{} bags are too few for a {fraction} validation split",
            bags.len()
        )));
    }
    Ok((subset(bags, &s.train)?, subset(bags, &s.validation)?))
}

/// Trains one grid point with early stopping on `val`; returns the model,
/// its held-out loss and best epoch.
fn fit_point(
    fit: &BagDataset,
    val: &BagDataset,
    hp: &HyperParams,
    base: &TrainConfig,
    seed: u64,
    patience: Option<usize>,
) -> Result<(JointKDM, f64, usize)> {
    let (kx, ky) = kernels(fit.bags[0].ncols())?;
    let (joint, report) = fit_llp_validated(fit, val, &kx, &ky, &hp.apply(base, seed), patience)?;
    let loss = report
        .final_validation()
        .expect("validated fit records held-out loss");
    Ok((joint, loss, report.best_epoch))
}

/// Picks the grid point with the lowest held-out bag loss. Also returns the
/// winning model and its best epoch.
pub fn tune(
    fit: &BagDataset,
    val: &BagDataset,
    base: &TrainConfig,
    grid: &Grid,
    seed: u64,
    patience: Option<usize>,
) -> Result<(HyperParams, JointKDM, usize)> {
    let mut best: Option<(f64, HyperParams, JointKDM, usize)> = None;
    for hp in grid.points(base) {
        let (joint, loss, epoch) = fit_point(fit, val, &hp, base, seed, patience)?;
        log::info!("tune {hp:?}: held-out bag loss {loss:.5} at epoch {epoch}");
        if best.as_ref().is_none_or(|b| loss < b.0) {
            best = Some((loss, hp, joint, epoch));
        }
    }
    let (_, hp, joint, epoch) = best.ok_or_else(|| KdmError::InvalidConfig("empty grid".into()))?;
    Ok((hp, joint, epoch))
}

/// Seed of repetition `r`; the same across cells so cells share splits.
fn rep_seed(seed: u64, r: usize) -> u64 {
    seed.wrapping_add(1_000_003 * r as u64)
}

pub fn run_cell(
    pool: &Pool,
    cfg: &LlpBenchConfig,
    bag_size: usize,
    lp_range: (f64, f64),
) -> Result<CellReport> {
    let start = Instant::now();
    let mut aucs = Vec::with_capacity(cfg.repetitions);
    let mut best_epochs = Vec::with_capacity(cfg.repetitions);
    let mut chosen = HyperParams {
        num_components: cfg.train.num_components,
        learning_rate: cfg.train.learning_rate,
        sigma_min: cfg.train.sigma_min,
    };
    for r in 0..cfg.repetitions {
        let seed = rep_seed(cfg.seed, r);
        let (train, test) = repetition_split(pool, cfg.train_size, cfg.test_size, seed)?;
        let n_bags = cfg.train_size / bag_size;
        let bags = make_bags(&train, bag_size, lp_range, n_bags, &mut RngState::new(seed, 11))?;
        let (fit, val) = holdout(&bags, cfg.validation_fraction, seed)?;
        let (joint, epoch) = if r == 0 || cfg.tune_every_repetition {
            let (hp, joint, epoch) = tune(&fit, &val, &cfg.train, &cfg.grid, seed, cfg.patience)?;
            chosen = hp;
            (joint, epoch)
        } else {
            let (joint, _, epoch) = fit_point(&fit, &val, &chosen, &cfg.train, seed, cfg.patience)?;
            (joint, epoch)
        };
        let a = test_auc(&joint, &test)?;
        log::info!(
            "{} bag {bag_size} lp {lp_range:?} rep {r}: auc {a:.4} ({chosen:?}, epoch {epoch})",
            cfg.name
        );
        aucs.push(a);
        best_epochs.push(epoch);
    }
    let (mean_auc, ci_half_width) = t_interval(&aucs, cfg.confidence)?;
    Ok(CellReport {
        dataset: cfg.name.clone(),
        bag_size,
        lp_range,
        repetitions: aucs.len(),
        aucs,
        mean_auc,
        ci_half_width,
        confidence: cfg.confidence,
        chosen,
        best_epochs,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

pub fn run_llp_bench(cfg: &LlpBenchConfig) -> Result<Vec<CellReport>> {
    cfg.train.validate()?;
    if cfg.repetitions == 0 {
        return Err(KdmError::InvalidConfig("repetitions must be positive".into()));
    }
    let pool = load_pool(cfg)?;
    let mut out = Vec::new();
    for &b in &cfg.bag_sizes {
        for &lp in &cfg.lp_ranges {
            out.push(run_cell(&pool, cfg, b, lp)?);
        }
    }
    Ok(out)
}
