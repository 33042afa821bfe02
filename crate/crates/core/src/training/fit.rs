use std::time::Instant;

use ndarray::{Array1, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use super::config::{SigmaInit, TrainConfig};
use super::dataset::{check_simplex_rows, BagDataset, LabeledDataset, WeightedInput};
use super::objectives::{evaluate, Loss, Objective};
use super::optimizer::Optimizer;
use super::params::{ModelParams, SideKernel, SideParams, Trainable};
use crate::density::{JointKDM, KernelDensityMatrix};
use crate::error::{KdmError, Result};
use crate::kernels::{sq_dist, KernelSpec};
use crate::sampling::RngState;

const MEDIAN_SUBSAMPLE: usize = 1000;

const STREAM_INIT: u64 = 0;
const STREAM_SHUFFLE: u64 = 1;
const STREAM_MEDIAN: u64 = 2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub epoch: usize,
    pub objective: f64,
    /// Held-out objective, when training monitors one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub validation: Option<f64>,
    pub wall_time: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// Full-data objective before training (epoch 0) and after every epoch.
    pub trace: Vec<TraceEntry>,
    /// Epoch whose parameters were returned: lowest held-out objective when
    /// one is monitored, lowest training objective otherwise.
    pub best_epoch: usize,
}

impl TrainReport {
    pub fn initial_objective(&self) -> f64 {
        self.trace[0].objective
    }

    /// Training objective of the returned parameters.
    pub fn final_objective(&self) -> f64 {
        self.trace[self.best_epoch].objective
    }

    pub fn final_validation(&self) -> Option<f64> {
        self.trace[self.best_epoch].validation
    }
}

/// Held-out data watched while training.
struct Monitor<'a> {
    objective: Objective<'a>,
    /// Stop after this many epochs without held-out improvement.
    patience: Option<usize>,
}

/// Components are the data rows, weights uniform.
pub fn fit_nonparametric(x: Array2<f64>, kernel: KernelSpec) -> Result<KernelDensityMatrix> {
    if x.nrows() == 0 {
        return Err(KdmError::EmptyDataset);
    }
    KernelDensityMatrix::uniform(x, kernel)
}

/// Median pairwise distance of at most 1000 subsampled rows, divided by √2.
/// Falls back to 1 when the median is zero.
pub fn median_heuristic(x: ArrayView2<f64>, rng: &mut RngState) -> f64 {
    let idx = sample_indices(x.nrows(), MEDIAN_SUBSAMPLE.min(x.nrows()), rng);
    let mut d = Vec::with_capacity(idx.len() * idx.len().saturating_sub(1) / 2);
    for (a, &i) in idx.iter().enumerate() {
        for &j in &idx[a + 1..] {
            d.push(sq_dist(x.row(i), x.row(j)).sqrt());
        }
    }
    if d.is_empty() {
        return 1.0;
    }
    d.sort_by(f64::total_cmp);
    let mid = d.len() / 2;
    let median = if d.len() % 2 == 0 {
        0.5 * (d[mid - 1] + d[mid])
    } else {
        d[mid]
    };
    if median > 0.0 && median.is_finite() {
        median / std::f64::consts::SQRT_2
    } else {
        1.0
    }
}

/// `k` indices from `0..n`: without replacement when `k ≤ n`, with
/// replacement otherwise.
fn sample_indices(n: usize, k: usize, rng: &mut RngState) -> Vec<usize> {
    if k <= n {
        let mut all: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = i + rng.below(n - i);
            all.swap(i, j);
        }
        all.truncate(k);
        all
    } else {
        (0..k).map(|_| rng.below(n)).collect()
    }
}

pub(crate) fn shuffle(v: &mut [usize], rng: &mut RngState) {
    for i in (1..v.len()).rev() {
        let j = rng.below(i + 1);
        v.swap(i, j);
    }
}

fn init_side(
    kernel: &KernelSpec,
    components: Array2<f64>,
    data: ArrayView2<f64>,
    cfg: &TrainConfig,
) -> Result<SideParams> {
    if kernel.dim() != data.ncols() {
        return Err(KdmError::DimMismatch {
            expected: kernel.dim(),
            got: data.ncols(),
        });
    }
    let kernel = match kernel {
        KernelSpec::Cosine { .. } => SideKernel::Cosine,
        KernelSpec::Rbf { .. } => {
            let sigma = match cfg.sigma_init {
                SigmaInit::Explicit(s) => s,
                SigmaInit::MedianHeuristic => {
                    median_heuristic(data, &mut RngState::new(cfg.seed, STREAM_MEDIAN))
                }
            };
            SideKernel::Rbf {
                log_sigma: sigma.max(cfg.sigma_min).ln(),
            }
        }
        KernelSpec::Product(..) => {
            return Err(KdmError::InvalidKernel(
                "training supports cosine and rbf kernels per side".into(),
            ))
        }
    };
    Ok(SideParams { components, kernel })
}

/// Maximum-likelihood training of a KDM over `x`.
///
/// Components start at a random sample of rows and weights start uniform.
/// For rbf kernels the starting bandwidth comes from `cfg.sigma_init`; the
/// kernel's own σ is not used.
pub fn fit_mle(
    x: ArrayView2<f64>,
    kernel: &KernelSpec,
    cfg: &TrainConfig,
) -> Result<(KernelDensityMatrix, TrainReport)> {
    cfg.validate()?;
    if x.nrows() == 0 {
        return Err(KdmError::EmptyDataset);
    }
    kernel.check_rows(x)?;
    let mut rng = RngState::new(cfg.seed, STREAM_INIT);
    let idx = sample_indices(x.nrows(), cfg.num_components, &mut rng);
    let params = ModelParams {
        x: init_side(kernel, x.select(Axis(0), &idx), x, cfg)?,
        y: None,
        logits: Array1::zeros(idx.len()),
    };
    let obj = Objective::Likelihood { x, y: None };
    let trainable = Trainable {
        y_components: false,
        sigma_x: true,
        sigma_y: false,
    };
    let (params, report) = optimize(params, &obj, trainable, cfg, None)?;
    Ok((params.to_kdm()?, report))
}

/// Maximum-likelihood training of a joint KDM over `(x, y)` pairs.
pub fn fit_mle_joint(
    data: &LabeledDataset,
    kx: &KernelSpec,
    ky: &KernelSpec,
    cfg: &TrainConfig,
) -> Result<(JointKDM, TrainReport)> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(KdmError::EmptyDataset);
    }
    kx.check_rows(data.x.view())?;
    ky.check_rows(data.y.view())?;
    let mut rng = RngState::new(cfg.seed, STREAM_INIT);
    let idx = sample_indices(data.len(), cfg.num_components, &mut rng);
    let params = ModelParams {
        x: init_side(kx, data.x.select(Axis(0), &idx), data.x.view(), cfg)?,
        y: Some(init_side(ky, data.y.select(Axis(0), &idx), data.y.view(), cfg)?),
        logits: Array1::zeros(idx.len()),
    };
    let obj = Objective::Likelihood {
        x: data.x.view(),
        y: Some(data.y.view()),
    };
    let trainable = Trainable {
        y_components: true,
        sigma_x: true,
        sigma_y: true,
    };
    let (params, report) = optimize(params, &obj, trainable, cfg, None)?;
    Ok((params.to_joint()?, report))
}

/// Discriminative training: each row is a point KDM whose inferred output
/// is compared with its target.
pub fn fit_discriminative(
    data: &LabeledDataset,
    kx: &KernelSpec,
    ky: &KernelSpec,
    loss: Loss,
    cfg: &TrainConfig,
) -> Result<(JointKDM, TrainReport)> {
    if data.is_empty() {
        return Err(KdmError::EmptyDataset);
    }
    let inputs: Vec<WeightedInput> = data
        .x
        .rows()
        .into_iter()
        .map(|r| WeightedInput {
            rows: r.to_owned().insert_axis(Axis(0)),
            weights: Array1::ones(1),
        })
        .collect();
    fit_weighted(
        &inputs,
        data.y.view(),
        data.x.view(),
        data.y.view(),
        kx,
        ky,
        loss,
        cfg,
        None,
    )
}

/// Learning from label proportions: each bag is a uniform-weight KDM over its
/// instances, its target the bag's class proportions, the loss cross-entropy.
///
/// Components are initialized from instances; the output component of an
/// instance starts at the square root of its bag's proportion row, so bags
/// of size one reduce to [`fit_discriminative`].
pub fn fit_llp(
    bags: &BagDataset,
    kx: &KernelSpec,
    ky: &KernelSpec,
    cfg: &TrainConfig,
) -> Result<(JointKDM, TrainReport)> {
    let (inputs, flat_x, flat_y) = llp_inputs(bags)?;
    fit_weighted(
        &inputs,
        bags.proportions.view(),
        flat_x.view(),
        flat_y.view(),
        kx,
        ky,
        Loss::CrossEntropy,
        cfg,
        None,
    )
}

/// [`fit_llp`] with early stopping: returns the parameters of the epoch with
/// the lowest bag-level loss on `validation`, and stops after `patience`
/// epochs without improvement.
pub fn fit_llp_validated(
    bags: &BagDataset,
    validation: &BagDataset,
    kx: &KernelSpec,
    ky: &KernelSpec,
    cfg: &TrainConfig,
    patience: Option<usize>,
) -> Result<(JointKDM, TrainReport)> {
    let (inputs, flat_x, flat_y) = llp_inputs(bags)?;
    let (val_inputs, _, _) = llp_inputs(validation)?;
    let monitor = Monitor {
        objective: Objective::Discriminative {
            inputs: &val_inputs,
            targets: validation.proportions.view(),
            loss: Loss::CrossEntropy,
        },
        patience,
    };
    fit_weighted(
        &inputs,
        bags.proportions.view(),
        flat_x.view(),
        flat_y.view(),
        kx,
        ky,
        Loss::CrossEntropy,
        cfg,
        Some(monitor),
    )
}

/// Uniform-weight bag inputs plus the flattened instances, each paired with
/// its bag's proportion row.
pub(crate) fn llp_inputs(
    bags: &BagDataset,
) -> Result<(Vec<WeightedInput>, Array2<f64>, Array2<f64>)> {
    if bags.is_empty() {
        return Err(KdmError::EmptyDataset);
    }
    let n_inst = bags.num_instances();
    let nx = bags.bags[0].ncols();
    let ny = bags.proportions.ncols();
    let mut flat_x = Array2::zeros((n_inst, nx));
    let mut flat_y = Array2::zeros((n_inst, ny));
    let mut inputs = Vec::with_capacity(bags.len());
    let mut at = 0;
    for (bag, prop) in bags.bags.iter().zip(bags.proportions.rows()) {
        let m = bag.nrows();
        flat_x.slice_mut(ndarray::s![at..at + m, ..]).assign(bag);
        for mut row in flat_y.slice_mut(ndarray::s![at..at + m, ..]).rows_mut() {
            row.assign(&prop);
        }
        at += m;
        inputs.push(WeightedInput {
            rows: bag.clone(),
            weights: Array1::from_elem(m, 1.0 / m as f64),
        });
    }
    Ok((inputs, flat_x, flat_y))
}

/// Shared discriminative trainer. `init_x`/`init_y` are the instance rows
/// and per-instance targets components are sampled from.
#[allow(clippy::too_many_arguments)]
fn fit_weighted(
    inputs: &[WeightedInput],
    targets: ArrayView2<f64>,
    init_x: ArrayView2<f64>,
    init_y: ArrayView2<f64>,
    kx: &KernelSpec,
    ky: &KernelSpec,
    loss: Loss,
    cfg: &TrainConfig,
    monitor: Option<Monitor>,
) -> Result<(JointKDM, TrainReport)> {
    cfg.validate()?;
    if targets.nrows() != inputs.len() {
        return Err(KdmError::LabelShapeMismatch(format!(
            "{} inputs but {} targets",
            inputs.len(),
            targets.nrows()
        )));
    }
    if targets.ncols() != ky.dim() {
        return Err(KdmError::LabelShapeMismatch(format!(
            "targets have {} columns, y kernel has dimension {}",
            targets.ncols(),
            ky.dim()
        )));
    }
    if loss == Loss::CrossEntropy {
        if !ky.is_cosine() {
            return Err(KdmError::WrongKernelKind {
                expected: "cosine",
                found: ky.kind_name(),
            });
        }
        check_simplex_rows(targets)?;
    }
    kx.check_rows(init_x)?;
    for input in inputs {
        kx.check_rows(input.rows.view())?;
    }
    let mut rng = RngState::new(cfg.seed, STREAM_INIT);
    let idx = sample_indices(init_x.nrows(), cfg.num_components, &mut rng);
    let mut y0 = init_y.select(Axis(0), &idx);
    if ky.is_cosine() {
        y0.mapv_inplace(f64::sqrt);
    }
    let params = ModelParams {
        x: init_side(kx, init_x.select(Axis(0), &idx), init_x, cfg)?,
        y: Some(init_side(ky, y0, init_y, cfg)?),
        logits: Array1::zeros(idx.len()),
    };
    let obj = Objective::Discriminative {
        inputs,
        targets,
        loss,
    };
    let trainable = Trainable {
        y_components: cfg.train_y_components,
        sigma_x: true,
        sigma_y: false,
    };
    let (params, report) = optimize(params, &obj, trainable, cfg, monitor.as_ref())?;
    Ok((params.to_joint()?, report))
}

fn with_position(e: KdmError, epoch: usize, step: usize) -> KdmError {
    match e {
        KdmError::NonFiniteLoss { detail, .. } => KdmError::NonFiniteLoss {
            epoch,
            step,
            detail,
        },
        other => other,
    }
}

/// Minibatch gradient descent. Returns the parameters of the epoch with the
/// lowest full-data objective (epoch 0 being the initialization), or the
/// lowest held-out objective when a monitor is given.
fn optimize(
    mut params: ModelParams,
    obj: &Objective,
    trainable: Trainable,
    cfg: &TrainConfig,
    monitor: Option<&Monitor>,
) -> Result<(ModelParams, TrainReport)> {
    let start = Instant::now();
    let n = obj.len();
    let all: Vec<usize> = (0..n).collect();
    let batch = cfg.batch_size.min(n);
    let log_sigma_min = cfg.sigma_min.ln();
    let mut shuffle_rng = RngState::new(cfg.seed, STREAM_SHUFFLE);
    let mut theta = params.flatten(trainable);
    let mut opt = Optimizer::new(cfg.optimizer, cfg.learning_rate, theta.len());

    let held_out = |p: &ModelParams, epoch: usize| -> Result<Option<f64>> {
        monitor
            .map(|m| {
                let idx: Vec<usize> = (0..m.objective.len()).collect();
                evaluate(p, &m.objective, &idx, false).map(|v| v.0)
            })
            .transpose()
            .map_err(|e| with_position(e, epoch, 0))
    };
    let initial = evaluate(&params, obj, &all, false).map_err(|e| with_position(e, 0, 0))?;
    let initial_val = held_out(&params, 0)?;
    let mut trace = vec![TraceEntry {
        epoch: 0,
        objective: initial.0,
        validation: initial_val,
        wall_time: start.elapsed().as_secs_f64(),
    }];
    let mut best = (initial_val.unwrap_or(initial.0), 0, params.clone());
    let mut order = all.clone();
    for epoch in 1..=cfg.epochs {
        shuffle(&mut order, &mut shuffle_rng);
        for (step, chunk) in order.chunks(batch).enumerate() {
            let (_, grads) =
                evaluate(&params, obj, chunk, true).map_err(|e| with_position(e, epoch, step))?;
            let g = grads
                .expect("gradients requested")
                .flatten(&params, trainable);
            if g.iter().any(|v| !v.is_finite()) {
                return Err(KdmError::NonFiniteLoss {
                    epoch,
                    step,
                    detail: "non-finite gradient".into(),
                });
            }
            opt.step(&mut theta, &g);
            params.unflatten(trainable, &theta);
            clamp_sigma(&mut params, log_sigma_min);
            theta = params.flatten(trainable);
            if !params.is_finite() {
                return Err(KdmError::NonFiniteLoss {
                    epoch,
                    step,
                    detail: "non-finite parameters after update".into(),
                });
            }
        }
        let (value, _) =
            evaluate(&params, obj, &all, false).map_err(|e| with_position(e, epoch, 0))?;
        let val = held_out(&params, epoch)?;
        log::debug!("epoch {epoch}: objective {value}, held-out {val:?}");
        trace.push(TraceEntry {
            epoch,
            objective: value,
            validation: val,
            wall_time: start.elapsed().as_secs_f64(),
        });
        let score = val.unwrap_or(value);
        if score < best.0 {
            best = (score, epoch, params.clone());
        }
        if let Some(p) = monitor.and_then(|m| m.patience) {
            if epoch - best.1 >= p {
                break;
            }
        }
    }
    Ok((
        best.2,
        TrainReport {
            trace,
            best_epoch: best.1,
        },
    ))
}

fn clamp_sigma(params: &mut ModelParams, floor: f64) {
    let sides = std::iter::once(&mut params.x).chain(params.y.as_mut());
    for side in sides {
        if let SideKernel::Rbf { log_sigma } = &mut side.kernel {
            *log_sigma = log_sigma.max(floor);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inference::predict_pmf;
    use ndarray::array;

    fn blobs(n_per: usize, seed: u64) -> LabeledDataset {
        let mut rng = RngState::from_seed(seed);
        let mut x = Array2::zeros((2 * n_per, 2));
        let mut y = Array2::zeros((2 * n_per, 2));
        for i in 0..2 * n_per {
            let c = i % 2;
            let center = if c == 0 { -2.0 } else { 2.0 };
            x[[i, 0]] = center + 0.5 * rng.normal();
            x[[i, 1]] = 0.5 * rng.normal();
            y[[i, c]] = 1.0;
        }
        LabeledDataset::new(x, y).unwrap()
    }

    fn cfg(m: usize, epochs: usize) -> TrainConfig {
        TrainConfig {
            num_components: m,
            epochs,
            learning_rate: 0.01,
            batch_size: 16,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn nonparametric_weights_are_uniform() {
        let k = KernelSpec::rbf(1, 1.0).unwrap();
        let kdm = fit_nonparametric(array![[0.0], [1.0], [2.0]], k).unwrap();
        for w in kdm.weights() {
            assert!((w - 1.0 / 3.0).abs() < 1e-15);
        }
        assert!(fit_nonparametric(Array2::zeros((0, 1)), KernelSpec::cosine(1).unwrap()).is_err());
    }

    #[test]
    fn median_heuristic_on_known_points() {
        // Pairwise distances 1, 2, 3 → median 2.
        let x = array![[0.0], [1.0], [3.0]];
        let s = median_heuristic(x.view(), &mut RngState::from_seed(0));
        assert!((s - 2.0 / std::f64::consts::SQRT_2).abs() < 1e-15);
        let constant = array![[1.0], [1.0]];
        assert_eq!(median_heuristic(constant.view(), &mut RngState::from_seed(0)), 1.0);
    }

    #[test]
    fn sampling_indices_policy() {
        let mut rng = RngState::from_seed(4);
        let mut idx = sample_indices(10, 10, &mut rng);
        idx.sort();
        assert_eq!(idx, (0..10).collect::<Vec<_>>());
        assert_eq!(sample_indices(3, 7, &mut rng).len(), 7);
    }

    #[test]
    fn zero_epochs_with_all_rows_is_nonparametric() {
        let x = array![[0.0], [1.0], [2.5], [4.0]];
        let c = TrainConfig {
            num_components: 4,
            epochs: 0,
            sigma_init: SigmaInit::Explicit(0.7),
            ..TrainConfig::default()
        };
        let k = KernelSpec::rbf(1, 0.7).unwrap();
        let (kdm, report) = fit_mle(x.view(), &k, &c).unwrap();
        assert_eq!(report.trace.len(), 1);
        let np = fit_nonparametric(x.clone(), k).unwrap();
        for q in [-1.0, 0.3, 2.0, 5.0] {
            let a = kdm.density(array![q].view()).unwrap();
            let b = np.density(array![q].view()).unwrap();
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn mle_never_ends_worse_than_it_starts() {
        let mut rng = RngState::from_seed(99);
        let x = Array2::from_shape_fn((200, 1), |(i, _)| {
            let c = if i % 2 == 0 { -2.0 } else { 2.0 };
            c + 0.5 * rng.normal()
        });
        for seed in 0..5 {
            let c = TrainConfig {
                seed,
                ..cfg(4, 20)
            };
            let (kdm, report) = fit_mle(x.view(), &KernelSpec::rbf(1, 1.0).unwrap(), &c).unwrap();
            assert!(report.final_objective() <= report.initial_objective());
            assert!((kdm.weights().sum() - 1.0).abs() < 1e-12);
            assert!(kdm.kernel().sigma().unwrap() >= c.sigma_min);
            assert!(report.trace.iter().all(|t| t.objective.is_finite()));
        }
    }

    #[test]
    fn separable_blobs_are_fit_perfectly() {
        let d = blobs(50, 1);
        let (joint, report) = fit_discriminative(
            &d,
            &KernelSpec::rbf(2, 1.0).unwrap(),
            &KernelSpec::cosine(2).unwrap(),
            Loss::CrossEntropy,
            &cfg(4, 30),
        )
        .unwrap();
        assert!(report.final_objective() < report.initial_objective());
        let pmf = predict_pmf(d.x.view(), &joint).unwrap();
        let correct = pmf
            .rows()
            .into_iter()
            .zip(d.class_indices())
            .filter(|(p, c)| super::super::dataset::argmax(*p) == *c)
            .count();
        assert_eq!(correct, d.len());
    }

    #[test]
    fn training_is_deterministic() {
        let d = blobs(30, 2);
        let run = || {
            fit_discriminative(
                &d,
                &KernelSpec::rbf(2, 1.0).unwrap(),
                &KernelSpec::cosine(2).unwrap(),
                Loss::CrossEntropy,
                &cfg(6, 5),
            )
            .unwrap()
            .0
        };
        assert_eq!(
            serde_json::to_string(&run()).unwrap(),
            serde_json::to_string(&run()).unwrap()
        );
    }

    #[test]
    fn singleton_bags_reduce_to_discriminative() {
        let d = blobs(20, 3);
        let bags = BagDataset::new(
            d.x.rows().into_iter().map(|r| r.to_owned().insert_axis(Axis(0))).collect(),
            d.y.clone(),
        )
        .unwrap();
        let kx = KernelSpec::rbf(2, 1.0).unwrap();
        let ky = KernelSpec::cosine(2).unwrap();
        let c = cfg(5, 4);
        let (a, _) = fit_llp(&bags, &kx, &ky, &c).unwrap();
        let (b, _) = fit_discriminative(&d, &kx, &ky, Loss::CrossEntropy, &c).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn regression_with_mse() {
        let n = 200;
        let x = Array2::from_shape_fn((n, 1), |(i, _)| -3.0 + 6.0 * i as f64 / n as f64);
        let y = x.mapv(f64::sin);
        let d = LabeledDataset::new(x, y).unwrap();
        let (joint, report) = fit_discriminative(
            &d,
            &KernelSpec::rbf(1, 1.0).unwrap(),
            &KernelSpec::rbf(1, 1.0).unwrap(),
            Loss::Mse,
            &cfg(16, 40),
        )
        .unwrap();
        assert!(report.final_objective() < 0.02, "{}", report.final_objective());
        assert!(joint.y_kernel().is_rbf());
    }

    #[test]
    fn cross_entropy_needs_cosine_output_and_simplex_targets() {
        let d = blobs(5, 0);
        let kx = KernelSpec::rbf(2, 1.0).unwrap();
        assert!(matches!(
            fit_discriminative(&d, &kx, &KernelSpec::rbf(2, 1.0).unwrap(), Loss::CrossEntropy, &cfg(2, 1)),
            Err(KdmError::WrongKernelKind { .. })
        ));
        let bad = LabeledDataset::new(d.x.clone(), d.y.mapv(|v| v * 2.0)).unwrap();
        assert!(matches!(
            fit_discriminative(&bad, &kx, &KernelSpec::cosine(2).unwrap(), Loss::CrossEntropy, &cfg(2, 1)),
            Err(KdmError::LabelShapeMismatch(_))
        ));
    }

    #[test]
    fn huge_learning_rate_reports_non_finite_loss_or_stays_finite() {
        let d = blobs(10, 0);
        let c = TrainConfig {
            learning_rate: 1e300,
            optimizer: super::super::config::OptimizerKind::Sgd,
            ..cfg(4, 3)
        };
        match fit_discriminative(
            &d,
            &KernelSpec::rbf(2, 1.0).unwrap(),
            &KernelSpec::cosine(2).unwrap(),
            Loss::CrossEntropy,
            &c,
        ) {
            Err(KdmError::NonFiniteLoss { epoch, .. }) => assert!(epoch >= 1),
            Ok((_, r)) => assert!(r.trace.iter().all(|t| t.objective.is_finite())),
            Err(e) => panic!("unexpected error {e}"),
        }
    }
}
