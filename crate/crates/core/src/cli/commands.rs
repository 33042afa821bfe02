use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, FitMethod, KernelKind, Task};
use super::model::{write_json, ModelFile, Preprocess};
use super::{Direction, Metric};
use crate::bench::{holdout, run_llp_bench, LlpBenchConfig};
use crate::data::{load_csv, load_matrix_csv, make_bags, Standardizer, TabularSchema};
use crate::density::{KernelDensityMatrix, Side};
use crate::error::{KdmError, Result};
use crate::kernels::KernelSpec;
use crate::inference::{infer_points, infer_reverse, point_kdm, predict_means, predict_pmf};
use crate::metrics::{accuracy, auc};
use crate::sampling::{sample_continuous, sample_discrete, RngState};
use crate::training::{
    argmax, fit_discriminative, fit_llp, fit_llp_validated, fit_mle, fit_mle_joint,
    fit_nonparametric, median_heuristic, BagDataset, LabeledDataset, SigmaInit, TrainReport,
};

const SAMPLE_STREAM: u64 = 3;
const BAG_STREAM: u64 = 11;

/// Summary line of a command run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub metrics: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub wall_time: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_fingerprint: Option<String>,
}

impl MetricsReport {
    fn new(metrics: BTreeMap<String, f64>, seed: Option<u64>, start: Instant) -> Result<Self> {
        if let Some((name, _)) = metrics.iter().find(|(_, v)| !v.is_finite()) {
            return Err(KdmError::NonFiniteMetric(name.clone()));
        }
        Ok(Self {
            metrics,
            seed,
            wall_time: start.elapsed().as_secs_f64(),
            config_fingerprint: None,
        })
    }
}

/// Opens `dir/name`, creating `dir`, or stdout when no directory is given.
fn output(dir: Option<&Path>, name: &str) -> Result<Box<dyn Write>> {
    match dir {
        Some(d) => {
            std::fs::create_dir_all(d)?;
            Ok(Box::new(BufWriter::new(File::create(d.join(name))?)))
        }
        None => Ok(Box::new(BufWriter::new(std::io::stdout().lock()))),
    }
}

fn json_line<T: Serialize>(w: &mut dyn Write, v: &T) -> Result<()> {
    serde_json::to_writer(&mut *w, v)?;
    w.write_all(b"\n")?;
    Ok(())
}

pub struct FitArgs {
    pub config: PathBuf,
    pub seed: Option<u64>,
    pub data: Option<PathBuf>,
    pub schema: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

/// Training rows and what was learned to produce them.
struct Prepared {
    data: LabeledDataset,
    pre: Preprocess,
}

fn load_training(cfg: &ExperimentConfig) -> Result<Prepared> {
    let (mut data, encoder, numeric) = match &cfg.schema {
        Some(s) => {
            let schema = TabularSchema::from_path(s)?;
            let t = load_csv(&cfg.data, &schema)?;
            let numeric = t.encoder.numeric_columns();
            (t.data, Some(t.encoder), numeric)
        }
        None => {
            let x = load_matrix_csv(&cfg.data)?;
            let n = x.nrows();
            let cols = (0..x.ncols()).collect();
            (LabeledDataset::new(x, Array2::zeros((n, 0)))?, None, cols)
        }
    };
    if data.is_empty() {
        return Err(KdmError::EmptyDataset);
    }
    let standardizer = if cfg.standardize {
        let st = Standardizer::fit(data.x.view(), &numeric)?;
        st.apply(&mut data.x);
        Some(st)
    } else {
        None
    };
    Ok(Prepared {
        data,
        pre: Preprocess {
            encoder,
            standardizer,
        },
    })
}

fn explicit_sigma(cfg: &ExperimentConfig, x: &Array2<f64>) -> f64 {
    match cfg.train.sigma_init {
        SigmaInit::Explicit(s) => s,
        SigmaInit::MedianHeuristic => median_heuristic(x.view(), &mut RngState::new(cfg.train.seed, 2)),
    }
    .max(cfg.train.sigma_min)
}

fn llp_bags(cfg: &ExperimentConfig) -> Result<(BagDataset, Preprocess)> {
    let b = cfg.bags.as_ref().expect("validated llp config has bags");
    if let Some(f) = &b.file {
        let bags = BagDataset::read_jsonl(std::io::BufReader::new(File::open(f)?))?;
        return Ok((bags, Preprocess::default()));
    }
    let p = load_training(cfg)?;
    let n_bags = b.n_bags.unwrap_or(p.data.len() / b.bag_size);
    let bags = make_bags(
        &p.data,
        b.bag_size,
        b.lp_range,
        n_bags,
        &mut RngState::new(cfg.train.seed, BAG_STREAM),
    )?;
    Ok((bags, p.pre))
}

fn train(cfg: &ExperimentConfig) -> Result<(ModelFile, Option<TrainReport>, Preprocess)> {
    let kx_kind = cfg.x_kernel;
    match cfg.task {
        Task::Density => {
            let p = load_training(cfg)?;
            let x = &p.data.x;
            match (cfg.y_kernel(), cfg.method) {
                (None, FitMethod::Nonparametric) => {
                    let kernel = match kx_kind {
                        KernelKind::Rbf => KernelSpec::rbf(
                            x.ncols(),
                            explicit_sigma(cfg, x),
                        )?,
                        KernelKind::Cosine => kx_kind.spec(x.ncols())?,
                    };
                    let kdm = fit_nonparametric(x.clone(), kernel)?;
                    Ok((ModelFile::Single(kdm), None, p.pre))
                }
                (None, FitMethod::Gradient) => {
                    let (kdm, rep) = fit_mle(x.view(), &kx_kind.spec(x.ncols())?, &cfg.train)?;
                    Ok((ModelFile::Single(kdm), Some(rep), p.pre))
                }
                (Some(ky), FitMethod::Gradient) => {
                    let (j, rep) = fit_mle_joint(
                        &p.data,
                        &kx_kind.spec(x.ncols())?,
                        &ky.spec(p.data.y.ncols())?,
                        &cfg.train,
                    )?;
                    Ok((ModelFile::Joint(j), Some(rep), p.pre))
                }
                (Some(_), FitMethod::Nonparametric) => Err(KdmError::InvalidConfig(
                    "the nonparametric method fits single densities only".into(),
                )),
            }
        }
        Task::Classify | Task::Regress => {
            let p = load_training(cfg)?;
            let ky = cfg.y_kernel().expect("supervised tasks have a y kernel");
            let (j, rep) = fit_discriminative(
                &p.data,
                &kx_kind.spec(p.data.x.ncols())?,
                &ky.spec(p.data.y.ncols())?,
                cfg.loss(),
                &cfg.train,
            )?;
            Ok((ModelFile::Joint(j), Some(rep), p.pre))
        }
        Task::Llp => {
            let (bags, pre) = llp_bags(cfg)?;
            if bags.is_empty() {
                return Err(KdmError::EmptyDataset);
            }
            let kx = kx_kind.spec(bags.bags[0].ncols())?;
            let ky = cfg
                .y_kernel()
                .expect("llp has a y kernel")
                .spec(bags.proportions.ncols())?;
            let b = cfg.bags.as_ref().expect("validated llp config has bags");
            let (j, rep) = match b.validation_fraction {
                Some(f) => {
                    let (fit, val) = holdout(&bags, f, cfg.train.seed)?;
                    fit_llp_validated(&fit, &val, &kx, &ky, &cfg.train, b.patience)?
                }
                None => fit_llp(&bags, &kx, &ky, &cfg.train)?,
            };
            Ok((ModelFile::Joint(j), Some(rep), pre))
        }
    }
}

pub fn cmd_fit(args: &FitArgs) -> Result<()> {
    let start = Instant::now();
    let mut cfg = ExperimentConfig::from_path(&args.config)?;
    if let Some(s) = args.seed {
        cfg.train.seed = s;
    }
    if let Some(d) = &args.data {
        cfg.data = d.clone();
    }
    if let Some(s) = &args.schema {
        cfg.schema = Some(s.clone());
    }
    if let Some(o) = &args.out {
        cfg.out = Some(o.clone());
    }
    cfg.validate()?;
    let out = cfg.out.clone().unwrap_or_else(|| PathBuf::from("."));
    let (model, report, pre) = train(&cfg)?;
    std::fs::create_dir_all(&out)?;
    model.write(&out.join("model.json"))?;
    if !pre.is_empty() {
        write_json(&out.join("preprocess.json"), &pre)?;
    }
    let mut metrics = BTreeMap::new();
    let mut log = output(Some(&out), "metrics.jsonl")?;
    if let Some(rep) = &report {
        for entry in &rep.trace {
            json_line(&mut *log, entry)?;
        }
        metrics.insert("initial_objective".to_string(), rep.initial_objective());
        metrics.insert("objective".to_string(), rep.final_objective());
        metrics.insert("best_epoch".to_string(), rep.best_epoch as f64);
        if let Some(v) = rep.final_validation() {
            metrics.insert("validation_objective".to_string(), v);
        }
    }
    let components = match &model {
        ModelFile::Joint(j) => j.len(),
        ModelFile::Single(k) => k.len(),
    };
    metrics.insert("num_components".to_string(), components as f64);
    let mut summary = MetricsReport::new(metrics, Some(cfg.train.seed), start)?;
    summary.config_fingerprint = Some(cfg.fingerprint());
    json_line(&mut *log, &summary)?;
    log.flush()?;
    Ok(())
}

pub struct EvalArgs {
    pub model: PathBuf,
    pub data: PathBuf,
    pub schema: Option<PathBuf>,
    pub preprocess: Option<PathBuf>,
    pub metrics: Vec<Metric>,
    pub out: Option<PathBuf>,
}

/// Feature rows plus labels when a schema (or a fitted encoder) names them.
fn load_eval(
    data: &Path,
    schema: Option<&Path>,
    pre: &Preprocess,
) -> Result<(Array2<f64>, Option<Array2<f64>>)> {
    let (mut x, y) = if let Some(enc) = &pre.encoder {
        let t = enc.load(data)?;
        (t.data.x, Some(t.data.y))
    } else if let Some(s) = schema {
        let t = load_csv(data, &TabularSchema::from_path(s)?)?;
        (t.data.x, Some(t.data.y))
    } else {
        (load_matrix_csv(data)?, None)
    };
    pre.apply(&mut x)?;
    Ok((x, y))
}

fn read_preprocess(p: Option<&Path>) -> Result<Preprocess> {
    p.map_or_else(|| Ok(Preprocess::default()), Preprocess::read)
}

fn check_dim(model: &ModelFile, x: &Array2<f64>) -> Result<()> {
    if model.input_dim() != x.ncols() {
        return Err(KdmError::ModelDataMismatch(format!(
            "model expects {} input columns, data has {}",
            model.input_dim(),
            x.ncols()
        )));
    }
    Ok(())
}

fn need_labels(y: &Option<Array2<f64>>, metric: Metric) -> Result<&Array2<f64>> {
    y.as_ref().ok_or_else(|| {
        KdmError::InvalidConfig(format!("metric {} needs labelled data (--schema)", metric.name()))
    })
}

pub fn evaluate(
    model: &ModelFile,
    x: &Array2<f64>,
    y: &Option<Array2<f64>>,
    metrics: &[Metric],
) -> Result<BTreeMap<String, f64>> {
    check_dim(model, x)?;
    if x.nrows() == 0 {
        return Err(KdmError::EmptyDataset);
    }
    let mut out = BTreeMap::new();
    for &m in metrics {
        let value = match m {
            Metric::Nll => match model {
                ModelFile::Single(k) => -k.log_likelihood(x.view())? / x.nrows() as f64,
                ModelFile::Joint(j) => {
                    let y = need_labels(y, m)?;
                    -j.log_likelihood(x.view(), y.view())? / x.nrows() as f64
                }
            },
            Metric::Auc | Metric::Accuracy => {
                let j = model.joint()?;
                let y = need_labels(y, m)?;
                if y.ncols() != j.y_kernel().dim() {
                    return Err(KdmError::ModelDataMismatch(format!(
                        "model has {} classes, data has {}",
                        j.y_kernel().dim(),
                        y.ncols()
                    )));
                }
                let pmf = predict_pmf(x.view(), j)?;
                let truth: Vec<usize> = y.rows().into_iter().map(argmax).collect();
                if m == Metric::Auc {
                    if pmf.ncols() != 2 {
                        return Err(KdmError::ModelDataMismatch(
                            "auc needs a binary model".into(),
                        ));
                    }
                    let labels: Vec<bool> = truth.iter().map(|c| *c == 1).collect();
                    auc(&pmf.column(1).to_vec(), &labels)?
                } else {
                    let pred: Vec<usize> = pmf.rows().into_iter().map(argmax).collect();
                    accuracy(&pred, &truth)?
                }
            }
            Metric::Mse => {
                let j = model.joint()?;
                let y = need_labels(y, m)?;
                let yhat = predict_means(x.view(), j)?;
                if yhat.dim() != y.dim() {
                    return Err(KdmError::ModelDataMismatch(format!(
                        "predictions {:?} vs labels {:?}",
                        yhat.dim(),
                        y.dim()
                    )));
                }
                (&yhat - y).mapv(|e| e * e).sum() / y.len() as f64
            }
        };
        out.insert(m.name().to_string(), value);
    }
    Ok(out)
}

pub fn cmd_eval(args: &EvalArgs) -> Result<()> {
    let start = Instant::now();
    let model = ModelFile::read(&args.model)?;
    let pre = read_preprocess(args.preprocess.as_deref())?;
    let (x, y) = load_eval(&args.data, args.schema.as_deref(), &pre)?;
    let metrics = evaluate(&model, &x, &y, &args.metrics)?;
    let report = MetricsReport::new(metrics, None, start)?;
    let mut w = output(args.out.as_deref(), "eval.json")?;
    json_line(&mut *w, &report)?;
    w.flush()?;
    Ok(())
}

pub struct InferArgs {
    pub model: PathBuf,
    pub data: Option<PathBuf>,
    pub label: Option<usize>,
    pub direction: Direction,
    pub preprocess: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct ForwardPmf {
    pmf: Vec<f64>,
}

#[derive(Serialize)]
struct ForwardMean {
    weights: Vec<f64>,
    mean: Vec<f64>,
}

pub fn cmd_infer(args: &InferArgs) -> Result<()> {
    let model = ModelFile::read(&args.model)?;
    let joint = model.joint()?;
    let mut w = output(args.out.as_deref(), "infer.jsonl")?;
    match args.direction {
        Direction::Forward => {
            if args.label.is_some() {
                return Err(KdmError::InvalidConfig("--label is for reverse inference".into()));
            }
            let path = args.data.as_ref().expect("clap requires data or label");
            let mut x = load_matrix_csv(path)?;
            read_preprocess(args.preprocess.as_deref())?.apply(&mut x)?;
            check_dim(&model, &x)?;
            if joint.y_kernel().is_cosine() {
                for row in predict_pmf(x.view(), joint)?.rows() {
                    json_line(&mut *w, &ForwardPmf { pmf: row.to_vec() })?;
                }
            } else {
                let results = infer_points(x.view(), joint)?;
                let means = predict_means(x.view(), joint)?;
                for (r, m) in results.iter().zip(means.rows()) {
                    json_line(
                        &mut *w,
                        &ForwardMean {
                            weights: r.output.weights().to_vec(),
                            mean: m.to_vec(),
                        },
                    )?;
                }
            }
        }
        Direction::Reverse => {
            let ydim = joint.y_kernel().dim();
            let rows = match (args.label, &args.data) {
                (Some(c), _) => {
                    if c >= ydim {
                        return Err(KdmError::ModelDataMismatch(format!(
                            "class {c} out of range for {ydim} classes"
                        )));
                    }
                    let mut r = Array2::zeros((1, ydim));
                    r[[0, c]] = 1.0;
                    r
                }
                (None, Some(p)) => load_matrix_csv(p)?,
                (None, None) => unreachable!("clap requires data or label"),
            };
            if rows.ncols() != ydim {
                return Err(KdmError::ModelDataMismatch(format!(
                    "model outputs have {ydim} columns, data has {}",
                    rows.ncols()
                )));
            }
            for row in rows.rows() {
                let rho = point_kdm(row, joint.y_kernel())?;
                let res = infer_reverse(&rho, joint)?;
                json_line(&mut *w, &res.output)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub struct SampleArgs {
    pub model: PathBuf,
    pub n: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

fn fmt_row(row: ndarray::ArrayView1<f64>) -> String {
    row.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

pub fn cmd_sample(args: &SampleArgs) -> Result<()> {
    let kdm: KernelDensityMatrix = match ModelFile::read(&args.model)? {
        ModelFile::Single(k) => k,
        ModelFile::Joint(j) => j.marginal(Side::X),
    };
    let mut rng = RngState::new(args.seed, SAMPLE_STREAM);
    let mut w = output(args.out.as_deref(), "samples.csv")?;
    if kdm.kernel().is_rbf() {
        for row in sample_continuous(&kdm, args.n, &mut rng)?.rows() {
            writeln!(w, "{}", fmt_row(row))?;
        }
    } else if kdm.kernel().is_cosine() {
        for i in sample_discrete(&kdm, args.n, &mut rng)? {
            writeln!(w, "{i}")?;
        }
    } else {
        return Err(KdmError::WrongKernelKind {
            expected: "rbf or cosine",
            found: kdm.kernel().kind_name(),
        });
    }
    w.flush()?;
    Ok(())
}

pub fn cmd_llp_bench(config: &Path, seed: Option<u64>, out: Option<&Path>) -> Result<()> {
    let mut cfg = LlpBenchConfig::from_path(config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let cells = run_llp_bench(&cfg)?;
    let mut w = output(out, "bench.jsonl")?;
    for c in &cells {
        json_line(&mut *w, c)?;
    }
    w.flush()?;
    Ok(())
}

