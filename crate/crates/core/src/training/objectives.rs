//! Training objectives and their analytic gradients.
//!
//! Gradients with respect to components and bandwidths are assembled from
//! `∇ log k²`, scaled by the (already normalized) responsibility of the
//! component. This keeps every term bounded when kernel values are tiny.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, ArrayViewMut1};
use serde::{Deserialize, Serialize};

use super::dataset::WeightedInput;
use super::params::{ModelGrads, ModelParams, SideKernel, SideParams};
use crate::density::LOG_EPS;
use crate::error::{KdmError, Result};
use crate::inference::DEGENERATE_DENOMINATOR;

/// Floor applied to class probabilities inside the cross-entropy log.
pub const XENT_CLAMP: f64 = 1e-12;

const SIMPLEX_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Loss {
    CrossEntropy,
    Mse,
}

/// `−Σ_j y_j log(clamp(π_j, 1e-12, 1))`.
pub fn loss_xent(pi: ArrayView1<f64>, y: ArrayView1<f64>) -> Result<f64> {
    if pi.len() != y.len() {
        return Err(KdmError::ShapeMismatch(format!(
            "pmf has {} entries, target has {}",
            pi.len(),
            y.len()
        )));
    }
    for (name, v) in [("pmf", pi), ("target", y)] {
        if (v.sum() - 1.0).abs() > SIMPLEX_TOL || v.iter().any(|p| *p < -SIMPLEX_TOL) {
            return Err(KdmError::ShapeMismatch(format!("{name} is not on the simplex")));
        }
    }
    Ok(xent_unchecked(pi, y))
}

fn xent_unchecked(pi: ArrayView1<f64>, y: ArrayView1<f64>) -> f64 {
    -pi.iter()
        .zip(y.iter())
        .map(|(p, t)| if *t == 0.0 { 0.0 } else { t * p.clamp(XENT_CLAMP, 1.0).ln() })
        .sum::<f64>()
}

/// Mean squared componentwise error.
pub fn loss_mse(y_hat: ArrayView1<f64>, y: ArrayView1<f64>) -> Result<f64> {
    if y_hat.len() != y.len() {
        return Err(KdmError::ShapeMismatch(format!(
            "prediction has {} entries, target has {}",
            y_hat.len(),
            y.len()
        )));
    }
    if y.is_empty() {
        return Ok(0.0);
    }
    Ok(mse_unchecked(y_hat, y))
}

fn mse_unchecked(y_hat: ArrayView1<f64>, y: ArrayView1<f64>) -> f64 {
    y_hat
        .iter()
        .zip(y.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / y.len() as f64
}

/// A scalar training objective over a dataset.
#[derive(Clone, Copy, Debug)]
pub enum Objective<'a> {
    /// Negative mean log density of the rows (of `x`, or of `(x, y)` pairs
    /// for a joint model).
    Likelihood {
        x: ArrayView2<'a, f64>,
        y: Option<ArrayView2<'a, f64>>,
    },
    /// Mean loss of the output inferred from each input KDM against its
    /// target row. Cross-entropy compares the output PMF with the target;
    /// mse compares `Σ_j p''_j y'_j` with it.
    Discriminative {
        inputs: &'a [WeightedInput],
        targets: ArrayView2<'a, f64>,
        loss: Loss,
    },
}

impl Objective<'_> {
    pub fn len(&self) -> usize {
        match self {
            Objective::Likelihood { x, .. } => x.nrows(),
            Objective::Discriminative { inputs, .. } => inputs.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Objective value and analytic gradients over the whole dataset.
pub fn objective_gradients(params: &ModelParams, obj: &Objective) -> Result<(f64, ModelGrads)> {
    let idx: Vec<usize> = (0..obj.len()).collect();
    let (v, g) = evaluate(params, obj, &idx, true)?;
    Ok((v, g.expect("gradients requested")))
}

pub fn objective_value(params: &ModelParams, obj: &Objective) -> Result<f64> {
    let idx: Vec<usize> = (0..obj.len()).collect();
    Ok(evaluate(params, obj, &idx, false)?.0)
}

/// Objective over the rows in `idx`; gradients only when `with_grad`.
pub(crate) fn evaluate(
    params: &ModelParams,
    obj: &Objective,
    idx: &[usize],
    with_grad: bool,
) -> Result<(f64, Option<ModelGrads>)> {
    if idx.is_empty() {
        return Err(KdmError::EmptyDataset);
    }
    let (value, grads) = match obj {
        Objective::Likelihood { x, y } => likelihood(params, *x, *y, idx, with_grad)?,
        Objective::Discriminative {
            inputs,
            targets,
            loss,
        } => discriminative(params, inputs, *targets, *loss, idx, with_grad)?,
    };
    if !value.is_finite() {
        return Err(KdmError::NonFiniteLoss {
            epoch: 0,
            step: 0,
            detail: format!("objective evaluated to {value}"),
        });
    }
    Ok((value, grads))
}

/// Per-side kernel evaluation with cached component norms.
struct SideEval<'a> {
    kernel: SideKernel,
    comps: ArrayView2<'a, f64>,
    comp_sq_norms: Vec<f64>,
    inv_s2: f64,
}

impl<'a> SideEval<'a> {
    fn new(side: &'a SideParams) -> Self {
        let comps = side.components.view();
        let (comp_sq_norms, inv_s2) = match side.kernel {
            SideKernel::Cosine => (comps.rows().into_iter().map(|r| r.dot(&r)).collect(), 0.0),
            SideKernel::Rbf { log_sigma } => (Vec::new(), (-2.0 * log_sigma).exp()),
        };
        Self {
            kernel: side.kernel,
            comps,
            comp_sq_norms,
            inv_s2,
        }
    }

    fn check_dim(&self, cols: usize) -> Result<()> {
        if cols != self.comps.ncols() {
            return Err(KdmError::DimMismatch {
                expected: self.comps.ncols(),
                got: cols,
            });
        }
        Ok(())
    }

    fn k2(&self, x: ArrayView1<f64>, x_sq_norm: f64, j: usize) -> f64 {
        let c = self.comps.row(j);
        match self.kernel {
            SideKernel::Cosine => {
                let a = x.dot(&c);
                a * a / (x_sq_norm * self.comp_sq_norms[j])
            }
            SideKernel::Rbf { .. } => {
                let d2: f64 = x.iter().zip(c.iter()).map(|(u, v)| (u - v) * (u - v)).sum();
                (-d2 * self.inv_s2).exp()
            }
        }
    }

    fn sq_norm(&self, x: ArrayView1<f64>) -> f64 {
        match self.kernel {
            SideKernel::Cosine => x.dot(&x),
            SideKernel::Rbf { .. } => 0.0,
        }
    }

    /// Adds `scale · ∇_c log k²(x, c_j)` to `grad_row` and the log σ
    /// derivative to `dlog_sigma`.
    fn add_log_grad(
        &self,
        x: ArrayView1<f64>,
        j: usize,
        scale: f64,
        mut grad_row: ArrayViewMut1<f64>,
        dlog_sigma: &mut f64,
    ) {
        if scale == 0.0 {
            return;
        }
        let c = self.comps.row(j);
        match self.kernel {
            SideKernel::Cosine => {
                let a = x.dot(&c);
                if a == 0.0 {
                    return;
                }
                let u = 2.0 * scale / a;
                let v = 2.0 * scale / self.comp_sq_norms[j];
                for ((g, xi), ci) in grad_row.iter_mut().zip(x.iter()).zip(c.iter()) {
                    *g += u * xi - v * ci;
                }
            }
            SideKernel::Rbf { .. } => {
                let f = 2.0 * scale * self.inv_s2;
                let mut d2 = 0.0;
                for ((g, xi), ci) in grad_row.iter_mut().zip(x.iter()).zip(c.iter()) {
                    let d = xi - ci;
                    d2 += d * d;
                    *g += f * d;
                }
                *dlog_sigma += f * d2;
            }
        }
    }
}

fn likelihood(
    params: &ModelParams,
    x: ArrayView2<f64>,
    y: Option<ArrayView2<f64>>,
    idx: &[usize],
    with_grad: bool,
) -> Result<(f64, Option<ModelGrads>)> {
    let sx = SideEval::new(&params.x);
    sx.check_dim(x.ncols())?;
    let sy = match (&params.y, y) {
        (Some(side), Some(yv)) => {
            let e = SideEval::new(side);
            e.check_dim(yv.ncols())?;
            if yv.nrows() != x.nrows() {
                return Err(KdmError::LabelShapeMismatch(format!(
                    "{} x rows but {} y rows",
                    x.nrows(),
                    yv.nrows()
                )));
            }
            Some((e, yv))
        }
        (None, None) => None,
        _ => {
            return Err(KdmError::ShapeMismatch(
                "likelihood data and model disagree on the presence of y".into(),
            ))
        }
    };
    let w = params.weights();
    let m = w.len();
    let (log_mx, dlog_mx) = params.x.kernel.log_norm_const(params.x.dim());
    let (log_my, dlog_my) = params
        .y
        .as_ref()
        .map_or((0.0, 0.0), |s| s.kernel.log_norm_const(s.dim()));
    let norm = (log_mx + log_my).exp();
    let inv_b = 1.0 / idx.len() as f64;

    let mut grads = with_grad.then(|| params.zero_grads());
    let mut total = 0.0;
    let mut a = vec![0.0; m];
    for &i in idx {
        let xi = x.row(i);
        let xn = sx.sq_norm(xi);
        let yi = sy.as_ref().map(|(e, yv)| (yv.row(i), e.sq_norm(yv.row(i))));
        let mut s = 0.0;
        for k in 0..m {
            let mut v = sx.k2(xi, xn, k);
            if let (Some((e, _)), Some((yr, yn))) = (&sy, yi) {
                v *= e.k2(yr, yn, k);
            }
            a[k] = v;
            s += w[k] * v;
        }
        let f = norm * s;
        total -= (f + LOG_EPS).ln();
        let Some(g) = grads.as_mut() else { continue };
        // r_k = M w_k a_k / (f + ε); ρ = f / (f + ε).
        let inv = norm / (f + LOG_EPS);
        let rho = f / (f + LOG_EPS);
        g.log_sigma_x -= inv_b * dlog_mx * rho;
        g.log_sigma_y -= inv_b * dlog_my * rho;
        for k in 0..m {
            let r = inv * w[k] * a[k];
            g.logits[k] -= inv_b * (r - w[k] * rho);
            sx.add_log_grad(
                xi,
                k,
                -inv_b * r,
                g.x_components.row_mut(k),
                &mut g.log_sigma_x,
            );
            if let (Some((e, _)), Some((yr, _)), Some(gy)) =
                (&sy, yi, g.y_components.as_mut())
            {
                e.add_log_grad(yr, k, -inv_b * r, gy.row_mut(k), &mut g.log_sigma_y);
            }
        }
    }
    Ok((total * inv_b, grads))
}

fn discriminative(
    params: &ModelParams,
    inputs: &[WeightedInput],
    targets: ArrayView2<f64>,
    loss: Loss,
    idx: &[usize],
    with_grad: bool,
) -> Result<(f64, Option<ModelGrads>)> {
    let ys = params
        .y
        .as_ref()
        .ok_or_else(|| KdmError::InvalidConfig("discriminative training needs a joint model".into()))?;
    if targets.nrows() != inputs.len() {
        return Err(KdmError::LabelShapeMismatch(format!(
            "{} inputs but {} targets",
            inputs.len(),
            targets.nrows()
        )));
    }
    if targets.ncols() != ys.dim() {
        return Err(KdmError::LabelShapeMismatch(format!(
            "targets have {} columns, model outputs {}",
            targets.ncols(),
            ys.dim()
        )));
    }
    let sx = SideEval::new(&params.x);
    let w = params.weights();
    let m = w.len();
    let d = ys.components.view();
    let ny = d.ncols();
    // Row-normalized squares of the output components (cosine PMF basis).
    let u: Array2<f64> = if loss == Loss::CrossEntropy {
        let mut u = d.mapv(|v| v * v);
        for mut row in u.rows_mut() {
            let s = row.sum();
            if s > 0.0 {
                row /= s;
            }
        }
        u
    } else {
        Array2::zeros((0, 0))
    };
    let inv_b = 1.0 / idx.len() as f64;

    let mut grads = with_grad.then(|| params.zero_grads());
    let mut total = 0.0;
    let mut resp = Array2::<f64>::zeros((0, m));
    let mut degenerate = Vec::new();
    let mut g_out = Array1::<f64>::zeros(m);
    let mut dl_dyhat = Array1::<f64>::zeros(ny);
    for &i in idx {
        let input = &inputs[i];
        sx.check_dim(input.rows.ncols())?;
        let q = input.weights.view();
        let rows = input.rows.view();
        let n_rows = rows.nrows();
        if resp.nrows() != n_rows {
            resp = Array2::zeros((n_rows, m));
        }
        degenerate.clear();
        for (l, xl) in rows.rows().into_iter().enumerate() {
            let xn = sx.sq_norm(xl);
            let mut row = resp.row_mut(l);
            let mut den = 0.0;
            for k in 0..m {
                let v = w[k] * sx.k2(xl, xn, k);
                row[k] = v;
                den += v;
            }
            if den < DEGENERATE_DENOMINATOR || !den.is_finite() {
                row.assign(&w);
                degenerate.push(true);
            } else {
                row /= den;
                degenerate.push(false);
            }
        }
        let p_out = q.dot(&resp);
        let target = targets.row(i);

        // Loss and G_j = dL/dp''_j for this sample.
        let value = match loss {
            Loss::CrossEntropy => {
                let pi = p_out.dot(&u);
                let v = xent_unchecked(pi.view(), target);
                if with_grad {
                    for (t, g) in dl_dyhat.iter_mut().enumerate() {
                        let p = pi[t];
                        *g = if target[t] == 0.0 || !(XENT_CLAMP..=1.0).contains(&p) {
                            0.0
                        } else {
                            -target[t] / p
                        };
                    }
                    g_out.assign(&u.dot(&dl_dyhat));
                }
                v
            }
            Loss::Mse => {
                let y_hat = p_out.dot(&d);
                let v = mse_unchecked(y_hat.view(), target);
                if with_grad {
                    let scale = 2.0 / ny as f64;
                    for t in 0..ny {
                        dl_dyhat[t] = scale * (y_hat[t] - target[t]);
                    }
                    g_out.assign(&d.dot(&dl_dyhat));
                }
                v
            }
        };
        total += value;
        let Some(g) = grads.as_mut() else { continue };

        // Output components.
        if let Some(gy) = g.y_components.as_mut() {
            for j in 0..m {
                let pj = p_out[j] * inv_b;
                if pj == 0.0 {
                    continue;
                }
                let dj = d.row(j);
                let mut row = gy.row_mut(j);
                match loss {
                    Loss::CrossEntropy => {
                        let s: f64 = dj.dot(&dj);
                        if s == 0.0 {
                            continue;
                        }
                        for k in 0..ny {
                            row[k] += pj * 2.0 * dj[k] / s * (dl_dyhat[k] - g_out[j]);
                        }
                    }
                    Loss::Mse => row.scaled_add(pj, &dl_dyhat),
                }
            }
        }

        // Back through the responsibilities to logits, x components and σ.
        for (l, xl) in rows.rows().into_iter().enumerate() {
            let r = resp.row(l);
            let g_bar = r.dot(&g_out);
            let ql = q[l] * inv_b;
            for k in 0..m {
                let coef = ql * r[k] * (g_out[k] - g_bar);
                g.logits[k] += coef;
                if !degenerate[l] {
                    sx.add_log_grad(xl, k, coef, g.x_components.row_mut(k), &mut g.log_sigma_x);
                }
            }
        }
    }
    Ok((total * inv_b, grads))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{JointKDM, KernelDensityMatrix};
    use crate::inference::{infer, point_kdm};
    use crate::training::params::Trainable;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const ALL: Trainable = Trainable {
        y_components: true,
        sigma_x: true,
        sigma_y: true,
    };

    fn random_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Array2<f64> {
        Array2::from_shape_fn((r, c), |_| rng.random_range(-1.0..1.0))
    }

    fn side(rng: &mut ChaCha8Rng, m: usize, n: usize, rbf: bool) -> SideParams {
        SideParams {
            components: random_matrix(rng, m, n),
            kernel: if rbf {
                SideKernel::Rbf {
                    log_sigma: rng.random_range(-0.3..0.5),
                }
            } else {
                SideKernel::Cosine
            },
        }
    }

    fn logits(rng: &mut ChaCha8Rng, m: usize) -> Array1<f64> {
        Array1::from_shape_fn(m, |_| rng.random_range(-1.0..1.0))
    }

    /// Central differences of the scalar objective in every coordinate.
    fn check_fd(params: &ModelParams, obj: &Objective) {
        let (_, g) = objective_gradients(params, obj).unwrap();
        let analytic = g.flatten(params, ALL);
        let theta = params.flatten(ALL);
        let h = 1e-5;
        for (i, a) in analytic.iter().enumerate() {
            let mut p = params.clone();
            let mut t = theta.clone();
            t[i] = theta[i] + h;
            p.unflatten(ALL, &t);
            let up = objective_value(&p, obj).unwrap();
            t[i] = theta[i] - h;
            p.unflatten(ALL, &t);
            let down = objective_value(&p, obj).unwrap();
            let fd = (up - down) / (2.0 * h);
            let err = (a - fd).abs() / fd.abs().max(a.abs()).max(1e-3);
            assert!(err < 1e-4, "coord {i}: analytic {a} vs fd {fd}");
        }
    }

    #[test]
    fn xent_examples() {
        let v = loss_xent(array![1.0, 0.0].view(), array![1.0, 0.0].view()).unwrap();
        assert_eq!(v, 0.0);
        let v = loss_xent(array![0.5, 0.5].view(), array![1.0, 0.0].view()).unwrap();
        assert!((v - 2f64.ln()).abs() < 1e-15);
        let v = loss_xent(array![0.0, 1.0].view(), array![1.0, 0.0].view()).unwrap();
        assert!((v - 12.0 * 10f64.ln()).abs() < 1e-9);
        assert!(loss_xent(array![1.0].view(), array![1.0, 0.0].view()).is_err());
        assert!(loss_xent(array![0.7, 0.7].view(), array![1.0, 0.0].view()).is_err());
    }

    #[test]
    fn xent_matches_formula_on_random_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let raw: Vec<f64> = (0..4).map(|_| rng.random_range(0.01..1.0)).collect();
            let s: f64 = raw.iter().sum();
            let pi: Array1<f64> = raw.iter().map(|v| v / s).collect();
            let t = rng.random_range(0..4);
            let mut y = Array1::zeros(4);
            y[t] = 1.0;
            let v = loss_xent(pi.view(), y.view()).unwrap();
            assert!((v + pi[t].ln()).abs() < 1e-14);
        }
    }

    #[test]
    fn mse_examples() {
        assert_eq!(loss_mse(array![1.0, 2.0].view(), array![1.0, 2.0].view()).unwrap(), 0.0);
        assert_eq!(loss_mse(array![0.0].view(), array![2.0].view()).unwrap(), 4.0);
        assert!(loss_mse(array![0.0].view(), array![2.0, 1.0].view()).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = random_matrix(&mut rng, 1, 5).row(0).to_owned();
        let b = random_matrix(&mut rng, 1, 5).row(0).to_owned();
        let direct: f64 = (0..5).map(|i| (a[i] - b[i]).powi(2)).sum::<f64>() / 5.0;
        assert!((loss_mse(a.view(), b.view()).unwrap() - direct).abs() < 1e-15);
    }

    #[test]
    fn likelihood_value_matches_kdm() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = ModelParams {
            x: side(&mut rng, 4, 2, true),
            y: None,
            logits: logits(&mut rng, 4),
        };
        let x = random_matrix(&mut rng, 6, 2);
        let kdm = p.to_kdm().unwrap();
        let expected = -kdm.log_likelihood(x.view()).unwrap() / 6.0;
        let v = objective_value(&p, &Objective::Likelihood { x: x.view(), y: None }).unwrap();
        assert!((v - expected).abs() < 1e-12, "{v} vs {expected}");
    }

    #[test]
    fn discriminative_value_matches_inference() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let p = ModelParams {
            x: side(&mut rng, 5, 3, true),
            y: Some(side(&mut rng, 5, 2, false)),
            logits: logits(&mut rng, 5),
        };
        let joint: JointKDM = p.to_joint().unwrap();
        let xs = random_matrix(&mut rng, 4, 3);
        let inputs: Vec<WeightedInput> = xs
            .rows()
            .into_iter()
            .map(|r| WeightedInput {
                rows: r.to_owned().insert_axis(ndarray::Axis(0)),
                weights: array![1.0],
            })
            .collect();
        let targets = array![[1.0, 0.0], [0.0, 1.0], [0.0, 1.0], [1.0, 0.0]];
        let obj = Objective::Discriminative {
            inputs: &inputs,
            targets: targets.view(),
            loss: Loss::CrossEntropy,
        };
        let mut expected = 0.0;
        for (r, t) in xs.rows().into_iter().zip(targets.rows()) {
            let out: KernelDensityMatrix = infer(&point_kdm(r, joint.x_kernel()).unwrap(), &joint)
                .unwrap()
                .output;
            expected += loss_xent(out.categorical_pmf().unwrap().view(), t).unwrap();
        }
        expected /= 4.0;
        let v = objective_value(&p, &obj).unwrap();
        assert!((v - expected).abs() < 1e-12);
    }

    #[test]
    fn likelihood_gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for case in 0..20 {
            let joint = case % 2 == 1;
            let m = rng.random_range(1..5);
            let p = ModelParams {
                x: side(&mut rng, m, 2, case % 4 != 2),
                y: joint.then(|| side(&mut rng, m, 1, case % 3 != 0)),
                logits: logits(&mut rng, m),
            };
            let x = random_matrix(&mut rng, 7, 2);
            let y = random_matrix(&mut rng, 7, 1);
            let obj = Objective::Likelihood {
                x: x.view(),
                y: joint.then(|| y.view()),
            };
            check_fd(&p, &obj);
        }
    }

    #[test]
    fn xent_gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for case in 0..20 {
            let m = rng.random_range(2..6);
            let p = ModelParams {
                x: side(&mut rng, m, 3, case % 3 != 0),
                y: Some(side(&mut rng, m, 3, false)),
                logits: logits(&mut rng, m),
            };
            let inputs: Vec<WeightedInput> = (0..5)
                .map(|_| {
                    let rows = rng.random_range(1..4);
                    let raw = Array1::from_shape_fn(rows, |_| rng.random_range(0.1..1.0));
                    let s = raw.sum();
                    WeightedInput {
                        rows: random_matrix(&mut rng, rows, 3),
                        weights: raw / s,
                    }
                })
                .collect();
            let targets = Array2::from_shape_fn((5, 3), |_| rng.random_range(0.1..1.0));
            let targets = &targets / &targets.sum_axis(ndarray::Axis(1)).insert_axis(ndarray::Axis(1));
            let obj = Objective::Discriminative {
                inputs: &inputs,
                targets: targets.view(),
                loss: Loss::CrossEntropy,
            };
            check_fd(&p, &obj);
        }
    }

    #[test]
    fn mse_gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for case in 0..20 {
            let m = rng.random_range(1..6);
            let p = ModelParams {
                x: side(&mut rng, m, 2, case % 4 != 0),
                y: Some(side(&mut rng, m, 2, true)),
                logits: logits(&mut rng, m),
            };
            let inputs: Vec<WeightedInput> = (0..6)
                .map(|_| WeightedInput {
                    rows: random_matrix(&mut rng, 1, 2),
                    weights: array![1.0],
                })
                .collect();
            let targets = random_matrix(&mut rng, 6, 2);
            let obj = Objective::Discriminative {
                inputs: &inputs,
                targets: targets.view(),
                loss: Loss::Mse,
            };
            check_fd(&p, &obj);
        }
    }

    #[test]
    fn symmetric_configuration_has_symmetric_gradients() {
        let p = ModelParams {
            x: SideParams {
                components: array![[-1.0], [1.0]],
                kernel: SideKernel::Rbf { log_sigma: 0.0 },
            },
            y: None,
            logits: array![0.0, 0.0],
        };
        let x = array![[-0.5], [0.5]];
        let (_, g) =
            objective_gradients(&p, &Objective::Likelihood { x: x.view(), y: None }).unwrap();
        assert!((g.x_components[[0, 0]] + g.x_components[[1, 0]]).abs() < 1e-15);
        assert!(g.logits[0].abs() < 1e-15 && g.logits[1].abs() < 1e-15);
    }

    #[test]
    fn underflowed_rows_fall_back_to_prior() {
        let p = ModelParams {
            x: SideParams {
                components: array![[0.0], [1.0]],
                kernel: SideKernel::Rbf {
                    log_sigma: (0.01f64).ln(),
                },
            },
            y: Some(SideParams {
                components: array![[1.0, 0.0], [0.0, 1.0]],
                kernel: SideKernel::Cosine,
            }),
            logits: array![0.0, 0.0],
        };
        let inputs = vec![WeightedInput {
            rows: array![[500.0]],
            weights: array![1.0],
        }];
        let targets = array![[1.0, 0.0]];
        let obj = Objective::Discriminative {
            inputs: &inputs,
            targets: targets.view(),
            loss: Loss::CrossEntropy,
        };
        let (v, g) = objective_gradients(&p, &obj).unwrap();
        assert!((v - 2f64.ln()).abs() < 1e-12);
        assert!(g.x_components.iter().all(|v| *v == 0.0));
        assert!(g.log_sigma_x == 0.0);
    }
}
