//! Kernel density matrices and joint kernel density matrices.

use ndarray::{concatenate, Array1, Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{KdmError, Result};
use crate::kernels::KernelSpec;

/// Added inside the log when computing log-likelihoods.
pub const LOG_EPS: f64 = 1e-30;

const NEG_WEIGHT_TOL: f64 = 1e-12;
const SUM_TOL: f64 = 1e-9;

/// A distribution given by components, simplex weights and a kernel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "KdmRepr", into = "KdmRepr")]
pub struct KernelDensityMatrix {
    components: Array2<f64>,
    weights: Array1<f64>,
    kernel: KernelSpec,
}

/// Which side of a joint KDM to keep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    X,
    Y,
}

/// A KDM over paired `(x, y)` components with the product kernel `k_X ⊗ k_Y`,
/// stored factored so either side's Gram matrix is available on its own.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "JointRepr", into = "JointRepr")]
pub struct JointKDM {
    x_components: Array2<f64>,
    y_components: Array2<f64>,
    weights: Array1<f64>,
    x_kernel: KernelSpec,
    y_kernel: KernelSpec,
}

/// Clamps tiny negatives and renormalizes weights onto the simplex.
pub(crate) fn normalize_weights(p: ArrayView1<f64>) -> Result<Array1<f64>> {
    if p.is_empty() {
        return Err(KdmError::BadWeights("need at least one weight".into()));
    }
    if let Some(bad) = p.iter().find(|w| !w.is_finite()) {
        return Err(KdmError::BadWeights(format!("non-finite weight {bad}")));
    }
    if let Some(bad) = p.iter().find(|w| **w < -NEG_WEIGHT_TOL) {
        return Err(KdmError::BadWeights(format!("negative weight {bad}")));
    }
    let mut w = p.mapv(|v| v.max(0.0));
    let sum = w.sum();
    if !(sum > 0.0) {
        return Err(KdmError::BadWeights("weights sum to zero".into()));
    }
    if (sum - 1.0).abs() > SUM_TOL {
        w /= sum;
    }
    Ok(w)
}

impl KernelDensityMatrix {
    pub fn new(components: Array2<f64>, weights: Array1<f64>, kernel: KernelSpec) -> Result<Self> {
        if components.nrows() == 0 {
            return Err(KdmError::BadWeights("a KDM needs at least one component".into()));
        }
        if weights.len() != components.nrows() {
            return Err(KdmError::DimMismatch {
                expected: components.nrows(),
                got: weights.len(),
            });
        }
        if components.iter().any(|v| !v.is_finite()) {
            return Err(KdmError::ShapeMismatch("non-finite component entry".into()));
        }
        kernel.check_rows(components.view())?;
        let weights = normalize_weights(weights.view())?;
        Ok(Self {
            components,
            weights,
            kernel,
        })
    }

    /// Components with uniform weights.
    pub fn uniform(components: Array2<f64>, kernel: KernelSpec) -> Result<Self> {
        let m = components.nrows();
        Self::new(components, Array1::from_elem(m, 1.0 / m.max(1) as f64), kernel)
    }

    pub fn components(&self) -> ArrayView2<'_, f64> {
        self.components.view()
    }

    pub fn weights(&self) -> ArrayView1<'_, f64> {
        self.weights.view()
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn len(&self) -> usize {
        self.components.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.components.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.components.ncols()
    }

    /// Projection function `f(x) = Σ p_i k²(x, c_i)`.
    pub fn project(&self, x: ArrayView1<f64>) -> Result<f64> {
        self.kernel.check_point(x)?;
        Ok(self.project_unchecked(x))
    }

    pub(crate) fn project_unchecked(&self, x: ArrayView1<f64>) -> f64 {
        self.components
            .rows()
            .into_iter()
            .zip(self.weights.iter())
            .map(|(c, p)| p * self.kernel.eval_sq_unchecked(x, c))
            .sum()
    }

    /// Probability density `M_k · f(x)`.
    pub fn density(&self, x: ArrayView1<f64>) -> Result<f64> {
        Ok(self.kernel.norm_const() * self.project(x)?)
    }

    /// `Σ_i log(density(X_i) + 1e-30)`.
    pub fn log_likelihood(&self, xs: ArrayView2<f64>) -> Result<f64> {
        if xs.nrows() == 0 {
            return Err(KdmError::EmptyDataset);
        }
        self.kernel.check_rows(xs)?;
        let m = self.kernel.norm_const();
        Ok(xs
            .rows()
            .into_iter()
            .map(|x| (m * self.project_unchecked(x) + LOG_EPS).ln())
            .sum())
    }

    /// Categorical PMF over the canonical basis encoded by a cosine KDM:
    /// `π_j = Σ_i p_i (c_ij / ‖c_i‖)²`.
    pub fn categorical_pmf(&self) -> Result<Array1<f64>> {
        if !self.kernel.is_cosine() {
            return Err(KdmError::WrongKernelKind {
                expected: "cosine",
                found: self.kernel.kind_name(),
            });
        }
        Ok(categorical_from_rows(self.components.view(), self.weights.view()))
    }
}

/// `π_j = Σ_i w_i c_ij² / ‖c_i‖²`; rows are assumed nonzero.
pub(crate) fn categorical_from_rows(rows: ArrayView2<f64>, weights: ArrayView1<f64>) -> Array1<f64> {
    let mut pi = Array1::zeros(rows.ncols());
    for (row, w) in rows.rows().into_iter().zip(weights.iter()) {
        let norm: f64 = row.iter().map(|v| v * v).sum();
        for (p, v) in pi.iter_mut().zip(row.iter()) {
            *p += w * v * v / norm;
        }
    }
    pi
}

impl JointKDM {
    pub fn new(
        x_components: Array2<f64>,
        y_components: Array2<f64>,
        weights: Array1<f64>,
        x_kernel: KernelSpec,
        y_kernel: KernelSpec,
    ) -> Result<Self> {
        if x_components.nrows() != y_components.nrows() {
            return Err(KdmError::ShapeMismatch(format!(
                "{} x components but {} y components",
                x_components.nrows(),
                y_components.nrows()
            )));
        }
        let x = KernelDensityMatrix::new(x_components, weights, x_kernel)?;
        let KernelDensityMatrix {
            components: x_components,
            weights,
            kernel: x_kernel,
        } = x;
        if y_components.iter().any(|v| !v.is_finite()) {
            return Err(KdmError::ShapeMismatch("non-finite component entry".into()));
        }
        y_kernel.check_rows(y_components.view())?;
        Ok(Self {
            x_components,
            y_components,
            weights,
            x_kernel,
            y_kernel,
        })
    }

    pub fn x_components(&self) -> ArrayView2<'_, f64> {
        self.x_components.view()
    }

    pub fn y_components(&self) -> ArrayView2<'_, f64> {
        self.y_components.view()
    }

    pub fn weights(&self) -> ArrayView1<'_, f64> {
        self.weights.view()
    }

    pub fn x_kernel(&self) -> &KernelSpec {
        &self.x_kernel
    }

    pub fn y_kernel(&self) -> &KernelSpec {
        &self.y_kernel
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn norm_const(&self) -> f64 {
        self.x_kernel.norm_const() * self.y_kernel.norm_const()
    }

    /// `Σ p_i k_X²(x, x_i) k_Y²(y, y_i)`.
    pub fn project(&self, x: ArrayView1<f64>, y: ArrayView1<f64>) -> Result<f64> {
        self.x_kernel.check_point(x)?;
        self.y_kernel.check_point(y)?;
        Ok(self.project_unchecked(x, y))
    }

    pub(crate) fn project_unchecked(&self, x: ArrayView1<f64>, y: ArrayView1<f64>) -> f64 {
        (0..self.len())
            .map(|i| {
                self.weights[i]
                    * self.x_kernel.eval_sq_unchecked(x, self.x_components.row(i))
                    * self.y_kernel.eval_sq_unchecked(y, self.y_components.row(i))
            })
            .sum()
    }

    /// Joint density `M_X M_Y Σ p_i k_X² k_Y²`.
    pub fn density(&self, x: ArrayView1<f64>, y: ArrayView1<f64>) -> Result<f64> {
        Ok(self.norm_const() * self.project(x, y)?)
    }

    /// `Σ_i log(joint density(X_i, Y_i) + 1e-30)`.
    pub fn log_likelihood(&self, xs: ArrayView2<f64>, ys: ArrayView2<f64>) -> Result<f64> {
        if xs.nrows() == 0 {
            return Err(KdmError::EmptyDataset);
        }
        if xs.nrows() != ys.nrows() {
            return Err(KdmError::ShapeMismatch("x and y row counts differ".into()));
        }
        self.x_kernel.check_rows(xs)?;
        self.y_kernel.check_rows(ys)?;
        let m = self.norm_const();
        Ok((0..xs.nrows())
            .map(|i| (m * self.project_unchecked(xs.row(i), ys.row(i)) + LOG_EPS).ln())
            .sum())
    }

    /// Marginal KDM of one side: that side's components, same weights.
    pub fn marginal(&self, keep: Side) -> KernelDensityMatrix {
        let (components, kernel) = match keep {
            Side::X => (self.x_components.clone(), self.x_kernel.clone()),
            Side::Y => (self.y_components.clone(), self.y_kernel.clone()),
        };
        KernelDensityMatrix {
            components,
            weights: self.weights.clone(),
            kernel,
        }
    }

    /// Swaps the x and y sides.
    pub fn reversed(&self) -> JointKDM {
        JointKDM {
            x_components: self.y_components.clone(),
            y_components: self.x_components.clone(),
            weights: self.weights.clone(),
            x_kernel: self.y_kernel.clone(),
            y_kernel: self.x_kernel.clone(),
        }
    }

    /// Flattened form: concatenated rows with a product kernel.
    pub fn to_product_kdm(&self) -> KernelDensityMatrix {
        let components = concatenate(
            Axis(1),
            &[self.x_components.view(), self.y_components.view()],
        )
        .expect("row counts agree");
        KernelDensityMatrix {
            components,
            weights: self.weights.clone(),
            kernel: KernelSpec::product(self.x_kernel.clone(), self.y_kernel.clone()),
        }
    }

    /// Inverse of [`JointKDM::to_product_kdm`].
    pub fn from_product_kdm(kdm: &KernelDensityMatrix) -> Result<Self> {
        let KernelSpec::Product(kx, ky) = kdm.kernel() else {
            return Err(KdmError::WrongKernelKind {
                expected: "product",
                found: kdm.kernel().kind_name(),
            });
        };
        let split = kx.dim();
        let (xs, ys) = kdm.components().split_at(Axis(1), split);
        Ok(JointKDM {
            x_components: xs.to_owned(),
            y_components: ys.to_owned(),
            weights: kdm.weights.clone(),
            x_kernel: (**kx).clone(),
            y_kernel: (**ky).clone(),
        })
    }
}

pub(crate) fn rows_to_vecs(a: ArrayView2<f64>) -> Vec<Vec<f64>> {
    a.rows().into_iter().map(|r| r.to_vec()).collect()
}

pub(crate) fn vecs_to_rows(rows: Vec<Vec<f64>>) -> Result<Array2<f64>> {
    let ncols = rows.first().map_or(0, Vec::len);
    if let Some(bad) = rows.iter().find(|r| r.len() != ncols) {
        return Err(KdmError::DimMismatch {
            expected: ncols,
            got: bad.len(),
        });
    }
    let nrows = rows.len();
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    Array2::from_shape_vec((nrows, ncols), flat)
        .map_err(|e| KdmError::ShapeMismatch(e.to_string()))
}

#[derive(Serialize, Deserialize)]
struct KdmRepr {
    components: Vec<Vec<f64>>,
    weights: Vec<f64>,
    kernel: KernelSpec,
}

impl From<KernelDensityMatrix> for KdmRepr {
    fn from(k: KernelDensityMatrix) -> Self {
        KdmRepr {
            components: rows_to_vecs(k.components.view()),
            weights: k.weights.to_vec(),
            kernel: k.kernel,
        }
    }
}

impl TryFrom<KdmRepr> for KernelDensityMatrix {
    type Error = KdmError;

    fn try_from(r: KdmRepr) -> Result<Self> {
        KernelDensityMatrix::new(vecs_to_rows(r.components)?, Array1::from(r.weights), r.kernel)
    }
}

#[derive(Serialize, Deserialize)]
struct JointRepr {
    x_components: Vec<Vec<f64>>,
    y_components: Vec<Vec<f64>>,
    weights: Vec<f64>,
    x_kernel: KernelSpec,
    y_kernel: KernelSpec,
}

impl From<JointKDM> for JointRepr {
    fn from(j: JointKDM) -> Self {
        JointRepr {
            x_components: rows_to_vecs(j.x_components.view()),
            y_components: rows_to_vecs(j.y_components.view()),
            weights: j.weights.to_vec(),
            x_kernel: j.x_kernel,
            y_kernel: j.y_kernel,
        }
    }
}

impl TryFrom<JointRepr> for JointKDM {
    type Error = KdmError;

    fn try_from(r: JointRepr) -> Result<Self> {
        JointKDM::new(
            vecs_to_rows(r.x_components)?,
            vecs_to_rows(r.y_components)?,
            Array1::from(r.weights),
            r.x_kernel,
            r.y_kernel,
        )
    }
}
