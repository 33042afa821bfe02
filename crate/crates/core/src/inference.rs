//! Inference through a joint KDM: maps an input KDM over `x` to an output KDM
//! over `y` whose components are the joint's `y` components and whose weights
//! are
//!
//! ```text
//! p''_i = Σ_ℓ p_ℓ · p'_i k_X²(x_ℓ, x'_i) / Σ_j p'_j k_X²(x_ℓ, x'_j)
//! ```
//!
//! Cost is `O(m · m' · n)`. Reversing the joint swaps the roles of `x` and `y`,
//! and an output can be fed into another joint whose `x` kernel matches.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::density::{JointKDM, KernelDensityMatrix};
use crate::error::{KdmError, Result};
use crate::kernels::{KernelSpec, SIGMA_TOLERANCE};

/// Denominators below this count as total kernel underflow; the affected
/// input component then falls back to the joint's prior weights.
pub const DEGENERATE_DENOMINATOR: f64 = 1e-300;

#[derive(Clone, Debug)]
pub struct InferenceResult {
    pub output: KernelDensityMatrix,
    /// Row `ℓ` holds the conditional weights of input component `ℓ` over the
    /// joint components; each row sums to one.
    pub responsibilities: Array2<f64>,
}

/// Single-component KDM at `x`.
pub fn point_kdm(x: ArrayView1<f64>, kernel: &KernelSpec) -> Result<KernelDensityMatrix> {
    KernelDensityMatrix::new(
        x.to_owned().insert_axis(Axis(0)),
        Array1::ones(1),
        kernel.clone(),
    )
}

pub(crate) fn check_kernels_match(input: &KernelSpec, joint: &KernelSpec) -> Result<()> {
    if input.approx_eq(joint, SIGMA_TOLERANCE) {
        Ok(())
    } else {
        Err(KdmError::KernelMismatch(format!(
            "input kernel {} does not match joint x kernel {}",
            serde_json::to_string(input).unwrap_or_default(),
            serde_json::to_string(joint).unwrap_or_default()
        )))
    }
}

/// Conditional weights for each row of `inputs` given the joint.
pub(crate) fn responsibilities(
    inputs: ArrayView2<f64>,
    x_components: ArrayView2<f64>,
    prior: ArrayView1<f64>,
    kernel: &KernelSpec,
) -> Array2<f64> {
    let mut resp = kernel.gram_sq_unchecked(inputs, x_components);
    for mut row in resp.rows_mut() {
        row.zip_mut_with(&prior, |k, p| *k *= p);
        let denom = row.sum();
        if denom < DEGENERATE_DENOMINATOR || !denom.is_finite() {
            row.assign(&prior);
        } else {
            row.mapv_inplace(|v| v / denom);
        }
    }
    resp
}

pub fn infer(rho_x: &KernelDensityMatrix, joint: &JointKDM) -> Result<InferenceResult> {
    check_kernels_match(rho_x.kernel(), joint.x_kernel())?;
    let resp = responsibilities(
        rho_x.components(),
        joint.x_components(),
        joint.weights(),
        joint.x_kernel(),
    );
    let weights = rho_x.weights().dot(&resp);
    let output = KernelDensityMatrix::new(
        joint.y_components().to_owned(),
        weights,
        joint.y_kernel().clone(),
    )?;
    Ok(InferenceResult {
        output,
        responsibilities: resp,
    })
}

/// Inference in the reverse direction: from a distribution over `y` to one
/// over `x`.
pub fn infer_reverse(rho_y: &KernelDensityMatrix, joint: &JointKDM) -> Result<InferenceResult> {
    infer(rho_y, &joint.reversed())
}

/// Mixture mean `ŷ = Σ_i p''_i y'_i` of an RBF output.
pub fn predict_mean(result: &InferenceResult) -> Result<Array1<f64>> {
    let out = &result.output;
    if !out.kernel().is_rbf() {
        return Err(KdmError::WrongKernelKind {
            expected: "rbf",
            found: out.kernel().kind_name(),
        });
    }
    Ok(out.weights().dot(&out.components()))
}

/// Conditional density `f̂(y | x0)` under the joint.
///
/// Equals `f̂(x0, y) / (M_X Σ_j p'_j k_X²(x0, x'_j))`. Under total underflow
/// of the denominator the prior fallback used by [`infer`] applies, which
/// makes the conditional the `y` marginal.
pub fn conditional_density(
    joint: &JointKDM,
    x0: ArrayView1<f64>,
    y: ArrayView1<f64>,
) -> Result<f64> {
    joint.x_kernel().check_point(x0)?;
    joint.y_kernel().check_point(y)?;
    let kx = joint.x_kernel();
    let ky = joint.y_kernel();
    let mut num = 0.0;
    let mut den = 0.0;
    let mut marginal = 0.0;
    for i in 0..joint.len() {
        let p = joint.weights()[i];
        let ax = p * kx.eval_sq_unchecked(x0, joint.x_components().row(i));
        let by = ky.eval_sq_unchecked(y, joint.y_components().row(i));
        num += ax * by;
        den += ax;
        marginal += p * by;
    }
    let my = ky.norm_const();
    if den < DEGENERATE_DENOMINATOR {
        Ok(my * marginal)
    } else {
        Ok(my * num / den)
    }
}

/// Batch forward inference over query rows; one result per row.
pub fn infer_points(queries: ArrayView2<f64>, joint: &JointKDM) -> Result<Vec<InferenceResult>> {
    queries
        .rows()
        .into_iter()
        .map(|q| infer(&point_kdm(q, joint.x_kernel())?, joint))
        .collect()
}

/// Output PMF for each query row under a joint with a cosine `y` kernel.
/// Equal to `categorical_pmf(infer(point_kdm(row), joint).output)`.
pub fn predict_pmf(queries: ArrayView2<f64>, joint: &JointKDM) -> Result<Array2<f64>> {
    if !joint.y_kernel().is_cosine() {
        return Err(KdmError::WrongKernelKind {
            expected: "cosine",
            found: joint.y_kernel().kind_name(),
        });
    }
    joint.x_kernel().check_rows(queries)?;
    let resp = responsibilities(queries, joint.x_components(), joint.weights(), joint.x_kernel());
    let mut out = Array2::zeros((queries.nrows(), joint.y_kernel().dim()));
    for (mut o, r) in out.rows_mut().into_iter().zip(resp.rows()) {
        o.assign(&crate::density::categorical_from_rows(joint.y_components(), r));
    }
    Ok(out)
}

/// Mixture mean of the output for each query row under an rbf `y` kernel.
pub fn predict_means(queries: ArrayView2<f64>, joint: &JointKDM) -> Result<Array2<f64>> {
    if !joint.y_kernel().is_rbf() {
        return Err(KdmError::WrongKernelKind {
            expected: "rbf",
            found: joint.y_kernel().kind_name(),
        });
    }
    joint.x_kernel().check_rows(queries)?;
    let resp = responsibilities(queries, joint.x_components(), joint.weights(), joint.x_kernel());
    Ok(resp.dot(&joint.y_components()))
}
