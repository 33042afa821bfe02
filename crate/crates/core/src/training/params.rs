//! Unconstrained parameterization of a (joint) KDM for gradient descent:
//! weights through softmax logits, bandwidths through their logarithm.

use ndarray::{Array1, Array2};

use crate::density::{JointKDM, KernelDensityMatrix};
use crate::error::{KdmError, Result};
use crate::kernels::KernelSpec;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SideKernel {
    Cosine,
    Rbf { log_sigma: f64 },
}

impl SideKernel {
    pub fn from_spec(spec: &KernelSpec) -> Result<Self> {
        match spec {
            KernelSpec::Cosine { .. } => Ok(SideKernel::Cosine),
            KernelSpec::Rbf { sigma, .. } => Ok(SideKernel::Rbf {
                log_sigma: sigma.ln(),
            }),
            KernelSpec::Product(..) => Err(KdmError::InvalidKernel(
                "training supports cosine and rbf kernels per side".into(),
            )),
        }
    }

    pub fn to_spec(self, dim: usize) -> Result<KernelSpec> {
        match self {
            SideKernel::Cosine => KernelSpec::cosine(dim),
            SideKernel::Rbf { log_sigma } => KernelSpec::rbf(dim, log_sigma.exp()),
        }
    }

    pub fn sigma(self) -> Option<f64> {
        match self {
            SideKernel::Rbf { log_sigma } => Some(log_sigma.exp()),
            SideKernel::Cosine => None,
        }
    }

    /// log of the normalization constant and its derivative in log σ.
    pub(crate) fn log_norm_const(self, dim: usize) -> (f64, f64) {
        match self {
            SideKernel::Cosine => (0.0, 0.0),
            SideKernel::Rbf { log_sigma } => {
                let n = dim as f64;
                (
                    -0.5 * n * std::f64::consts::PI.ln() - n * log_sigma,
                    -n,
                )
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SideParams {
    pub components: Array2<f64>,
    pub kernel: SideKernel,
}

impl SideParams {
    pub fn dim(&self) -> usize {
        self.components.ncols()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    pub x: SideParams,
    pub y: Option<SideParams>,
    pub logits: Array1<f64>,
}

/// Gradients with the same layout as [`ModelParams`].
#[derive(Clone, Debug, PartialEq)]
pub struct ModelGrads {
    pub x_components: Array2<f64>,
    pub y_components: Option<Array2<f64>>,
    pub logits: Array1<f64>,
    pub log_sigma_x: f64,
    pub log_sigma_y: f64,
}

pub(crate) fn softmax(logits: &Array1<f64>) -> Array1<f64> {
    let max = logits.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let e = logits.mapv(|v| (v - max).exp());
    let s = e.sum();
    e / s
}

fn logits_from_weights(w: ndarray::ArrayView1<f64>) -> Array1<f64> {
    w.mapv(|p| p.max(1e-300).ln())
}

impl ModelParams {
    pub fn len(&self) -> usize {
        self.logits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.logits.is_empty()
    }

    pub fn weights(&self) -> Array1<f64> {
        softmax(&self.logits)
    }

    pub fn from_kdm(kdm: &KernelDensityMatrix) -> Result<Self> {
        Ok(Self {
            x: SideParams {
                components: kdm.components().to_owned(),
                kernel: SideKernel::from_spec(kdm.kernel())?,
            },
            y: None,
            logits: logits_from_weights(kdm.weights()),
        })
    }

    pub fn from_joint(joint: &JointKDM) -> Result<Self> {
        Ok(Self {
            x: SideParams {
                components: joint.x_components().to_owned(),
                kernel: SideKernel::from_spec(joint.x_kernel())?,
            },
            y: Some(SideParams {
                components: joint.y_components().to_owned(),
                kernel: SideKernel::from_spec(joint.y_kernel())?,
            }),
            logits: logits_from_weights(joint.weights()),
        })
    }

    pub fn to_kdm(&self) -> Result<KernelDensityMatrix> {
        KernelDensityMatrix::new(
            self.x.components.clone(),
            self.weights(),
            self.x.kernel.to_spec(self.x.dim())?,
        )
    }

    pub fn to_joint(&self) -> Result<JointKDM> {
        let y = self
            .y
            .as_ref()
            .ok_or_else(|| KdmError::InvalidConfig("model has no y side".into()))?;
        JointKDM::new(
            self.x.components.clone(),
            y.components.clone(),
            self.weights(),
            self.x.kernel.to_spec(self.x.dim())?,
            y.kernel.to_spec(y.dim())?,
        )
    }

    pub fn zero_grads(&self) -> ModelGrads {
        ModelGrads {
            x_components: Array2::zeros(self.x.components.raw_dim()),
            y_components: self.y.as_ref().map(|y| Array2::zeros(y.components.raw_dim())),
            logits: Array1::zeros(self.logits.len()),
            log_sigma_x: 0.0,
            log_sigma_y: 0.0,
        }
    }

    pub fn is_finite(&self) -> bool {
        let side_ok = |s: &SideParams| {
            s.components.iter().all(|v| v.is_finite())
                && match s.kernel {
                    SideKernel::Rbf { log_sigma } => log_sigma.is_finite(),
                    SideKernel::Cosine => true,
                }
        };
        side_ok(&self.x)
            && self.y.as_ref().is_none_or(side_ok)
            && self.logits.iter().all(|v| v.is_finite())
    }
}

/// Which parameter groups an optimizer step touches.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Trainable {
    pub y_components: bool,
    pub sigma_x: bool,
    pub sigma_y: bool,
}

impl ModelParams {
    /// Flattens trainable parameters in a fixed order: x components,
    /// y components, logits, log σ_x, log σ_y.
    pub(crate) fn flatten(&self, t: Trainable) -> Vec<f64> {
        let mut v: Vec<f64> = self.x.components.iter().copied().collect();
        if let (true, Some(y)) = (t.y_components, &self.y) {
            v.extend(y.components.iter().copied());
        }
        v.extend(self.logits.iter().copied());
        if let (true, SideKernel::Rbf { log_sigma }) = (t.sigma_x, self.x.kernel) {
            v.push(log_sigma);
        }
        if let (true, Some(SideParams { kernel: SideKernel::Rbf { log_sigma }, .. })) =
            (t.sigma_y, &self.y)
        {
            v.push(*log_sigma);
        }
        v
    }

    pub(crate) fn unflatten(&mut self, t: Trainable, v: &[f64]) {
        let mut it = v.iter().copied();
        self.x.components.iter_mut().for_each(|c| *c = it.next().unwrap());
        if let (true, Some(y)) = (t.y_components, self.y.as_mut()) {
            y.components.iter_mut().for_each(|c| *c = it.next().unwrap());
        }
        self.logits.iter_mut().for_each(|c| *c = it.next().unwrap());
        if let (true, SideKernel::Rbf { log_sigma }) = (t.sigma_x, &mut self.x.kernel) {
            *log_sigma = it.next().unwrap();
        }
        if let (true, Some(SideParams { kernel: SideKernel::Rbf { log_sigma }, .. })) =
            (t.sigma_y, self.y.as_mut())
        {
            *log_sigma = it.next().unwrap();
        }
    }
}

impl ModelGrads {
    pub(crate) fn flatten(&self, params: &ModelParams, t: Trainable) -> Vec<f64> {
        let mut v: Vec<f64> = self.x_components.iter().copied().collect();
        if let (true, Some(y)) = (t.y_components, &self.y_components) {
            v.extend(y.iter().copied());
        }
        v.extend(self.logits.iter().copied());
        if t.sigma_x && matches!(params.x.kernel, SideKernel::Rbf { .. }) {
            v.push(self.log_sigma_x);
        }
        if t.sigma_y
            && matches!(
                params.y,
                Some(SideParams {
                    kernel: SideKernel::Rbf { .. },
                    ..
                })
            )
        {
            v.push(self.log_sigma_y);
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn round_trip_through_joint() {
        let j = JointKDM::new(
            array![[0.0, 1.0], [2.0, 3.0]],
            array![[1.0, 0.0], [0.0, 1.0]],
            array![0.25, 0.75],
            KernelSpec::rbf(2, 0.5).unwrap(),
            KernelSpec::cosine(2).unwrap(),
        )
        .unwrap();
        let p = ModelParams::from_joint(&j).unwrap();
        let back = p.to_joint().unwrap();
        for (a, b) in back.weights().iter().zip(j.weights().iter()) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!((back.x_kernel().sigma().unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn flatten_round_trip() {
        let mut p = ModelParams {
            x: SideParams {
                components: array![[1.0, 2.0], [3.0, 4.0]],
                kernel: SideKernel::Rbf { log_sigma: 0.1 },
            },
            y: Some(SideParams {
                components: array![[5.0], [6.0]],
                kernel: SideKernel::Rbf { log_sigma: 0.2 },
            }),
            logits: array![7.0, 8.0],
        };
        let all = Trainable {
            y_components: true,
            sigma_x: true,
            sigma_y: true,
        };
        let v = p.flatten(all);
        assert_eq!(v, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 0.1, 0.2]);
        let partial = Trainable {
            y_components: false,
            sigma_x: true,
            sigma_y: false,
        };
        let mut v = p.flatten(partial);
        assert_eq!(v.len(), 7);
        v[6] = -1.0;
        p.unflatten(partial, &v);
        assert_eq!(p.x.kernel, SideKernel::Rbf { log_sigma: -1.0 });
        assert_eq!(p.y.as_ref().unwrap().components, array![[5.0], [6.0]]);
    }

    #[test]
    fn softmax_is_stable() {
        let w = softmax(&array![1000.0, 1000.0, -1000.0]);
        assert!((w[0] - 0.5).abs() < 1e-15 && w[2] == 0.0);
        assert_eq!(softmax(&Array1::zeros(4)), Array1::from_elem(4, 0.25));
    }
}
