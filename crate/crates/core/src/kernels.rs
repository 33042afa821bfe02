//! Kernels with unit diagonal: cosine, Gaussian (RBF) and the tensor product
//! of two kernels.
//!
//! Everything downstream works with the *squared* kernel `k²`, which is what
//! enters the projection function of a density matrix.
//!
//! RBF convention: `k(x, y) = exp(-‖x - y‖² / (2σ²))`, hence
//! `k²(x, y) = exp(-‖x - y‖² / σ²)`, which is an unnormalized Gaussian with
//! per-dimension variance `σ²/2`. Consequently
//!
//! | quantity                          | value                    |
//! |-----------------------------------|--------------------------|
//! | normalization constant `M`        | `(π σ²)^(-n/2)`          |
//! | equivalent KDE bandwidth (std)    | `σ / √2`                 |
//! | sampling covariance               | `(σ² / 2) · I`           |
//!
//! so that `M · k²(·, c)` integrates to exactly one.

use std::f64::consts::PI;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{KdmError, Result};

/// Squared norms below this are treated as zero vectors by the cosine kernel.
const MIN_SQ_NORM: f64 = 1e-24;

/// Tolerance on sigma when comparing kernels structurally.
pub const SIGMA_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "KernelRepr", into = "KernelRepr")]
pub enum KernelSpec {
    Cosine { dim: usize },
    Rbf { dim: usize, sigma: f64 },
    Product(Box<KernelSpec>, Box<KernelSpec>),
}

/// Analytic gradient of `k²(x, y)`.
#[derive(Clone, Debug)]
pub struct KernelGrad {
    pub value: f64,
    pub dx: Array1<f64>,
    pub dy: Array1<f64>,
    /// One entry per RBF factor, in factor order (empty for cosine).
    pub dlog_sigma: Vec<f64>,
}

impl KernelSpec {
    pub fn cosine(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(KdmError::InvalidKernel("dim must be positive".into()));
        }
        Ok(KernelSpec::Cosine { dim })
    }

    pub fn rbf(dim: usize, sigma: f64) -> Result<Self> {
        if dim == 0 {
            return Err(KdmError::InvalidKernel("dim must be positive".into()));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(KdmError::InvalidKernel(format!(
                "rbf sigma must be positive and finite, got {sigma}"
            )));
        }
        Ok(KernelSpec::Rbf { dim, sigma })
    }

    pub fn product(first: KernelSpec, second: KernelSpec) -> Self {
        KernelSpec::Product(Box::new(first), Box::new(second))
    }

    pub fn dim(&self) -> usize {
        match self {
            KernelSpec::Cosine { dim } | KernelSpec::Rbf { dim, .. } => *dim,
            KernelSpec::Product(a, b) => a.dim() + b.dim(),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            KernelSpec::Cosine { .. } => "cosine",
            KernelSpec::Rbf { .. } => "rbf",
            KernelSpec::Product(..) => "product",
        }
    }

    pub fn is_cosine(&self) -> bool {
        matches!(self, KernelSpec::Cosine { .. })
    }

    pub fn is_rbf(&self) -> bool {
        matches!(self, KernelSpec::Rbf { .. })
    }

    pub fn sigma(&self) -> Option<f64> {
        match self {
            KernelSpec::Rbf { sigma, .. } => Some(*sigma),
            _ => None,
        }
    }

    pub fn log_sigma(&self) -> Option<f64> {
        self.sigma().map(f64::ln)
    }

    /// Same kernel with a new bandwidth; errors for non-RBF kernels.
    pub fn with_sigma(&self, sigma: f64) -> Result<Self> {
        match self {
            KernelSpec::Rbf { dim, .. } => KernelSpec::rbf(*dim, sigma),
            other => Err(KdmError::WrongKernelKind {
                expected: "rbf",
                found: other.kind_name(),
            }),
        }
    }

    /// Structural equality: same shape and kinds, sigmas within `tol`.
    pub fn approx_eq(&self, other: &KernelSpec, tol: f64) -> bool {
        match (self, other) {
            (KernelSpec::Cosine { dim: a }, KernelSpec::Cosine { dim: b }) => a == b,
            (
                KernelSpec::Rbf { dim: a, sigma: sa },
                KernelSpec::Rbf { dim: b, sigma: sb },
            ) => a == b && (sa - sb).abs() <= tol * sa.abs().max(1.0),
            (KernelSpec::Product(a1, b1), KernelSpec::Product(a2, b2)) => {
                a1.approx_eq(a2, tol) && b1.approx_eq(b2, tol)
            }
            _ => false,
        }
    }

    /// Checks that `x` is a valid point for this kernel.
    pub fn check_point(&self, x: ArrayView1<f64>) -> Result<()> {
        if x.len() != self.dim() {
            return Err(KdmError::DimMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        match self {
            KernelSpec::Cosine { .. } => {
                if sq_norm(x) < MIN_SQ_NORM {
                    return Err(KdmError::ZeroVector);
                }
                Ok(())
            }
            KernelSpec::Rbf { .. } => Ok(()),
            KernelSpec::Product(a, b) => {
                let (xa, xb) = x.split_at(ndarray::Axis(0), a.dim());
                a.check_point(xa)?;
                b.check_point(xb)
            }
        }
    }

    pub fn check_rows(&self, rows: ArrayView2<f64>) -> Result<()> {
        if rows.ncols() != self.dim() {
            return Err(KdmError::DimMismatch {
                expected: self.dim(),
                got: rows.ncols(),
            });
        }
        rows.rows().into_iter().try_for_each(|r| self.check_point(r))
    }

    /// `k²(x, y)`.
    pub fn eval_sq(&self, x: ArrayView1<f64>, y: ArrayView1<f64>) -> Result<f64> {
        self.check_point(x)?;
        self.check_point(y)?;
        Ok(self.eval_sq_unchecked(x, y))
    }

    /// `k²(x, y)` for inputs that already passed [`KernelSpec::check_point`].
    pub fn eval_sq_unchecked(&self, x: ArrayView1<f64>, y: ArrayView1<f64>) -> f64 {
        match self {
            KernelSpec::Cosine { .. } => {
                let a = dot(x, y);
                a * a / (sq_norm(x) * sq_norm(y))
            }
            KernelSpec::Rbf { sigma, .. } => (-sq_dist(x, y) / (sigma * sigma)).exp(),
            KernelSpec::Product(a, b) => {
                let split = a.dim();
                let (xa, xb) = x.split_at(ndarray::Axis(0), split);
                let (ya, yb) = y.split_at(ndarray::Axis(0), split);
                a.eval_sq_unchecked(xa, ya) * b.eval_sq_unchecked(xb, yb)
            }
        }
    }

    /// Matrix of `k²(X_i, Y_j)`; bit-identical to calling `eval_sq` per entry.
    pub fn gram_sq(&self, xs: ArrayView2<f64>, ys: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check_rows(xs)?;
        self.check_rows(ys)?;
        Ok(self.gram_sq_unchecked(xs, ys))
    }

    pub fn gram_sq_unchecked(&self, xs: ArrayView2<f64>, ys: ArrayView2<f64>) -> Array2<f64> {
        Array2::from_shape_fn((xs.nrows(), ys.nrows()), |(i, j)| {
            self.eval_sq_unchecked(xs.row(i), ys.row(j))
        })
    }

    /// Constant `M` that turns the projection function into a density.
    pub fn norm_const(&self) -> f64 {
        match self {
            KernelSpec::Cosine { .. } => 1.0,
            KernelSpec::Rbf { dim, sigma } => (PI * sigma * sigma).powf(-(*dim as f64) / 2.0),
            KernelSpec::Product(a, b) => a.norm_const() * b.norm_const(),
        }
    }

    /// Analytic gradients of `k²(x, y)` with respect to both points and to
    /// the log-bandwidth of every RBF factor.
    pub fn grad_sq(&self, x: ArrayView1<f64>, y: ArrayView1<f64>) -> Result<KernelGrad> {
        self.check_point(x)?;
        self.check_point(y)?;
        Ok(self.grad_sq_unchecked(x, y))
    }

    fn grad_sq_unchecked(&self, x: ArrayView1<f64>, y: ArrayView1<f64>) -> KernelGrad {
        match self {
            KernelSpec::Cosine { .. } => {
                let (value, dx) = cosine_sq_grad(x, y);
                let (_, dy) = cosine_sq_grad(y, x);
                KernelGrad {
                    value,
                    dx,
                    dy,
                    dlog_sigma: Vec::new(),
                }
            }
            KernelSpec::Rbf { sigma, .. } => {
                let s2 = sigma * sigma;
                let d2 = sq_dist(x, y);
                let value = (-d2 / s2).exp();
                let dx = (&x - &y) * (-2.0 * value / s2);
                let dy = -&dx;
                KernelGrad {
                    value,
                    dx,
                    dy,
                    dlog_sigma: vec![2.0 * value * d2 / s2],
                }
            }
            KernelSpec::Product(a, b) => {
                let split = a.dim();
                let (xa, xb) = x.split_at(ndarray::Axis(0), split);
                let (ya, yb) = y.split_at(ndarray::Axis(0), split);
                let ga = a.grad_sq_unchecked(xa, ya);
                let gb = b.grad_sq_unchecked(xb, yb);
                let concat = |u: &Array1<f64>, wu: f64, v: &Array1<f64>, wv: f64| {
                    u.iter()
                        .map(|g| g * wu)
                        .chain(v.iter().map(|g| g * wv))
                        .collect::<Array1<f64>>()
                };
                let dlog_sigma = ga
                    .dlog_sigma
                    .iter()
                    .map(|g| g * gb.value)
                    .chain(gb.dlog_sigma.iter().map(|g| g * ga.value))
                    .collect();
                KernelGrad {
                    value: ga.value * gb.value,
                    dx: concat(&ga.dx, gb.value, &gb.dx, ga.value),
                    dy: concat(&ga.dy, gb.value, &gb.dy, ga.value),
                    dlog_sigma,
                }
            }
        }
    }
}

/// Value and gradient w.r.t. `x` of `<x,y>² / (‖x‖²‖y‖²)`.
pub(crate) fn cosine_sq_grad(x: ArrayView1<f64>, y: ArrayView1<f64>) -> (f64, Array1<f64>) {
    let a = dot(x, y);
    let s = sq_norm(x);
    let t = sq_norm(y);
    let value = a * a / (s * t);
    let scale = 2.0 * a / (s * t);
    let grad = y
        .iter()
        .zip(x.iter())
        .map(|(yi, xi)| scale * (yi - a / s * xi))
        .collect();
    (value, grad)
}

pub(crate) fn dot(x: ArrayView1<f64>, y: ArrayView1<f64>) -> f64 {
    x.iter().zip(y.iter()).map(|(a, b)| a * b).sum()
}

pub(crate) fn sq_norm(x: ArrayView1<f64>) -> f64 {
    x.iter().map(|a| a * a).sum()
}

pub(crate) fn sq_dist(x: ArrayView1<f64>, y: ArrayView1<f64>) -> f64 {
    x.iter()
        .zip(y.iter())
        .map(|(a, b)| {
            let d = a - b;
            d * d
        })
        .sum()
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
enum KindRepr {
    Cosine,
    Rbf,
    Product,
}

/// JSON shape: `{"kind": "...", "sigma": float?, "dim": int, "factors": [...]?}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
struct KernelRepr {
    kind: KindRepr,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sigma: Option<f64>,
    dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    factors: Option<Vec<KernelRepr>>,
}

impl From<KernelSpec> for KernelRepr {
    fn from(k: KernelSpec) -> Self {
        let dim = k.dim();
        match k {
            KernelSpec::Cosine { .. } => KernelRepr {
                kind: KindRepr::Cosine,
                sigma: None,
                dim,
                factors: None,
            },
            KernelSpec::Rbf { sigma, .. } => KernelRepr {
                kind: KindRepr::Rbf,
                sigma: Some(sigma),
                dim,
                factors: None,
            },
            KernelSpec::Product(a, b) => KernelRepr {
                kind: KindRepr::Product,
                sigma: None,
                dim,
                factors: Some(vec![(*a).into(), (*b).into()]),
            },
        }
    }
}

impl TryFrom<KernelRepr> for KernelSpec {
    type Error = KdmError;

    fn try_from(r: KernelRepr) -> Result<Self> {
        match r.kind {
            KindRepr::Cosine => KernelSpec::cosine(r.dim),
            KindRepr::Rbf => {
                let sigma = r
                    .sigma
                    .ok_or_else(|| KdmError::InvalidKernel("rbf kernel needs sigma".into()))?;
                KernelSpec::rbf(r.dim, sigma)
            }
            KindRepr::Product => {
                let factors = r.factors.unwrap_or_default();
                if factors.len() != 2 {
                    return Err(KdmError::InvalidKernel(format!(
                        "product kernel needs exactly two factors, got {}",
                        factors.len()
                    )));
                }
                let mut it = factors.into_iter();
                let a = KernelSpec::try_from(it.next().unwrap())?;
                let b = KernelSpec::try_from(it.next().unwrap())?;
                let k = KernelSpec::product(a, b);
                if k.dim() != r.dim {
                    return Err(KdmError::InvalidKernel(format!(
                        "product dim {} does not match factor dims {}",
                        r.dim,
                        k.dim()
                    )));
                }
                Ok(k)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn cosine_identity_and_worked_projection() {
        let k = KernelSpec::cosine(3).unwrap();
        let e1 = array![1.0, 0.0, 0.0];
        assert_eq!(k.eval_sq(e1.view(), e1.view()).unwrap(), 1.0);
        let c = array![0.2f64.sqrt(), 0.3f64.sqrt(), 0.5f64.sqrt()];
        assert!(close(k.eval_sq(e1.view(), c.view()).unwrap(), 0.2, 1e-15));
    }

    #[test]
    fn rbf_unit_distance() {
        // k² = exp(-d²/σ²) with d = 1, σ = 1
        let k = KernelSpec::rbf(1, 1.0).unwrap();
        let v = k.eval_sq(array![0.0].view(), array![1.0].view()).unwrap();
        assert_eq!(v, (-1.0f64).exp());
        assert!(close(v.ln(), -1.0, 1e-15));
    }

    #[test]
    fn zero_vector_and_dim_errors() {
        let k = KernelSpec::cosine(2).unwrap();
        let err = k.eval_sq(array![0.0, 0.0].view(), array![1.0, 0.0].view());
        assert!(matches!(err, Err(KdmError::ZeroVector)));
        let err = k.eval_sq(array![1.0].view(), array![1.0, 0.0].view());
        assert!(matches!(err, Err(KdmError::DimMismatch { expected: 2, got: 1 })));
        assert!(KernelSpec::rbf(1, 0.0).is_err());
        assert!(KernelSpec::rbf(1, f64::NAN).is_err());
    }

    #[test]
    fn gram_of_canonical_basis_is_identity() {
        let k = KernelSpec::cosine(3).unwrap();
        let eye = Array2::<f64>::eye(3);
        assert_eq!(k.gram_sq(eye.view(), eye.view()).unwrap(), eye);
    }

    #[test]
    fn gram_reduces_to_eval() {
        let k = KernelSpec::rbf(1, 1.0).unwrap();
        let g = k
            .gram_sq(array![[0.0]].view(), array![[0.0], [1.0]].view())
            .unwrap();
        let e = k.eval_sq(array![0.0].view(), array![1.0].view()).unwrap();
        assert_eq!(g, array![[1.0, e]]);
    }

    #[test]
    fn gram_matches_elementwise_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let xs = Array2::from_shape_fn((4, 2), |_| rng.random_range(-2.0..2.0));
        let ys = Array2::from_shape_fn((5, 2), |_| rng.random_range(-2.0..2.0));
        for k in [KernelSpec::rbf(2, 0.8).unwrap(), KernelSpec::cosine(2).unwrap()] {
            let g = k.gram_sq(xs.view(), ys.view()).unwrap();
            for i in 0..4 {
                for j in 0..5 {
                    let e = k.eval_sq(xs.row(i), ys.row(j)).unwrap();
                    assert!(close(g[[i, j]], e, 1e-15));
                    assert_eq!(g[[i, j]].to_bits(), e.to_bits());
                }
            }
        }
    }

    #[test]
    fn norm_constants() {
        assert_eq!(KernelSpec::cosine(5).unwrap().norm_const(), 1.0);
        // quadrature oracle: ∫ exp(-x²) dx = √π
        let h = 1e-3;
        let integral: f64 = (-8000..=8000)
            .map(|i| {
                let x = i as f64 * h;
                (-x * x).exp() * h
            })
            .sum();
        let v1 = KernelSpec::rbf(1, 1.0).unwrap().norm_const();
        assert!(close(v1 * integral, 1.0, 1e-12));
        assert!(close(v1, 0.564_189_583_547_756_3, 1e-15));
        let p = KernelSpec::product(
            KernelSpec::rbf(1, 1.0).unwrap(),
            KernelSpec::cosine(3).unwrap(),
        );
        assert_eq!(p.norm_const(), v1);
    }

    #[test]
    fn rbf_normalization_by_quadrature() {
        for (n, sigma) in [(1usize, 0.7), (2, 1.3)] {
            let k = KernelSpec::rbf(n, sigma).unwrap();
            let steps = if n == 1 { 4000 } else { 400 };
            let h = 16.0 * sigma / steps as f64;
            let grid: Vec<f64> = (0..=steps).map(|i| -8.0 * sigma + i as f64 * h).collect();
            let origin = Array1::zeros(n);
            let mut total = 0.0;
            if n == 1 {
                for &x in &grid {
                    total += k.eval_sq(array![x].view(), origin.view()).unwrap() * h;
                }
            } else {
                for &x in &grid {
                    for &y in &grid {
                        total += k.eval_sq(array![x, y].view(), origin.view()).unwrap() * h * h;
                    }
                }
            }
            assert!(close(total * k.norm_const(), 1.0, 1e-3), "n={n}: {total}");
        }
    }

    #[test]
    fn gradients_vanish_at_maximum() {
        let k = KernelSpec::rbf(2, 0.5).unwrap();
        let x = array![0.3, -1.2];
        let g = k.grad_sq(x.view(), x.view()).unwrap();
        assert!(g.dx.iter().chain(g.dy.iter()).all(|v| *v == 0.0));
        assert_eq!(g.dlog_sigma, vec![0.0]);

        let k = KernelSpec::cosine(3).unwrap();
        let x = array![0.3, -1.2, 2.0];
        let y = &x * 2.5;
        let g = k.grad_sq(x.view(), y.view()).unwrap();
        assert!(g.dx.iter().chain(g.dy.iter()).all(|v| v.abs() < 1e-14));
    }

    fn fd_check(k: &KernelSpec, x: &Array1<f64>, y: &Array1<f64>) {
        let h = 1e-5;
        let g = k.grad_sq(x.view(), y.view()).unwrap();
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(a.abs()).max(1e-8);
        for i in 0..x.len() {
            let (mut xp, mut xm) = (x.clone(), x.clone());
            xp[i] += h;
            xm[i] -= h;
            let fd = (k.eval_sq(xp.view(), y.view()).unwrap()
                - k.eval_sq(xm.view(), y.view()).unwrap())
                / (2.0 * h);
            assert!(rel(g.dx[i], fd) < 1e-5 || (g.dx[i] - fd).abs() < 1e-10, "dx {i}");
            let (mut yp, mut ym) = (y.clone(), y.clone());
            yp[i] += h;
            ym[i] -= h;
            let fd = (k.eval_sq(x.view(), yp.view()).unwrap()
                - k.eval_sq(x.view(), ym.view()).unwrap())
                / (2.0 * h);
            assert!(rel(g.dy[i], fd) < 1e-5 || (g.dy[i] - fd).abs() < 1e-10, "dy {i}");
        }
        if let KernelSpec::Rbf { sigma, dim } = k {
            let kp = KernelSpec::rbf(*dim, (sigma.ln() + h).exp()).unwrap();
            let km = KernelSpec::rbf(*dim, (sigma.ln() - h).exp()).unwrap();
            let fd = (kp.eval_sq(x.view(), y.view()).unwrap()
                - km.eval_sq(x.view(), y.view()).unwrap())
                / (2.0 * h);
            assert!(rel(g.dlog_sigma[0], fd) < 1e-5 || (g.dlog_sigma[0] - fd).abs() < 1e-10);
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let n = rng.random_range(1..5);
            let x = Array1::from_shape_fn(n, |_| rng.random_range(-1.5..1.5));
            let y = Array1::from_shape_fn(n, |_| rng.random_range(-1.5..1.5));
            let sigma = rng.random_range(0.5..2.0);
            let k = KernelSpec::rbf(n, sigma).unwrap();
            if k.eval_sq(x.view(), y.view()).unwrap() > 1e-8 {
                fd_check(&k, &x, &y);
            }
            fd_check(&KernelSpec::cosine(n).unwrap(), &x, &y);
        }
    }

    #[test]
    fn product_kernel_factorizes() {
        let k = KernelSpec::product(
            KernelSpec::rbf(1, 0.9).unwrap(),
            KernelSpec::cosine(2).unwrap(),
        );
        let x = array![0.1, 1.0, 2.0];
        let y = array![0.4, 2.0, -1.0];
        let a = KernelSpec::rbf(1, 0.9)
            .unwrap()
            .eval_sq(array![0.1].view(), array![0.4].view())
            .unwrap();
        let b = KernelSpec::cosine(2)
            .unwrap()
            .eval_sq(array![1.0, 2.0].view(), array![2.0, -1.0].view())
            .unwrap();
        assert_eq!(k.eval_sq(x.view(), y.view()).unwrap(), a * b);
        let g = k.grad_sq(x.view(), y.view()).unwrap();
        assert_eq!(g.dlog_sigma.len(), 1);
        assert_eq!(g.dx.len(), 3);
    }

    #[test]
    fn json_shape() {
        let k = KernelSpec::product(
            KernelSpec::rbf(1, 0.25).unwrap(),
            KernelSpec::cosine(3).unwrap(),
        );
        let s = serde_json::to_string(&k).unwrap();
        assert_eq!(
            s,
            r#"{"kind":"product","dim":4,"factors":[{"kind":"rbf","sigma":0.25,"dim":1},{"kind":"cosine","dim":3}]}"#
        );
        let back: KernelSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(back, k);
        assert!(serde_json::from_str::<KernelSpec>(r#"{"kind":"rbf","dim":1}"#).is_err());
        assert!(serde_json::from_str::<KernelSpec>(r#"{"kind":"rbf","dim":1,"sigma":-1}"#).is_err());
    }

    fn vec_strategy(n: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-10.0f64..10.0, n)
    }

    proptest! {
        #[test]
        fn symmetric_bounded_unit_diagonal(
            x in vec_strategy(3),
            y in vec_strategy(3),
            sigma in 0.05f64..5.0,
        ) {
            let x = Array1::from(x);
            let y = Array1::from(y);
            let rbf = KernelSpec::rbf(3, sigma).unwrap();
            let a = rbf.eval_sq(x.view(), y.view()).unwrap();
            prop_assert_eq!(a, rbf.eval_sq(y.view(), x.view()).unwrap());
            prop_assert!((0.0..=1.0).contains(&a));
            prop_assert!((rbf.eval_sq(x.view(), x.view()).unwrap() - 1.0).abs() <= 1e-12);

            prop_assume!(sq_norm(x.view()) > 1e-6 && sq_norm(y.view()) > 1e-6);
            let cos = KernelSpec::cosine(3).unwrap();
            let c = cos.eval_sq(x.view(), y.view()).unwrap();
            prop_assert_eq!(c, cos.eval_sq(y.view(), x.view()).unwrap());
            prop_assert!((0.0..=1.0 + 1e-15).contains(&c));
            prop_assert!((cos.eval_sq(x.view(), x.view()).unwrap() - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn cosine_scale_invariance(
            x in vec_strategy(4),
            y in vec_strategy(4),
            a in 0.01f64..100.0,
            b in 0.01f64..100.0,
        ) {
            let x = Array1::from(x);
            let y = Array1::from(y);
            prop_assume!(sq_norm(x.view()) > 1e-6 && sq_norm(y.view()) > 1e-6);
            let cos = KernelSpec::cosine(4).unwrap();
            let base = cos.eval_sq(x.view(), y.view()).unwrap();
            let scaled = cos.eval_sq((&x * a).view(), (&y * b).view()).unwrap();
            prop_assert!((base - scaled).abs() < 1e-12);
        }
    }
}
