//! Ancestral sampling from KDMs.
//!
//! RBF KDMs: pick a component from the categorical over weights, then draw
//! from `N(c, (σ²/2) I)`, the Gaussian whose density is `M · k²(·, c)`.
//! Cosine KDMs: draw a basis index from the categorical PMF the KDM encodes.

use ndarray::{Array1, Array2, ArrayView1};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::density::KernelDensityMatrix;
use crate::error::{KdmError, Result};

/// Counter-based random stream: `(seed, stream)` fully determines the output.
#[derive(Clone, Debug)]
pub struct RngState {
    seed: u64,
    stream: u64,
    rng: ChaCha20Rng,
    spare_normal: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngKey {
    pub seed: u64,
    pub stream: u64,
}

impl RngState {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self {
            seed,
            stream,
            rng,
            spare_normal: None,
        }
    }

    pub fn from_seed(seed: u64) -> Self {
        Self::new(seed, 0)
    }

    pub fn key(&self) -> RngKey {
        RngKey {
            seed: self.seed,
            stream: self.stream,
        }
    }

    /// An independent stream with the same seed.
    pub fn split(&self, stream: u64) -> Self {
        Self::new(self.seed, stream)
    }

    /// Uniform on `[0, 1)` with 53 bits of precision.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal via the Box–Muller transform; both outputs are used.
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        self.spare_normal = Some(r * theta.sin());
        r * theta.cos()
    }

    /// Index drawn from `probs` by inverse CDF.
    pub fn categorical(&mut self, probs: ArrayView1<f64>) -> usize {
        let total: f64 = probs.sum();
        let u = self.uniform() * total;
        let mut acc = 0.0;
        let mut last_positive = 0;
        for (i, p) in probs.iter().enumerate() {
            if *p > 0.0 {
                last_positive = i;
            }
            acc += p;
            if u < acc {
                return i;
            }
        }
        last_positive
    }

    pub fn below(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }
}

/// Draws `n_samples` points from an RBF KDM.
pub fn sample_continuous(
    rho: &KernelDensityMatrix,
    n_samples: usize,
    rng: &mut RngState,
) -> Result<Array2<f64>> {
    let sigma = rho.kernel().sigma().ok_or(KdmError::WrongKernelKind {
        expected: "rbf",
        found: rho.kernel().kind_name(),
    })?;
    let std = sigma / std::f64::consts::SQRT_2;
    let n = rho.dim();
    let comps = rho.components();
    let mut out = Array2::zeros((n_samples, n));
    for mut row in out.rows_mut() {
        let i = rng.categorical(rho.weights());
        let center = comps.row(i);
        for (v, c) in row.iter_mut().zip(center.iter()) {
            *v = c + std * rng.normal();
        }
    }
    Ok(out)
}

/// Draws basis indices from the categorical PMF of a cosine KDM.
pub fn sample_discrete(
    rho: &KernelDensityMatrix,
    n_samples: usize,
    rng: &mut RngState,
) -> Result<Vec<usize>> {
    let pi: Array1<f64> = rho.categorical_pmf()?;
    Ok((0..n_samples).map(|_| rng.categorical(pi.view())).collect())
}
