//! Seeded toy datasets.

use ndarray::Array2;

use crate::sampling::RngState;
use crate::training::LabeledDataset;

/// Two interleaving half circles with Gaussian noise; labels one-hot,
/// alternating between the moons.
pub fn two_moons(n: usize, noise: f64, rng: &mut RngState) -> LabeledDataset {
    let mut x = Array2::zeros((n, 2));
    let mut y = Array2::zeros((n, 2));
    for i in 0..n {
        let c = i % 2;
        let t = std::f64::consts::PI * rng.uniform();
        let (px, py) = if c == 0 {
            (t.cos(), t.sin())
        } else {
            (1.0 - t.cos(), 0.5 - t.sin())
        };
        x[[i, 0]] = px + noise * rng.normal();
        x[[i, 1]] = py + noise * rng.normal();
        y[[i, c]] = 1.0;
    }
    LabeledDataset::new(x, y).expect("matching rows")
}

/// Isotropic Gaussian clusters, `n_per` points around each center.
pub fn gaussian_blobs(
    centers: &[Vec<f64>],
    std: f64,
    n_per: usize,
    rng: &mut RngState,
) -> LabeledDataset {
    let k = centers.len();
    let dim = centers.first().map_or(0, Vec::len);
    let n = k * n_per;
    let mut x = Array2::zeros((n, dim));
    let mut y = Array2::zeros((n, k));
    for i in 0..n {
        let c = i % k;
        for d in 0..dim {
            x[[i, d]] = centers[c][d] + std * rng.normal();
        }
        y[[i, c]] = 1.0;
    }
    LabeledDataset::new(x, y).expect("matching rows")
}

/// Draws from a 1-D Gaussian mixture given `(weight, mean, std)` triples.
pub fn gaussian_mixture_1d(parts: &[(f64, f64, f64)], n: usize, rng: &mut RngState) -> Array2<f64> {
    let weights: ndarray::Array1<f64> = parts.iter().map(|p| p.0).collect();
    Array2::from_shape_fn((n, 1), |_| {
        let (_, m, s) = parts[rng.categorical(weights.view())];
        m + s * rng.normal()
    })
}

/// Log density of the same mixture.
pub fn gaussian_mixture_1d_log_pdf(parts: &[(f64, f64, f64)], x: f64) -> f64 {
    let total: f64 = parts.iter().map(|p| p.0).sum();
    parts
        .iter()
        .map(|(w, m, s)| {
            w / total * (-(x - m).powi(2) / (2.0 * s * s)).exp()
                / (s * (2.0 * std::f64::consts::PI).sqrt())
        })
        .sum::<f64>()
        .ln()
}
