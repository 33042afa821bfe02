use ndarray::{Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{KdmError, Result};
use crate::sampling::RngState;
use crate::training::{BagDataset, LabeledDataset};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
    pub seed: u64,
}

/// Seeded shuffle of `0..n` cut into train/validation/test by `fractions`.
/// Train and validation sizes are rounded; test takes the remainder.
pub fn split(n: usize, fractions: (f64, f64, f64), seed: u64) -> Result<Split> {
    let (a, b, c) = fractions;
    if [a, b, c].iter().any(|f| !(0.0..=1.0).contains(f)) || (a + b + c - 1.0).abs() > 1e-9 {
        return Err(KdmError::BadFractions(format!(
            "({a}, {b}, {c}) is not a partition of one"
        )));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    crate::training::shuffle_indices(&mut perm, &mut RngState::new(seed, 0));
    let n_train = ((a * n as f64).round() as usize).min(n);
    let n_val = ((b * n as f64).round() as usize).min(n - n_train);
    let test = perm.split_off(n_train + n_val);
    let validation = perm.split_off(n_train);
    Ok(Split {
        train: perm,
        validation,
        test,
        seed,
    })
}

/// Shuffled pool of row indices, reshuffled once exhausted.
struct Pool {
    items: Vec<usize>,
    next: usize,
}

impl Pool {
    fn take(&mut self, k: usize, rng: &mut RngState) -> &[usize] {
        if self.items.len() - self.next < k {
            crate::training::shuffle_indices(&mut self.items, rng);
            self.next = 0;
        }
        let out = &self.items[self.next..self.next + k];
        self.next += k;
        out
    }
}

/// Bags for learning from label proportions on a binary dataset
/// (one-hot labels, positive class at index 1).
///
/// Each bag draws a proportion uniformly from `lp_range`, takes
/// `round(lp · bag_size)` positives (ties round up) and fills the rest with
/// negatives, sampling each class without replacement. The proportion row
/// stored with a bag is the realized one, `(1 − k/n, k/n)`.
pub fn make_bags(
    data: &LabeledDataset,
    bag_size: usize,
    lp_range: (f64, f64),
    n_bags: usize,
    rng: &mut RngState,
) -> Result<BagDataset> {
    let (lo, hi) = lp_range;
    if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
        return Err(KdmError::InvalidConfig(format!(
            "label proportion range [{lo}, {hi}] is not inside [0, 1]"
        )));
    }
    if bag_size == 0 || n_bags == 0 {
        return Err(KdmError::InvalidConfig("bag size and bag count must be positive".into()));
    }
    if data.y.ncols() != 2 {
        return Err(KdmError::LabelShapeMismatch(format!(
            "bags need binary labels, got {} classes",
            data.y.ncols()
        )));
    }
    let classes = data.class_indices();
    let mut pools: Vec<Pool> = (0..2)
        .map(|c| {
            let items: Vec<usize> = (0..data.len()).filter(|&i| classes[i] == c).collect();
            // Starts exhausted so the first draw shuffles.
            Pool {
                next: items.len(),
                items,
            }
        })
        .collect();
    let mut bags = Vec::with_capacity(n_bags);
    let mut props = Array2::zeros((n_bags, 2));
    for b in 0..n_bags {
        let lp = lo + (hi - lo) * rng.uniform();
        let k = (lp * bag_size as f64 + 0.5).floor() as usize;
        let k = k.min(bag_size);
        let need = [bag_size - k, k];
        for (c, &n) in need.iter().enumerate() {
            if pools[c].items.len() < n {
                return Err(KdmError::InsufficientClassInstances {
                    class: c,
                    needed: n,
                    available: pools[c].items.len(),
                });
            }
        }
        let mut idx = Vec::with_capacity(bag_size);
        idx.extend_from_slice(pools[1].take(k, rng));
        idx.extend_from_slice(pools[0].take(bag_size - k, rng));
        bags.push(data.x.select(Axis(0), &idx));
        props[[b, 1]] = k as f64 / bag_size as f64;
        props[[b, 0]] = 1.0 - props[[b, 1]];
    }
    BagDataset::new(bags, props)
}
