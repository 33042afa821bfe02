use std::io::{BufRead, Write};

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::density::{rows_to_vecs, vecs_to_rows};
use crate::error::{KdmError, Result};

const SIMPLEX_TOL: f64 = 1e-9;

/// Paired inputs and targets. Targets are one-hot rows for classification
/// and raw values for regression.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledDataset {
    pub x: Array2<f64>,
    pub y: Array2<f64>,
}

impl LabeledDataset {
    pub fn new(x: Array2<f64>, y: Array2<f64>) -> Result<Self> {
        if x.nrows() != y.nrows() {
            return Err(KdmError::LabelShapeMismatch(format!(
                "{} inputs but {} targets",
                x.nrows(),
                y.nrows()
            )));
        }
        Ok(Self { x, y })
    }

    pub fn len(&self) -> usize {
        self.x.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.x.nrows() == 0
    }

    /// Rows selected by index, in the given order.
    pub fn select(&self, idx: &[usize]) -> LabeledDataset {
        LabeledDataset {
            x: self.x.select(ndarray::Axis(0), idx),
            y: self.y.select(ndarray::Axis(0), idx),
        }
    }

    /// Class index of each row (argmax of the target row).
    pub fn class_indices(&self) -> Vec<usize> {
        self.y.rows().into_iter().map(argmax).collect()
    }
}

pub(crate) fn check_simplex_rows(rows: ArrayView2<f64>) -> Result<()> {
    for (i, row) in rows.rows().into_iter().enumerate() {
        let sum = row.sum();
        if row.iter().any(|v| *v < 0.0 || !v.is_finite()) || (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(KdmError::LabelShapeMismatch(format!(
                "row {i} is not a probability vector (sum {sum})"
            )));
        }
    }
    Ok(())
}

pub fn argmax(row: ArrayView1<f64>) -> usize {
    row.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| {
            if v > bv {
                (i, v)
            } else {
                (bi, bv)
            }
        })
        .0
}

/// Bags of instances, each with the proportion of every class in the bag.
#[derive(Clone, Debug, PartialEq)]
pub struct BagDataset {
    pub bags: Vec<Array2<f64>>,
    pub proportions: Array2<f64>,
}

#[derive(Serialize, Deserialize)]
struct BagLine {
    bag: Vec<Vec<f64>>,
    proportions: Vec<f64>,
}

impl BagDataset {
    pub fn new(bags: Vec<Array2<f64>>, proportions: Array2<f64>) -> Result<Self> {
        if bags.len() != proportions.nrows() {
            return Err(KdmError::LabelShapeMismatch(format!(
                "{} bags but {} proportion rows",
                bags.len(),
                proportions.nrows()
            )));
        }
        if bags.is_empty() {
            return Err(KdmError::EmptyDataset);
        }
        let n = bags[0].ncols();
        for (i, b) in bags.iter().enumerate() {
            if b.nrows() == 0 {
                return Err(KdmError::ShapeMismatch(format!("bag {i} is empty")));
            }
            if b.ncols() != n {
                return Err(KdmError::DimMismatch {
                    expected: n,
                    got: b.ncols(),
                });
            }
        }
        check_simplex_rows(proportions.view())?;
        Ok(Self { bags, proportions })
    }

    pub fn len(&self) -> usize {
        self.bags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bags.is_empty()
    }

    pub fn num_instances(&self) -> usize {
        self.bags.iter().map(Array2::nrows).sum()
    }

    /// One JSON object per line: `{"bag": [[...]], "proportions": [...]}`.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for (bag, prop) in self.bags.iter().zip(self.proportions.rows()) {
            let line = BagLine {
                bag: rows_to_vecs(bag.view()),
                proportions: prop.to_vec(),
            };
            serde_json::to_writer(&mut out, &line)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(input: R) -> Result<Self> {
        let mut bags = Vec::new();
        let mut props: Vec<Vec<f64>> = Vec::new();
        for line in input.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let parsed: BagLine = serde_json::from_str(&line)?;
            bags.push(vecs_to_rows(parsed.bag)?);
            props.push(parsed.proportions);
        }
        let proportions = vecs_to_rows(props)?;
        Self::new(bags, proportions)
    }
}

/// One training example for discriminative training: an input KDM given by
/// rows and weights, and its target vector.
#[derive(Clone, Debug)]
pub struct WeightedInput {
    pub rows: Array2<f64>,
    pub weights: Array1<f64>,
}
