use std::path::Path;

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use super::schema::{ColumnRole, LabelKind, TabularSchema};
use crate::error::{KdmError, Result};
use crate::training::LabeledDataset;

/// Field values treated as missing.
pub const MISSING_TOKENS: [&str; 3] = ["", "?", "NA"];

const CONSTANT_STD: f64 = 1e-12;

/// Category dictionaries learned from a training file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Encoder {
    pub schema: TabularSchema,
    /// Per column, categories in first-appearance order (empty unless the
    /// column is categorical).
    pub categories: Vec<Vec<String>>,
    /// Class names by label index.
    pub classes: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct LoadedTable {
    pub data: LabeledDataset,
    pub encoder: Encoder,
    pub dropped_rows: usize,
    pub unknown_categories: usize,
}

struct RawRow {
    line: usize,
    fields: Vec<String>,
}

fn read_rows(path: &Path, schema: &TabularSchema) -> Result<(Vec<RawRow>, usize)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(schema.has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)?;
    if schema.has_header {
        let header = reader.headers()?.clone();
        let names: Vec<&str> = schema.columns.iter().map(|c| c.name.as_str()).collect();
        if header.iter().collect::<Vec<_>>() != names {
            return Err(KdmError::Schema(format!(
                "header {:?} does not match schema columns {:?}",
                header.iter().collect::<Vec<_>>(),
                names
            )));
        }
    }
    let mut rows = Vec::new();
    let mut dropped = 0;
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != schema.columns.len() {
            return Err(KdmError::Parse {
                row: line,
                col: record.len().min(schema.columns.len()) + 1,
                msg: format!(
                    "expected {} fields, found {}",
                    schema.columns.len(),
                    record.len()
                ),
            });
        }
        let missing = record
            .iter()
            .zip(&schema.columns)
            .any(|(v, c)| c.role != ColumnRole::Ignore && MISSING_TOKENS.contains(&v));
        if missing {
            dropped += 1;
            continue;
        }
        rows.push(RawRow {
            line,
            fields: record.iter().map(str::to_string).collect(),
        });
    }
    if dropped > 0 {
        log::warn!("{}: dropped {dropped} rows with missing values", path.display());
    }
    Ok((rows, dropped))
}

fn parse_number(v: &str, line: usize, col: usize) -> Result<f64> {
    match v.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(KdmError::Parse {
            row: line,
            col: col + 1,
            msg: format!("cannot parse {v:?} as a number"),
        }),
    }
}

/// Loads a CSV file and learns the category dictionaries from it.
///
/// Features are laid out in column order: one column per numeric field,
/// one one-hot block per categorical field. Parse errors report the file
/// line and the 1-based column.
pub fn load_csv(path: &Path, schema: &TabularSchema) -> Result<LoadedTable> {
    schema.validate()?;
    let (rows, dropped) = read_rows(path, schema)?;
    let label = schema.label_index();
    let mut categories = vec![Vec::new(); schema.columns.len()];
    let mut classes: Vec<String> = match (&schema.positive_class, schema.label_kind) {
        (Some(pos), LabelKind::Categorical) => vec![format!("not {pos}"), pos.clone()],
        _ => Vec::new(),
    };
    for row in &rows {
        for (j, col) in schema.columns.iter().enumerate() {
            if col.role == ColumnRole::Categorical && !categories[j].contains(&row.fields[j]) {
                categories[j].push(row.fields[j].clone());
            }
        }
        if schema.positive_class.is_none()
            && schema.label_kind == LabelKind::Categorical
            && !classes.contains(&row.fields[label])
        {
            classes.push(row.fields[label].clone());
        }
    }
    let encoder = Encoder {
        schema: schema.clone(),
        categories,
        classes,
    };
    let (data, unknown) = encoder.encode(&rows)?;
    Ok(LoadedTable {
        data,
        encoder,
        dropped_rows: dropped,
        unknown_categories: unknown,
    })
}

impl Encoder {
    pub fn feature_dim(&self) -> usize {
        self.schema
            .columns
            .iter()
            .zip(&self.categories)
            .map(|(c, cats)| match c.role {
                ColumnRole::Numeric => 1,
                ColumnRole::Categorical => cats.len(),
                _ => 0,
            })
            .sum()
    }

    pub fn label_dim(&self) -> usize {
        match self.schema.label_kind {
            LabelKind::Categorical => self.classes.len(),
            LabelKind::Numeric => 1,
        }
    }

    /// Output positions of the numeric features.
    pub fn numeric_columns(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut at = 0;
        for (c, cats) in self.schema.columns.iter().zip(&self.categories) {
            match c.role {
                ColumnRole::Numeric => {
                    out.push(at);
                    at += 1;
                }
                ColumnRole::Categorical => at += cats.len(),
                _ => {}
            }
        }
        out
    }

    /// Loads another file with this encoder's dictionaries. Unseen
    /// categories encode as an all-zero block; unseen classes are an error.
    pub fn load(&self, path: &Path) -> Result<LoadedTable> {
        let (rows, dropped) = read_rows(path, &self.schema)?;
        let (data, unknown) = self.encode(&rows)?;
        if unknown > 0 {
            log::warn!(
                "{}: {unknown} unseen category values encoded as zeros",
                path.display()
            );
        }
        Ok(LoadedTable {
            data,
            encoder: self.clone(),
            dropped_rows: dropped,
            unknown_categories: unknown,
        })
    }

    fn encode(&self, rows: &[RawRow]) -> Result<(LabeledDataset, usize)> {
        let dim = self.feature_dim();
        let ldim = self.label_dim();
        let label = self.schema.label_index();
        let mut x = Array2::zeros((rows.len(), dim));
        let mut y = Array2::zeros((rows.len(), ldim));
        let mut unknown = 0;
        for (i, row) in rows.iter().enumerate() {
            let mut at = 0;
            for (j, col) in self.schema.columns.iter().enumerate() {
                let v = row.fields[j].as_str();
                match col.role {
                    ColumnRole::Numeric => {
                        x[[i, at]] = parse_number(v, row.line, j)?;
                        at += 1;
                    }
                    ColumnRole::Categorical => {
                        let cats = &self.categories[j];
                        match cats.iter().position(|c| c == v) {
                            Some(k) => x[[i, at + k]] = 1.0,
                            None => unknown += 1,
                        }
                        at += cats.len();
                    }
                    ColumnRole::Label | ColumnRole::Ignore => {}
                }
            }
            let v = row.fields[label].as_str();
            match self.schema.label_kind {
                LabelKind::Numeric => y[[i, 0]] = parse_number(v, row.line, label)?,
                LabelKind::Categorical => {
                    let k = match &self.schema.positive_class {
                        Some(pos) => usize::from(v == pos),
                        None => self.classes.iter().position(|c| c == v).ok_or_else(|| {
                            KdmError::Parse {
                                row: row.line,
                                col: label + 1,
                                msg: format!("unknown class {v:?}"),
                            }
                        })?,
                    };
                    y[[i, k]] = 1.0;
                }
            }
        }
        Ok((LabeledDataset::new(x, y)?, unknown))
    }
}

/// Loads a CSV of numbers. A first row that does not parse is a header.
pub fn load_matrix_csv(path: &Path) -> Result<Array2<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let parsed: std::result::Result<Vec<f64>, usize> = record
            .iter()
            .enumerate()
            .map(|(j, v)| v.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or(j))
            .collect();
        match parsed {
            Ok(r) => rows.push(r),
            Err(_) if i == 0 => continue,
            Err(j) => {
                return Err(KdmError::Parse {
                    row: line,
                    col: j + 1,
                    msg: format!("cannot parse {:?} as a number", &record[j]),
                })
            }
        }
    }
    crate::density::vecs_to_rows(rows)
}

/// Per-column affine map fitted on training rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub columns: Vec<usize>,
    pub mean: Vec<f64>,
    /// Population standard deviation; columns below 1e-12 are only centered.
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn fit(train: ArrayView2<f64>, columns: &[usize]) -> Result<Self> {
        if train.nrows() < 2 {
            return Err(KdmError::InvalidConfig(
                "standardization needs at least two rows".into(),
            ));
        }
        let n = train.nrows() as f64;
        let mut mean = Vec::with_capacity(columns.len());
        let mut std = Vec::with_capacity(columns.len());
        for &j in columns {
            let col = train.column(j);
            let m = col.sum() / n;
            let v = col.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n;
            mean.push(m);
            std.push(v.sqrt());
        }
        Ok(Self {
            columns: columns.to_vec(),
            mean,
            std,
        })
    }

    pub fn apply(&self, x: &mut Array2<f64>) {
        for ((&j, m), s) in self.columns.iter().zip(&self.mean).zip(&self.std) {
            let scale = if *s < CONSTANT_STD { 1.0 } else { 1.0 / s };
            x.column_mut(j).mapv_inplace(|v| (v - m) * scale);
        }
    }
}

/// Standardizes every column using statistics of `train` only. Returns the
/// transformed train matrix, the transformed `others` and the statistics.
pub fn standardize(
    train: ArrayView2<f64>,
    others: &[ArrayView2<f64>],
) -> Result<(Array2<f64>, Vec<Array2<f64>>, Standardizer)> {
    let cols: Vec<usize> = (0..train.ncols()).collect();
    let st = Standardizer::fit(train, &cols)?;
    let mut t = train.to_owned();
    st.apply(&mut t);
    let rest = others
        .iter()
        .map(|o| {
            let mut a = o.to_owned();
            st.apply(&mut a);
            a
        })
        .collect();
    Ok((t, rest, st))
}
