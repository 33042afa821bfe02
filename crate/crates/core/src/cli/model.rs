use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::data::{Encoder, Standardizer};
use crate::density::{JointKDM, KernelDensityMatrix};
use crate::error::{KdmError, Result};

/// Contents of `model.json`: a joint model or a single KDM.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelFile {
    Joint(JointKDM),
    Single(KernelDensityMatrix),
}

impl ModelFile {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(text.trim())?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }

    /// Dimension of the inputs the model consumes (x side of a joint).
    pub fn input_dim(&self) -> usize {
        match self {
            ModelFile::Joint(j) => j.x_kernel().dim(),
            ModelFile::Single(k) => k.dim(),
        }
    }

    pub fn joint(&self) -> Result<&JointKDM> {
        match self {
            ModelFile::Joint(j) => Ok(j),
            ModelFile::Single(_) => Err(KdmError::ModelDataMismatch(
                "operation needs a joint model".into(),
            )),
        }
    }
}

/// Feature preprocessing learned at fit time, reapplied by eval and infer.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Preprocess {
    #[serde(default)]
    pub encoder: Option<Encoder>,
    #[serde(default)]
    pub standardizer: Option<Standardizer>,
}

impl Preprocess {
    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn is_empty(&self) -> bool {
        self.encoder.is_none() && self.standardizer.is_none()
    }

    pub fn apply(&self, x: &mut Array2<f64>) -> Result<()> {
        if let Some(st) = &self.standardizer {
            if let Some(&max) = st.columns.iter().max() {
                if max >= x.ncols() {
                    return Err(KdmError::ModelDataMismatch(format!(
                        "standardizer touches column {max}, data has {}",
                        x.ncols()
                    )));
                }
            }
            st.apply(x);
        }
        Ok(())
    }
}

/// Pretty JSON with a trailing newline.
pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    std::fs::write(path, s)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::KernelSpec;
    use ndarray::array;

    #[test]
    fn untagged_round_trip() {
        let k = KernelDensityMatrix::uniform(array![[0.5, 1.0], [2.0, -1.0]], KernelSpec::rbf(2, 0.7).unwrap())
            .unwrap();
        let j = JointKDM::new(
            array![[0.5], [2.0]],
            array![[1.0, 0.0], [0.0, 1.0]],
            array![0.25, 0.75],
            KernelSpec::rbf(1, 0.3).unwrap(),
            KernelSpec::cosine(2).unwrap(),
        )
        .unwrap();
        for m in [ModelFile::Single(k), ModelFile::Joint(j)] {
            let s = serde_json::to_string(&m).unwrap();
            assert_eq!(serde_json::from_str::<ModelFile>(&s).unwrap(), m);
        }
    }
}
