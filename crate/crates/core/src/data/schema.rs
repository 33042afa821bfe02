use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{KdmError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ColumnRole {
    Numeric,
    Categorical,
    Label,
    /// Present in the file but not used.
    Ignore,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LabelKind {
    /// One-hot encoded class labels.
    #[default]
    Categorical,
    /// A real-valued regression target.
    Numeric,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    pub role: ColumnRole,
}

/// JSON sidecar describing a CSV file.
///
/// ```json
/// {"columns": [{"name": "age", "role": "numeric"},
///              {"name": "income", "role": "label"}],
///  "positive_class": ">50K"}
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TabularSchema {
    pub columns: Vec<ColumnSpec>,
    /// Binary tasks: this class maps to index 1, every other to index 0.
    /// Without it classes are indexed in order of first appearance.
    #[serde(default)]
    pub positive_class: Option<String>,
    #[serde(default)]
    pub label_kind: LabelKind,
    #[serde(default = "default_true")]
    pub has_header: bool,
}

fn default_true() -> bool {
    true
}

impl TabularSchema {
    pub fn validate(&self) -> Result<()> {
        let labels = self
            .columns
            .iter()
            .filter(|c| c.role == ColumnRole::Label)
            .count();
        if labels != 1 {
            return Err(KdmError::Schema(format!(
                "expected exactly one label column, found {labels}"
            )));
        }
        if !self
            .columns
            .iter()
            .any(|c| matches!(c.role, ColumnRole::Numeric | ColumnRole::Categorical))
        {
            return Err(KdmError::Schema("no feature columns".into()));
        }
        Ok(())
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let schema: Self = serde_json::from_str(&text)?;
        schema.validate()?;
        Ok(schema)
    }

    pub(crate) fn label_index(&self) -> usize {
        self.columns
            .iter()
            .position(|c| c.role == ColumnRole::Label)
            .expect("validated schema has a label")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_validate() {
        let s: TabularSchema = serde_json::from_str(
            r#"{"columns":[{"name":"a","role":"numeric"},{"name":"c","role":"label"}],"positive_class":"yes"}"#,
        )
        .unwrap();
        assert!(s.validate().is_ok());
        assert!(s.has_header);
        assert_eq!(s.label_index(), 1);

        let two_labels = TabularSchema {
            columns: vec![
                ColumnSpec { name: "a".into(), role: ColumnRole::Label },
                ColumnSpec { name: "b".into(), role: ColumnRole::Label },
            ],
            positive_class: None,
            label_kind: LabelKind::Categorical,
            has_header: true,
        };
        assert!(two_labels.validate().is_err());
        let no_features = TabularSchema {
            columns: vec![ColumnSpec { name: "a".into(), role: ColumnRole::Label }],
            ..two_labels
        };
        assert!(no_features.validate().is_err());
    }
}
