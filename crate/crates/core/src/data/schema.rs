//! Column-kind schemas for the supported CSV layouts.

use serde::{Deserialize, Serialize};

use super::DataError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Categorical,
    Numeric,
    /// Class column; a row is normal iff its (trimmed) value equals the
    /// schema's `normal_label`.
    Label,
    /// Explicit attack-category column. When absent, the raw label value of
    /// attack rows doubles as the category.
    AttackCategory,
    Drop,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub dataset_id: String,
    /// Whether files carry a header row; without one, columns are
    /// positional.
    pub has_header: bool,
    /// Label value marking benign rows (e.g. `normal`, `BENIGN`, `0`).
    pub normal_label: String,
    pub columns: Vec<Column>,
}

impl FeatureSchema {
    pub fn validate(&self) -> Result<(), DataError> {
        let labels = self.count(ColumnKind::Label);
        if labels != 1 {
            return Err(DataError::InvalidSchema(format!(
                "expected exactly one label column, found {labels}"
            )));
        }
        let categories = self.count(ColumnKind::AttackCategory);
        if categories > 1 {
            return Err(DataError::InvalidSchema(format!(
                "expected at most one attack_category column, found {categories}"
            )));
        }
        if self.columns.is_empty() {
            return Err(DataError::InvalidSchema("no columns declared".into()));
        }
        Ok(())
    }

    fn count(&self, kind: ColumnKind) -> usize {
        self.columns.iter().filter(|c| c.kind == kind).count()
    }

    pub fn from_toml(text: &str) -> Result<Self, DataError> {
        let schema: FeatureSchema =
            toml::from_str(text).map_err(|e| DataError::InvalidSchema(e.to_string()))?;
        schema.validate()?;
        Ok(schema)
    }

    pub fn label_index(&self) -> usize {
        self.columns
            .iter()
            .position(|c| c.kind == ColumnKind::Label)
            .expect("validated schema has a label column")
    }

    pub fn category_index(&self) -> Option<usize> {
        self.columns
            .iter()
            .position(|c| c.kind == ColumnKind::AttackCategory)
    }

    pub fn numeric_columns(&self) -> Vec<usize> {
        self.indexes_of(ColumnKind::Numeric)
    }

    pub fn categorical_columns(&self) -> Vec<usize> {
        self.indexes_of(ColumnKind::Categorical)
    }

    fn indexes_of(&self, kind: ColumnKind) -> Vec<usize> {
        self.columns
            .iter()
            .enumerate()
            .filter(|(_, c)| c.kind == kind)
            .map(|(i, _)| i)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_round_trip_and_validation() {
        let text = r#"
dataset_id = "tiny"
has_header = true
normal_label = "normal"
columns = [
  { name = "proto", kind = "categorical" },
  { name = "bytes", kind = "numeric" },
  { name = "class", kind = "label" },
]
"#;
        let schema = FeatureSchema::from_toml(text).unwrap();
        assert_eq!(schema.dataset_id, "tiny");
        assert_eq!(schema.label_index(), 2);
        assert_eq!(schema.numeric_columns(), vec![1]);
        assert_eq!(schema.categorical_columns(), vec![0]);
        assert!(schema.category_index().is_none());
    }

    #[test]
    fn rejects_missing_or_duplicate_label() {
        let text = r#"
dataset_id = "bad"
has_header = true
normal_label = "normal"
columns = [ { name = "a", kind = "numeric" } ]
"#;
        assert!(FeatureSchema::from_toml(text).is_err());

        let text = r#"
dataset_id = "bad"
has_header = true
normal_label = "normal"
columns = [
  { name = "a", kind = "label" },
  { name = "b", kind = "label" },
]
"#;
        assert!(FeatureSchema::from_toml(text).is_err());
    }
}
