//! One-hot encoding and standardization, fitted on training data only.

use ndarray::{Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use super::ingest::ParsedRecord;

/// Per-categorical-column vocabulary, sorted for a deterministic column
/// order. Unseen values at transform time become all-zero blocks, keeping
/// test dimensionality equal to train.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OneHotEncoder {
    categories: Vec<Vec<String>>,
}

impl OneHotEncoder {
    pub fn fit(records: &[ParsedRecord], n_categorical: usize) -> Self {
        let mut categories = vec![Vec::<String>::new(); n_categorical];
        for record in records {
            for (slot, value) in categories.iter_mut().zip(&record.categorical) {
                if let Err(pos) = slot.binary_search(value) {
                    slot.insert(pos, value.clone());
                }
            }
        }
        Self { categories }
    }

    pub fn width(&self) -> usize {
        self.categories.iter().map(Vec::len).sum()
    }

    pub fn categories(&self) -> &[Vec<String>] {
        &self.categories
    }

    fn encode_into(&self, record: &ParsedRecord, out: &mut [f64]) {
        let mut offset = 0;
        for (slot, value) in self.categories.iter().zip(&record.categorical) {
            if let Ok(pos) = slot.binary_search(value) {
                out[offset + pos] = 1.0;
            }
            offset += slot.len();
        }
    }
}

/// Assemble the feature matrix: numeric columns in schema order, then the
/// one-hot blocks. Returns the matrix and its feature names.
pub fn assemble_features(
    records: &[ParsedRecord],
    encoder: &OneHotEncoder,
    numeric_names: &[String],
    categorical_names: &[String],
) -> (Array2<f64>, Vec<String>) {
    let n_numeric = numeric_names.len();
    let width = n_numeric + encoder.width();
    let mut matrix = Array2::zeros((records.len(), width));
    for (i, record) in records.iter().enumerate() {
        let mut row = matrix.row_mut(i);
        let row = row.as_slice_mut().unwrap();
        row[..n_numeric].copy_from_slice(&record.numeric);
        encoder.encode_into(record, &mut row[n_numeric..]);
    }
    let mut names: Vec<String> = numeric_names.to_vec();
    for (col_name, values) in categorical_names.iter().zip(encoder.categories()) {
        for v in values {
            names.push(format!("{col_name}={v}"));
        }
    }
    (matrix, names)
}

/// Per-feature zero-mean unit-variance scaling (population std), fitted on
/// training rows only. Constant columns keep std 1 and map to zeros.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardScaler {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl StandardScaler {
    pub fn fit(train: ArrayView2<f64>) -> Self {
        let n = train.nrows().max(1) as f64;
        let mean: Vec<f64> = train
            .mean_axis(Axis(0))
            .map(|m| m.to_vec())
            .unwrap_or_else(|| vec![0.0; train.ncols()]);
        let std: Vec<f64> = (0..train.ncols())
            .map(|j| {
                let var = train
                    .column(j)
                    .iter()
                    .map(|v| (v - mean[j]) * (v - mean[j]))
                    .sum::<f64>()
                    / n;
                let s = var.sqrt();
                if s > 0.0 {
                    s
                } else {
                    1.0
                }
            })
            .collect();
        Self { mean, std }
    }

    pub fn transform(&self, x: ArrayView2<f64>) -> Array2<f64> {
        let mut out = x.to_owned();
        for mut row in out.outer_iter_mut() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (*v - self.mean[j]) / self.std[j];
            }
        }
        out
    }
}
