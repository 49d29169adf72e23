//! Dataset ingestion, preprocessing, split construction, and the synthetic
//! generator.
//!
//! All fitting (one-hot categories, standardization) happens on training
//! rows only; test rows are transformed with the fitted state. Unseen test
//! categories map to all-zero one-hot blocks so train and test feature
//! dimensions always agree.

mod encode;
mod ingest;
mod schema;
mod snapshot;
mod split;
mod synthetic;

pub use encode::{OneHotEncoder, StandardScaler};
pub use ingest::{parse_csv, IngestStats, ParsedRecord};
pub use schema::{Column, ColumnKind, FeatureSchema};
pub use snapshot::{load_snapshot, save_snapshot, SNAPSHOT_VERSION};
pub use split::{build_split, make_loao_plans, make_splits, DatasetSplit, LoaoPlan, Provenance, SplitPolicy};
pub use synthetic::synthetic_dataset;

use std::path::PathBuf;
use thiserror::Error;

#[derive(Error, Debug)]
pub enum DataError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("csv error in {path}: {message}")]
    Csv { path: PathBuf, message: String },
    #[error("header mismatch in {path}: expected column {expected:?} at position {position}, found {actual:?}")]
    HeaderMismatch {
        path: PathBuf,
        position: usize,
        expected: String,
        actual: String,
    },
    #[error("invalid schema: {0}")]
    InvalidSchema(String),
    #[error("required file missing: {0}")]
    MissingFile(PathBuf),
    #[error("dataset has no attack categories in its test set")]
    NoCategories,
    #[error("training partition is empty")]
    EmptyTrain,
    #[error("snapshot {path} is unreadable: {message}")]
    BadSnapshot { path: PathBuf, message: String },
}
