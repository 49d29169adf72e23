//! Split construction: provided train/test files, pooled seeded sampling,
//! and leave-one-attack-out plans.

use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;

use super::encode::{assemble_features, OneHotEncoder, StandardScaler};
use super::ingest::{parse_csv, ParsedRecord};
use super::schema::FeatureSchema;
use super::DataError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub source_files: Vec<String>,
    pub sampling_seed: u64,
    pub dropped_train: usize,
    pub dropped_test: usize,
}

/// A fully preprocessed dataset: standardized features, binary labels,
/// attack categories, and the normal-only training view.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetSplit {
    pub dataset_id: String,
    pub feature_names: Vec<String>,
    pub train_x: Array2<f64>,
    pub train_label: Vec<bool>,
    pub train_category: Vec<Option<String>>,
    pub test_x: Array2<f64>,
    pub test_label: Vec<bool>,
    pub test_category: Vec<Option<String>>,
    /// Rows of `train_x` with a normal label; what the unsupervised models
    /// train on.
    pub normal_train_x: Array2<f64>,
    pub scaler: StandardScaler,
    pub provenance: Provenance,
}

impl DatasetSplit {
    pub fn n_features(&self) -> usize {
        self.train_x.ncols()
    }

    /// Distinct attack categories in the test set, sorted.
    pub fn test_categories(&self) -> Vec<String> {
        let mut cats: Vec<String> = self
            .test_category
            .iter()
            .flatten()
            .cloned()
            .collect();
        cats.sort();
        cats.dedup();
        cats
    }

    pub fn summary(&self) -> String {
        let train_attacks = self.train_label.iter().filter(|l| **l).count();
        let test_attacks = self.test_label.iter().filter(|l| **l).count();
        format!(
            "dataset {}: {} features; train {} rows ({} attacks, {} normal-only); \
             test {} rows ({} attacks); categories: {}",
            self.dataset_id,
            self.n_features(),
            self.train_x.nrows(),
            train_attacks,
            self.normal_train_x.nrows(),
            self.test_x.nrows(),
            test_attacks,
            self.test_categories().join(", ")
        )
    }
}

/// How raw files map to a train/test split.
pub enum SplitPolicy<'a> {
    /// Official train/test files pass through unchanged.
    Provided { train: &'a Path, test: &'a Path },
    /// Pool several capture files, drop those whose file name contains
    /// `exclude_pattern`, then sample `fraction` of rows (seeded) as the
    /// training set; the rest are the test set.
    SampleFraction {
        files: Vec<&'a Path>,
        fraction: f64,
        exclude_pattern: Option<&'a str>,
    },
}

pub fn make_splits(
    dataset_id: &str,
    schema: &FeatureSchema,
    policy: SplitPolicy<'_>,
    seed: u64,
) -> Result<DatasetSplit, DataError> {
    schema.validate()?;
    let mut source_files = Vec::new();
    let (train_records, test_records, dropped_train, dropped_test) = match policy {
        SplitPolicy::Provided { train, test } => {
            source_files.push(train.display().to_string());
            source_files.push(test.display().to_string());
            let (train_records, train_stats) = parse_csv(train, schema)?;
            let (test_records, test_stats) = parse_csv(test, schema)?;
            (
                train_records,
                test_records,
                train_stats.rows_dropped,
                test_stats.rows_dropped,
            )
        }
        SplitPolicy::SampleFraction {
            files,
            fraction,
            exclude_pattern,
        } => {
            let mut pooled = Vec::new();
            let mut dropped = 0;
            for file in files {
                let name = file
                    .file_name()
                    .map(|n| n.to_string_lossy().to_string())
                    .unwrap_or_default();
                if let Some(pattern) = exclude_pattern {
                    if name.contains(pattern) {
                        continue;
                    }
                }
                source_files.push(file.display().to_string());
                let (records, stats) = parse_csv(file, schema)?;
                pooled.extend(records);
                dropped += stats.rows_dropped;
            }
            let mut order: Vec<usize> = (0..pooled.len()).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            order.shuffle(&mut rng);
            let n_train = (pooled.len() as f64 * fraction).round() as usize;
            let mut train_records = Vec::with_capacity(n_train);
            let mut test_records = Vec::with_capacity(pooled.len() - n_train);
            let train_set: std::collections::HashSet<usize> =
                order[..n_train].iter().copied().collect();
            for (i, record) in pooled.into_iter().enumerate() {
                if train_set.contains(&i) {
                    train_records.push(record);
                } else {
                    test_records.push(record);
                }
            }
            (train_records, test_records, dropped, 0)
        }
    };

    let provenance = Provenance {
        source_files,
        sampling_seed: seed,
        dropped_train,
        dropped_test,
    };
    build_split(dataset_id, schema, train_records, test_records, provenance)
}

/// Fit the encoder and scaler on training records and assemble the split.
pub fn build_split(
    dataset_id: &str,
    schema: &FeatureSchema,
    train_records: Vec<ParsedRecord>,
    test_records: Vec<ParsedRecord>,
    provenance: Provenance,
) -> Result<DatasetSplit, DataError> {
    if train_records.is_empty() {
        return Err(DataError::EmptyTrain);
    }
    let numeric_names: Vec<String> = schema
        .numeric_columns()
        .into_iter()
        .map(|i| schema.columns[i].name.clone())
        .collect();
    let categorical_names: Vec<String> = schema
        .categorical_columns()
        .into_iter()
        .map(|i| schema.columns[i].name.clone())
        .collect();

    let encoder = OneHotEncoder::fit(&train_records, categorical_names.len());
    let (train_raw, feature_names) =
        assemble_features(&train_records, &encoder, &numeric_names, &categorical_names);
    let (test_raw, _) =
        assemble_features(&test_records, &encoder, &numeric_names, &categorical_names);

    let scaler = StandardScaler::fit(train_raw.view());
    let train_x = scaler.transform(train_raw.view());
    let test_x = scaler.transform(test_raw.view());

    let train_label: Vec<bool> = train_records.iter().map(|r| r.label).collect();
    let train_category: Vec<Option<String>> =
        train_records.iter().map(|r| r.category.clone()).collect();
    let test_label: Vec<bool> = test_records.iter().map(|r| r.label).collect();
    let test_category: Vec<Option<String>> =
        test_records.iter().map(|r| r.category.clone()).collect();

    let normal_rows: Vec<usize> = train_label
        .iter()
        .enumerate()
        .filter(|(_, l)| !**l)
        .map(|(i, _)| i)
        .collect();
    let normal_train_x = train_x.select(Axis(0), &normal_rows);

    Ok(DatasetSplit {
        dataset_id: dataset_id.to_string(),
        feature_names,
        train_x,
        train_label,
        train_category,
        test_x,
        test_label,
        test_category,
        normal_train_x,
        scaler,
        provenance,
    })
}

/// One leave-one-attack-out plan: the held-out category, the supervised
/// training rows (all train rows except that category), and the evaluation
/// rows (test normals plus that category).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoaoPlan {
    pub held_out: String,
    pub supervised_train_rows: Vec<usize>,
    pub eval_rows: Vec<usize>,
}

/// One plan per distinct attack category in the test set.
pub fn make_loao_plans(split: &DatasetSplit) -> Result<Vec<LoaoPlan>, DataError> {
    let categories = split.test_categories();
    if categories.is_empty() {
        return Err(DataError::NoCategories);
    }
    Ok(categories
        .into_iter()
        .map(|held_out| {
            let supervised_train_rows = split
                .train_category
                .iter()
                .enumerate()
                .filter(|(_, c)| c.as_deref() != Some(held_out.as_str()))
                .map(|(i, _)| i)
                .collect();
            let eval_rows = split
                .test_label
                .iter()
                .zip(&split.test_category)
                .enumerate()
                .filter(|(_, (label, category))| {
                    !**label || category.as_deref() == Some(held_out.as_str())
                })
                .map(|(i, _)| i)
                .collect();
            LoaoPlan {
                held_out,
                supervised_train_rows,
                eval_rows,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::schema::{Column, ColumnKind};
    use std::io::Write;

    fn schema() -> FeatureSchema {
        FeatureSchema {
            dataset_id: "tiny".into(),
            has_header: true,
            normal_label: "normal".into(),
            columns: vec![
                Column {
                    name: "proto".into(),
                    kind: ColumnKind::Categorical,
                },
                Column {
                    name: "bytes".into(),
                    kind: ColumnKind::Numeric,
                },
                Column {
                    name: "class".into(),
                    kind: ColumnKind::Label,
                },
            ],
        }
    }

    fn write_csv(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn provided_split_passes_rows_through() {
        let train = write_csv("proto,bytes,class\ntcp,1,normal\ntcp,2,normal\nudp,9,dos\n");
        let test = write_csv("proto,bytes,class\ntcp,1.5,normal\nudp,8,dos\nicmp,3,probe\n");
        let split = make_splits(
            "tiny",
            &schema(),
            SplitPolicy::Provided {
                train: train.path(),
                test: test.path(),
            },
            0,
        )
        .unwrap();
        assert_eq!(split.train_x.nrows(), 3);
        assert_eq!(split.test_x.nrows(), 3);
        assert_eq!(split.normal_train_x.nrows(), 2);
        // 1 numeric + one-hot over {tcp, udp} = 3 features
        assert_eq!(split.n_features(), 3);
        assert_eq!(split.test_categories(), vec!["dos", "probe"]);
    }

    #[test]
    fn normal_only_view_has_zero_attacks() {
        let train = write_csv("proto,bytes,class\ntcp,1,normal\nudp,9,dos\nudp,8,dos\n");
        let test = write_csv("proto,bytes,class\ntcp,1,normal\nudp,9,dos\n");
        let split = make_splits(
            "tiny",
            &schema(),
            SplitPolicy::Provided {
                train: train.path(),
                test: test.path(),
            },
            0,
        )
        .unwrap();
        assert_eq!(split.normal_train_x.nrows(), 1);
    }

    #[test]
    fn scaler_is_a_function_of_train_rows_only() {
        let train = write_csv("proto,bytes,class\ntcp,1,normal\ntcp,3,normal\n");
        let test_a = write_csv("proto,bytes,class\ntcp,100,dos\ntcp,-50,normal\n");
        let test_b = write_csv("proto,bytes,class\ntcp,-50,normal\ntcp,100,dos\n");
        let split_a = make_splits(
            "tiny",
            &schema(),
            SplitPolicy::Provided {
                train: train.path(),
                test: test_a.path(),
            },
            0,
        )
        .unwrap();
        let split_b = make_splits(
            "tiny",
            &schema(),
            SplitPolicy::Provided {
                train: train.path(),
                test: test_b.path(),
            },
            0,
        )
        .unwrap();
        assert_eq!(split_a.scaler, split_b.scaler);
    }

    #[test]
    fn sample_fraction_is_exact_and_excludes_pattern() {
        let mut rows = String::from("proto,bytes,class\n");
        for i in 0..100 {
            rows.push_str(&format!("tcp,{i},normal\n"));
        }
        let day1 = write_csv(&rows);
        let day2 = write_csv(&rows);
        let split = make_splits(
            "tiny",
            &schema(),
            SplitPolicy::SampleFraction {
                files: vec![day1.path(), day2.path()],
                fraction: 0.05,
                exclude_pattern: None,
            },
            42,
        )
        .unwrap();
        assert_eq!(split.train_x.nrows(), 10); // 5% of 200 exactly
        assert_eq!(split.test_x.nrows(), 190);

        // Excluding by a pattern that matches every temp file empties the pool.
        let err = make_splits(
            "tiny",
            &schema(),
            SplitPolicy::SampleFraction {
                files: vec![day1.path()],
                fraction: 0.5,
                exclude_pattern: Some(".tmp"),
            },
            42,
        );
        assert!(err.is_err());
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let mut rows = String::from("proto,bytes,class\n");
        for i in 0..50 {
            rows.push_str(&format!("tcp,{i},normal\n"));
        }
        let f = write_csv(&rows);
        let a = make_splits(
            "tiny",
            &schema(),
            SplitPolicy::SampleFraction {
                files: vec![f.path()],
                fraction: 0.2,
                exclude_pattern: None,
            },
            7,
        )
        .unwrap();
        let b = make_splits(
            "tiny",
            &schema(),
            SplitPolicy::SampleFraction {
                files: vec![f.path()],
                fraction: 0.2,
                exclude_pattern: None,
            },
            7,
        )
        .unwrap();
        assert_eq!(a.train_x, b.train_x);
        let c = make_splits(
            "tiny",
            &schema(),
            SplitPolicy::SampleFraction {
                files: vec![f.path()],
                fraction: 0.2,
                exclude_pattern: None,
            },
            8,
        )
        .unwrap();
        assert_ne!(a.train_x, c.train_x);
    }

    #[test]
    fn loao_plans_cover_all_categories_and_exclude_held_out() {
        let train =
            write_csv("proto,bytes,class\ntcp,1,normal\nudp,9,dos\nudp,8,probe\ntcp,2,normal\n");
        let test = write_csv(
            "proto,bytes,class\ntcp,1,normal\nudp,9,dos\nicmp,4,probe\ntcp,0,normal\n",
        );
        let split = make_splits(
            "tiny",
            &schema(),
            SplitPolicy::Provided {
                train: train.path(),
                test: test.path(),
            },
            0,
        )
        .unwrap();
        let plans = make_loao_plans(&split).unwrap();
        assert_eq!(plans.len(), 2);
        let held: Vec<&str> = plans.iter().map(|p| p.held_out.as_str()).collect();
        assert_eq!(held, vec!["dos", "probe"]);

        for plan in &plans {
            for &row in &plan.supervised_train_rows {
                assert_ne!(
                    split.train_category[row].as_deref(),
                    Some(plan.held_out.as_str())
                );
            }
            for &row in &plan.eval_rows {
                let is_normal = !split.test_label[row];
                let is_held_out =
                    split.test_category[row].as_deref() == Some(plan.held_out.as_str());
                assert!(is_normal || is_held_out);
            }
        }
        // dos plan: 2 normals + 1 dos in eval; train keeps probe row.
        assert_eq!(plans[0].eval_rows.len(), 3);
        assert_eq!(plans[0].supervised_train_rows.len(), 3);
    }

    #[test]
    fn loao_without_categories_is_an_error() {
        let train = write_csv("proto,bytes,class\ntcp,1,normal\n");
        let test = write_csv("proto,bytes,class\ntcp,1,normal\n");
        let split = make_splits(
            "tiny",
            &schema(),
            SplitPolicy::Provided {
                train: train.path(),
                test: test.path(),
            },
            0,
        )
        .unwrap();
        assert!(matches!(
            make_loao_plans(&split),
            Err(DataError::NoCategories)
        ));
    }
}
