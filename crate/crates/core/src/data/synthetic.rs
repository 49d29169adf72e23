//! Seeded synthetic dataset for desk-scale runs.
//!
//! Normal traffic lives on a random low-dimensional subspace plus small
//! isotropic noise. Two attack categories alternate: `offplane` samples are
//! full-rank Gaussians with energy outside the subspace, `shifted` samples
//! are normal-like but displaced along a direction orthogonal to the
//! subspace. Both are invisible to per-feature statistics but easy to
//! separate through a subspace-aware reconstruction.

use ndarray::{Array1, Array2, Axis};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::encode::StandardScaler;
use super::split::{DatasetSplit, Provenance};

const CATEGORIES: [&str; 2] = ["offplane", "shifted"];

/// Generate a split with `n_normal` normal training rows (plus a small
/// labeled attack pool for the supervised baseline), and a test set of
/// `n_normal / 2` normals and `n_anomalies` attacks.
pub fn synthetic_dataset(
    seed: u64,
    n_normal: usize,
    n_anomalies: usize,
    dim: usize,
) -> DatasetSplit {
    assert!(dim >= 2, "synthetic generator needs dim >= 2");
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let k = (dim / 8).max(2);
    let basis = orthonormal_basis(dim, k, &mut rng);
    let shift_dir = orthogonal_unit(&basis, dim, &mut rng);

    let normal_row = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        let z: Vec<f64> = (0..k).map(|_| StandardNormal.sample(rng)).collect();
        (0..dim)
            .map(|i| {
                let signal: f64 = (0..k).map(|j| basis[[i, j]] * z[j]).sum();
                let noise: f64 = StandardNormal.sample(rng);
                signal + 0.05 * noise
            })
            .collect()
    };
    let attack_row = |rng: &mut ChaCha8Rng, category: &str| -> Vec<f64> {
        match category {
            "offplane" => (0..dim).map(|_| StandardNormal.sample(rng)).collect(),
            _ => {
                let mut row = normal_row(rng);
                for (i, v) in row.iter_mut().enumerate() {
                    *v += 1.5 * shift_dir[i];
                }
                row
            }
        }
    };

    // Train: normals plus a labeled attack pool so supervised baselines and
    // LOAO plans have positives to learn from. The normal-only view used by
    // the unsupervised models excludes the pool.
    let n_train_attacks = n_anomalies / 2;
    let mut train_rows = Vec::new();
    let mut train_label = Vec::new();
    let mut train_category = Vec::new();
    for _ in 0..n_normal {
        train_rows.push(normal_row(&mut rng));
        train_label.push(false);
        train_category.push(None);
    }
    for i in 0..n_train_attacks {
        let category = CATEGORIES[i % 2];
        train_rows.push(attack_row(&mut rng, category));
        train_label.push(true);
        train_category.push(Some(category.to_string()));
    }

    let n_test_normal = n_normal / 2;
    let mut test_rows = Vec::new();
    let mut test_label = Vec::new();
    let mut test_category = Vec::new();
    for _ in 0..n_test_normal {
        test_rows.push(normal_row(&mut rng));
        test_label.push(false);
        test_category.push(None);
    }
    for i in 0..n_anomalies {
        let category = CATEGORIES[i % 2];
        test_rows.push(attack_row(&mut rng, category));
        test_label.push(true);
        test_category.push(Some(category.to_string()));
    }

    let to_matrix = |rows: &[Vec<f64>]| {
        let mut m = Array2::zeros((rows.len(), dim));
        for (i, row) in rows.iter().enumerate() {
            m.row_mut(i).assign(&Array1::from(row.clone()));
        }
        m
    };
    let train_raw = to_matrix(&train_rows);
    let test_raw = to_matrix(&test_rows);

    let scaler = StandardScaler::fit(train_raw.view());
    let train_x = scaler.transform(train_raw.view());
    let test_x = scaler.transform(test_raw.view());

    let normal_rows: Vec<usize> = (0..n_normal).collect();
    let normal_train_x = train_x.select(Axis(0), &normal_rows);

    DatasetSplit {
        dataset_id: "synthetic".to_string(),
        feature_names: (0..dim).map(|i| format!("x{i}")).collect(),
        train_x,
        train_label,
        train_category,
        test_x,
        test_label,
        test_category,
        normal_train_x,
        scaler,
        provenance: Provenance {
            source_files: vec![format!("synthetic(seed={seed})")],
            sampling_seed: seed,
            dropped_train: 0,
            dropped_test: 0,
        },
    }
}

/// Random `dim x k` matrix with orthonormal columns (Gram-Schmidt over
/// Gaussian draws).
fn orthonormal_basis(dim: usize, k: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let mut basis = Array2::zeros((dim, k));
    for j in 0..k {
        let mut v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        for prev in 0..j {
            let dot: f64 = (0..dim).map(|i| v[i] * basis[[i, prev]]).sum();
            for i in 0..dim {
                v[i] -= dot * basis[[i, prev]];
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        for i in 0..dim {
            basis[[i, j]] = v[i] / norm;
        }
    }
    basis
}

/// A unit vector orthogonal to every basis column.
fn orthogonal_unit(basis: &Array2<f64>, dim: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let k = basis.ncols();
    let mut v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
    for j in 0..k {
        let dot: f64 = (0..dim).map(|i| v[i] * basis[[i, j]]).sum();
        for i in 0..dim {
            v[i] -= dot * basis[[i, j]];
        }
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / norm).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_is_deterministic() {
        let a = synthetic_dataset(3, 100, 20, 16);
        let b = synthetic_dataset(3, 100, 20, 16);
        assert_eq!(a.train_x, b.train_x);
        assert_eq!(a.test_x, b.test_x);
        let c = synthetic_dataset(4, 100, 20, 16);
        assert_ne!(a.train_x, c.train_x);
    }

    #[test]
    fn shapes_and_labels() {
        let split = synthetic_dataset(0, 200, 40, 32);
        assert_eq!(split.train_x.nrows(), 220); // 200 normal + 20 attack pool
        assert_eq!(split.normal_train_x.nrows(), 200);
        assert_eq!(split.test_x.nrows(), 140); // 100 normal + 40 attacks
        assert_eq!(split.test_label.iter().filter(|l| **l).count(), 40);
        assert_eq!(split.n_features(), 32);
        assert_eq!(split.test_categories(), vec!["offplane", "shifted"]);
    }

    #[test]
    fn zero_anomalies_gives_all_normal_test_set() {
        let split = synthetic_dataset(1, 50, 0, 8);
        assert!(split.test_label.iter().all(|l| !l));
        assert!(split.test_categories().is_empty());
        assert_eq!(split.train_x.nrows(), 50);
    }

    #[test]
    fn train_features_are_standardized() {
        let split = synthetic_dataset(5, 400, 0, 16);
        for j in 0..16 {
            let col = split.train_x.column(j);
            let mean = col.mean().unwrap();
            let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
                / col.len() as f64;
            assert!(mean.abs() < 1e-8);
            assert!((var - 1.0).abs() < 1e-8);
        }
    }
}
