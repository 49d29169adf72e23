//! Isolation forest over latent vectors.
//!
//! Trees are grown on seeded subsamples of size `psi` with uniform-random
//! split features and uniform-random split values inside the node's range,
//! to isolation or the depth cap `ceil(log2 psi)`. The anomaly score is
//! `2^(-E[h]/c(psi))` where `E[h]` is the mean path length over trees and
//! `c(n) = 2 H(n-1) - 2 (n-1)/n` is the average BST path length, with
//! depth-capped leaves contributing `c(size)`.

use ndarray::ArrayView2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::AnomalyError;

const EULER_GAMMA: f64 = 0.577_215_664_9;

/// Average unsuccessful-search path length in a BST of `n` nodes.
pub fn c_factor(n: usize) -> f64 {
    if n < 2 {
        return 0.0;
    }
    let nf = n as f64;
    let harmonic = ((nf - 1.0).ln()) + EULER_GAMMA;
    2.0 * harmonic - 2.0 * (nf - 1.0) / nf
}

#[derive(Debug, Clone, Serialize, Deserialize)]
enum Node {
    Split {
        feature: usize,
        value: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        size: usize,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    fn path_length(&self, z: &[f64]) -> f64 {
        let mut idx = 0usize;
        let mut depth = 0.0;
        loop {
            match &self.nodes[idx] {
                Node::Leaf { size } => return depth + c_factor(*size),
                Node::Split {
                    feature,
                    value,
                    left,
                    right,
                } => {
                    idx = if z[*feature] < *value { *left } else { *right };
                    depth += 1.0;
                }
            }
        }
    }

    fn max_depth(&self) -> usize {
        fn walk(nodes: &[Node], idx: usize, depth: usize) -> usize {
            match &nodes[idx] {
                Node::Leaf { .. } => depth,
                Node::Split { left, right, .. } => {
                    walk(nodes, *left, depth + 1).max(walk(nodes, *right, depth + 1))
                }
            }
        }
        walk(&self.nodes, 0, 0)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IsolationForest {
    trees: Vec<Tree>,
    dim: usize,
    /// Effective subsample size (requested psi clamped to the row count).
    pub psi: usize,
    pub n_trees: usize,
    pub seed: u64,
}

impl IsolationForest {
    /// Fit on latent rows. `psi` is clamped to the number of rows; per-tree
    /// seeds derive deterministically from `seed`.
    pub fn fit(
        latents: ArrayView2<f64>,
        n_trees: usize,
        psi: usize,
        seed: u64,
    ) -> Result<Self, AnomalyError> {
        let rows = latents.nrows();
        if rows < 2 {
            return Err(AnomalyError::TooFewRows(rows));
        }
        if psi < 2 {
            return Err(AnomalyError::SubsampleTooSmall(psi));
        }
        let psi = psi.min(rows);
        let max_depth = (psi as f64).log2().ceil() as usize;

        let trees = (0..n_trees)
            .map(|t| {
                // SplitMix64-style stream separation per tree.
                let tree_seed = seed
                    .wrapping_add((t as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
                let mut rng = ChaCha8Rng::seed_from_u64(tree_seed);
                let sample = sample_without_replacement(rows, psi, &mut rng);
                let mut nodes = Vec::new();
                grow(latents, &sample, 0, max_depth, &mut rng, &mut nodes);
                Tree { nodes }
            })
            .collect();

        Ok(Self {
            trees,
            dim: latents.ncols(),
            psi,
            n_trees,
            seed,
        })
    }

    /// Anomaly score in (0, 1); higher is more anomalous.
    pub fn score(&self, z: &[f64]) -> Result<f64, AnomalyError> {
        if z.len() != self.dim {
            return Err(AnomalyError::DimMismatch {
                expected: self.dim,
                actual: z.len(),
            });
        }
        let mean_path: f64 =
            self.trees.iter().map(|t| t.path_length(z)).sum::<f64>() / self.trees.len() as f64;
        Ok(2f64.powf(-mean_path / c_factor(self.psi)))
    }

    pub fn score_batch(&self, latents: ArrayView2<f64>) -> Result<Vec<f64>, AnomalyError> {
        latents
            .outer_iter()
            .map(|row| self.score(row.as_slice().unwrap()))
            .collect()
    }

    /// Deepest split depth across trees; bounded by `ceil(log2 psi)`.
    pub fn max_tree_depth(&self) -> usize {
        self.trees.iter().map(Tree::max_depth).max().unwrap_or(0)
    }
}

fn sample_without_replacement(n: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    // Partial Fisher-Yates.
    let mut idx: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = rng.gen_range(i..n);
        idx.swap(i, j);
    }
    idx.truncate(k);
    idx
}

/// Grow a subtree over `rows`; returns the node index.
fn grow(
    data: ArrayView2<f64>,
    rows: &[usize],
    depth: usize,
    max_depth: usize,
    rng: &mut ChaCha8Rng,
    nodes: &mut Vec<Node>,
) -> usize {
    // Features with spread; identical points cannot be split further.
    let dim = data.ncols();
    let splittable: Vec<(usize, f64, f64)> = (0..dim)
        .filter_map(|f| {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for &r in rows {
                let v = data[[r, f]];
                lo = lo.min(v);
                hi = hi.max(v);
            }
            (hi > lo).then_some((f, lo, hi))
        })
        .collect();

    if rows.len() <= 1 || depth >= max_depth || splittable.is_empty() {
        let id = nodes.len();
        nodes.push(Node::Leaf { size: rows.len() });
        return id;
    }

    let (feature, lo, hi) = splittable[rng.gen_range(0..splittable.len())];
    let value = rng.gen_range(lo..hi);
    let (left_rows, right_rows): (Vec<usize>, Vec<usize>) =
        rows.iter().partition(|&&r| data[[r, feature]] < value);

    let id = nodes.len();
    nodes.push(Node::Leaf { size: 0 }); // placeholder until children exist
    let left = grow(data, &left_rows, depth + 1, max_depth, rng, nodes);
    let right = grow(data, &right_rows, depth + 1, max_depth, rng, nodes);
    nodes[id] = Node::Split {
        feature,
        value,
        left,
        right,
    };
    id
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};
    use rand::Rng;

    #[test]
    fn c_factor_examples() {
        assert_eq!(c_factor(0), 0.0);
        assert_eq!(c_factor(1), 0.0);
        // c(2) = 2(ln 1 + gamma) - 1
        assert!((c_factor(2) - 0.15443).abs() < 1e-4);
        assert!(c_factor(256) > c_factor(64));
    }

    #[test]
    fn identical_points_leaf_out_immediately() {
        let data = array![[1.0, 2.0], [1.0, 2.0]];
        let forest = IsolationForest::fit(data.view(), 10, 2, 0).unwrap();
        // No split possible: every tree is a single depth-0 leaf, so all
        // path lengths equal c(2).
        assert_eq!(forest.max_tree_depth(), 0);
        let s1 = forest.score(&[1.0, 2.0]).unwrap();
        let s2 = forest.score(&[50.0, -3.0]).unwrap();
        assert_eq!(s1, s2);
    }

    #[test]
    fn two_separated_points_isolate_at_depth_one() {
        let data = array![[0.0], [100.0]];
        let forest = IsolationForest::fit(data.view(), 25, 2, 7).unwrap();
        assert_eq!(forest.max_tree_depth(), 1);
        // Path length 1 for both points in every tree: score = 2^(-1/c(2)).
        let expected = 2f64.powf(-1.0 / c_factor(2));
        assert!((forest.score(&[0.0]).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn fit_is_deterministic_per_seed() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let data = Array2::from_shape_fn((80, 3), |_| rng.gen_range(-1.0..1.0));
        let a = IsolationForest::fit(data.view(), 30, 16, 11).unwrap();
        let b = IsolationForest::fit(data.view(), 30, 16, 11).unwrap();
        let za = a.score_batch(data.view()).unwrap();
        let zb = b.score_batch(data.view()).unwrap();
        assert_eq!(za, zb);
        let c = IsolationForest::fit(data.view(), 30, 16, 12).unwrap();
        assert_ne!(za, c.score_batch(data.view()).unwrap());
    }

    #[test]
    fn far_outlier_scores_highest_across_seeds() {
        for seed in 0..5 {
            let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
            let mut data = Array2::from_shape_fn((20, 1), |_| rng.gen_range(-1.0..1.0));
            data[[19, 0]] = 40.0;
            let forest = IsolationForest::fit(data.view(), 100, 20, seed).unwrap();
            let scores = forest.score_batch(data.view()).unwrap();
            let outlier = scores[19];
            for (i, s) in scores.iter().enumerate().take(19) {
                assert!(outlier > *s, "seed {seed}: inlier {i} scored {s} >= {outlier}");
            }
        }
    }

    #[test]
    fn depth_respects_cap() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let data = Array2::from_shape_fn((300, 2), |_| rng.gen_range(-1.0..1.0));
        let forest = IsolationForest::fit(data.view(), 50, 64, 1).unwrap();
        assert!(forest.max_tree_depth() <= 6); // ceil(log2 64)
    }

    #[test]
    fn mean_path_equal_to_c_psi_scores_half() {
        // Single tree over two points isolated at depth 1: E[h] = 1 + c(1)
        // = 1. Build psi so that c(psi) == 1 is not available; instead check
        // the identity directly through the formula.
        let data = array![[0.0], [1.0]];
        let forest = IsolationForest::fit(data.view(), 1, 2, 3).unwrap();
        let score = forest.score(&[0.0]).unwrap();
        let expected = 2f64.powf(-1.0 / c_factor(2));
        assert!((score - expected).abs() < 1e-12);
    }

    #[test]
    fn hand_built_tree_oracle() {
        // One tree over rows {a=[0], b=[10], c=[11]} with psi=3 and
        // max_depth=2. Whatever the random split, every leaf holds <= 1
        // point, so path lengths are integers plus c(size<=1) = 0.
        let data = array![[0.0], [10.0], [11.0]];
        let forest = IsolationForest::fit(data.view(), 1, 3, 5).unwrap();
        for z in [[0.0], [10.0], [11.0]] {
            let h = forest.trees[0].path_length(&z);
            assert!(h >= 1.0 && h <= 2.0);
            assert_eq!(h.fract(), 0.0);
        }
        let score = forest.score(&[0.0]).unwrap();
        let h = forest.trees[0].path_length(&[0.0]);
        assert!((score - 2f64.powf(-h / c_factor(3))).abs() < 1e-12);
    }

    #[test]
    fn rejects_degenerate_inputs() {
        let data = array![[0.0]];
        assert!(matches!(
            IsolationForest::fit(data.view(), 5, 2, 0),
            Err(AnomalyError::TooFewRows(1))
        ));
        let data = array![[0.0], [1.0]];
        assert!(matches!(
            IsolationForest::fit(data.view(), 5, 1, 0),
            Err(AnomalyError::SubsampleTooSmall(1))
        ));
        let forest = IsolationForest::fit(data.view(), 5, 2, 0).unwrap();
        assert!(forest.score(&[0.0, 1.0]).is_err());
    }

    #[test]
    fn gaussian_inliers_vs_uniform_outliers() {
        use rand_distr::{Distribution, StandardNormal};
        for seed in 0..5u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut data = Array2::zeros((220, 2));
            for i in 0..200 {
                for j in 0..2 {
                    let v: f64 = StandardNormal.sample(&mut rng);
                    data[[i, j]] = v;
                }
            }
            for i in 200..220 {
                for j in 0..2 {
                    data[[i, j]] = rng.gen_range(-8.0..8.0);
                }
            }
            let forest = IsolationForest::fit(data.view(), 100, 128, seed).unwrap();
            let scores = forest.score_batch(data.view()).unwrap();
            let inlier_mean: f64 = scores[..200].iter().sum::<f64>() / 200.0;
            let outlier_mean: f64 = scores[200..].iter().sum::<f64>() / 20.0;
            assert!(
                outlier_mean > inlier_mean,
                "seed {seed}: outliers {outlier_mean} <= inliers {inlier_mean}"
            );
        }
    }
}
