//! The unified loss: reconstruction, KL divergence, latent regularization.

use ndarray::{Array1, ArrayView2};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::NnError;

/// Log-variances are clamped to `[-LOGVAR_CLAMP, LOGVAR_CLAMP]` before
/// exponentiation.
pub const LOGVAR_CLAMP: f64 = 10.0;

/// Weights of the unified objective
/// `L = L_recon + beta * L_KL + alpha * L_reg`. Setting a weight to zero
/// switches the corresponding term off, which is the only difference
/// between the four model types (AE, VAE, each with or without latent
/// regularization).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossConfig {
    pub alpha: f64,
    pub beta: f64,
}

impl LossConfig {
    pub fn new(alpha: f64, beta: f64) -> Result<Self, NnError> {
        if alpha < 0.0 || beta < 0.0 {
            return Err(NnError::NegativeWeight { alpha, beta });
        }
        Ok(Self { alpha, beta })
    }

    /// Plain autoencoder: reconstruction loss only.
    pub fn plain() -> Self {
        Self {
            alpha: 0.0,
            beta: 0.0,
        }
    }
}

fn check_same_shape(a: (usize, usize), b: (usize, usize)) -> Result<(), NnError> {
    if a != b {
        return Err(NnError::ShapeMismatch {
            expected: format!("{:?}", a),
            actual: format!("{:?}", b),
        });
    }
    Ok(())
}

/// Mean squared reconstruction error: mean over features, then mean over
/// the batch.
pub fn mse_loss(x: ArrayView2<f64>, x_hat: ArrayView2<f64>) -> Result<f64, NnError> {
    check_same_shape(x.dim(), x_hat.dim())?;
    Ok(mse_per_sample(x, x_hat).mean().unwrap_or(0.0))
}

/// Per-sample reconstruction errors (mean over features); this is the
/// anomaly score convention.
pub fn mse_per_sample(x: ArrayView2<f64>, x_hat: ArrayView2<f64>) -> Array1<f64> {
    let d = x.ncols() as f64;
    let diff = &x_hat.to_owned() - &x;
    diff.mapv(|v| v * v).sum_axis(ndarray::Axis(1)) / d
}

/// KL divergence of a diagonal Gaussian against the standard normal:
/// `0.5 * sum_k (mu_k^2 + exp(logvar_k) - logvar_k - 1)`.
pub fn kl_loss(mu: &[f64], logvar: &[f64]) -> Result<f64, NnError> {
    if mu.len() != logvar.len() {
        return Err(NnError::ShapeMismatch {
            expected: mu.len().to_string(),
            actual: logvar.len().to_string(),
        });
    }
    if mu.iter().chain(logvar).any(|v| !v.is_finite()) {
        return Err(NnError::NonFinite("kl_loss input"));
    }
    Ok(mu
        .iter()
        .zip(logvar)
        .map(|(m, lv)| {
            let lv = lv.clamp(-LOGVAR_CLAMP, LOGVAR_CLAMP);
            0.5 * (m * m + lv.exp() - lv - 1.0)
        })
        .sum())
}

/// Mean KL over a batch of (mu, logvar) rows.
pub fn kl_loss_batch(mu: ArrayView2<f64>, logvar: ArrayView2<f64>) -> Result<f64, NnError> {
    check_same_shape(mu.dim(), logvar.dim())?;
    let mut total = 0.0;
    for (m, lv) in mu.outer_iter().zip(logvar.outer_iter()) {
        total += kl_loss(m.as_slice().unwrap(), lv.as_slice().unwrap())?;
    }
    Ok(total / mu.nrows() as f64)
}

/// Squared distance between a latent vector and the learnable centroid:
/// `||z - mu_c||^2`.
pub fn latent_reg_loss(z: &[f64], centroid: &[f64]) -> Result<f64, NnError> {
    if z.len() != centroid.len() {
        return Err(NnError::ShapeMismatch {
            expected: centroid.len().to_string(),
            actual: z.len().to_string(),
        });
    }
    Ok(z.iter()
        .zip(centroid)
        .map(|(zi, ci)| (zi - ci) * (zi - ci))
        .sum())
}

/// Unified objective `recon + beta * kl + alpha * reg`.
pub fn total_loss(recon: f64, kl: f64, reg: f64, cfg: &LossConfig) -> Result<f64, NnError> {
    if cfg.alpha < 0.0 || cfg.beta < 0.0 {
        return Err(NnError::NegativeWeight {
            alpha: cfg.alpha,
            beta: cfg.beta,
        });
    }
    Ok(recon + cfg.beta * kl + cfg.alpha * reg)
}

/// Reparameterization trick: `z = mu + exp(logvar / 2) * eps` with
/// `eps ~ N(0, I)` drawn from the given rng.
pub fn reparameterize(mu: &[f64], logvar: &[f64], rng: &mut ChaCha8Rng) -> Vec<f64> {
    mu.iter()
        .zip(logvar)
        .map(|(m, lv)| {
            let eps: f64 = StandardNormal.sample(rng);
            m + (lv.clamp(-LOGVAR_CLAMP, LOGVAR_CLAMP) / 2.0).exp() * eps
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::SeedableRng;

    #[test]
    fn mse_examples() {
        let x = array![[1.0, 0.0]];
        assert_eq!(mse_loss(x.view(), x.view()).unwrap(), 0.0);
        let x_hat = array![[0.0, 0.0]];
        assert_eq!(mse_loss(x.view(), x_hat.view()).unwrap(), 0.5);

        let x = array![[1.0, 1.0], [0.0, 0.0]];
        let x_hat = array![[0.0, 0.0], [0.0, 0.0]];
        assert_eq!(mse_loss(x.view(), x_hat.view()).unwrap(), 0.5);
    }

    #[test]
    fn mse_rejects_shape_mismatch() {
        let x = array![[1.0, 0.0]];
        let y = array![[1.0, 0.0, 0.0]];
        assert!(mse_loss(x.view(), y.view()).is_err());
    }

    #[test]
    fn kl_examples() {
        assert_eq!(kl_loss(&[0.0], &[0.0]).unwrap(), 0.0);
        assert_eq!(kl_loss(&[1.0], &[0.0]).unwrap(), 0.5);
        let expected = 0.5 * (2.0 - 2.0f64.ln() - 1.0);
        assert!((kl_loss(&[0.0], &[2.0f64.ln()]).unwrap() - expected).abs() < 1e-12);
        assert!((expected - 0.15343).abs() < 1e-5);
    }

    #[test]
    fn kl_is_nonnegative() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        use rand::Rng;
        for _ in 0..500 {
            let mu: Vec<f64> = (0..4).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let lv: Vec<f64> = (0..4).map(|_| rng.gen_range(-5.0..5.0)).collect();
            assert!(kl_loss(&mu, &lv).unwrap() >= 0.0);
        }
    }

    #[test]
    fn kl_rejects_non_finite() {
        assert!(kl_loss(&[f64::NAN], &[0.0]).is_err());
    }

    #[test]
    fn latent_reg_examples() {
        assert_eq!(latent_reg_loss(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(latent_reg_loss(&[1.0, 1.0], &[0.0, 0.0]).unwrap(), 2.0);
        assert_eq!(latent_reg_loss(&[3.0], &[1.0]).unwrap(), 4.0);
    }

    #[test]
    fn total_loss_examples() {
        let ae = LossConfig::new(0.0, 0.0).unwrap();
        assert_eq!(total_loss(0.5, 0.2, 0.3, &ae).unwrap(), 0.5);
        let both = LossConfig::new(1.0, 1.0).unwrap();
        assert_eq!(total_loss(0.5, 0.2, 0.3, &both).unwrap(), 1.0);
        let mixed = LossConfig::new(0.1, 0.5).unwrap();
        assert!((total_loss(0.5, 0.2, 0.3, &mixed).unwrap() - 0.63).abs() < 1e-12);
        assert!(LossConfig::new(-0.1, 0.0).is_err());
    }

    #[test]
    fn reparameterize_is_seeded_and_centered() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let z1 = reparameterize(&[1.0, -2.0], &[0.0, 0.0], &mut rng);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let z2 = reparameterize(&[1.0, -2.0], &[0.0, 0.0], &mut rng);
        assert_eq!(z1, z2);

        // logvar -> -inf (clamped) collapses z onto mu.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let z = reparameterize(&[1.0], &[-1e9], &mut rng);
        assert!((z[0] - 1.0).abs() < 1e-2);
    }
}
