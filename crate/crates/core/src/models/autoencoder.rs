//! The unified autoencoder: classical or hybrid encoder, optional
//! variational heads, optional latent centroid, classical mirrored decoder.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand_chacha::ChaCha8Rng;
use std::ops::Range;

use super::{Family, ModelConfig, ParamCounts, Placement};
use crate::nncore::{
    kl_loss_batch, mse_loss, mse_per_sample, reparameterize, total_loss, Activation, Batch,
    LossConfig, NnError, Stack, StackTrace, StageSpec, Trainable, LOGVAR_CLAMP,
};
use crate::qsim::NoiseSession;

/// Parameter layout: `[encoder | mu head | logvar head? | decoder | centroid?]`.
#[derive(Debug, Clone)]
struct Layout {
    enc: Range<usize>,
    mu: Range<usize>,
    logvar: Option<Range<usize>>,
    dec: Range<usize>,
    centroid: Option<Range<usize>>,
    total: usize,
}

pub struct AutoencoderModel {
    pub input_dim: usize,
    pub latent_dim: usize,
    pub variational: bool,
    pub loss_cfg: LossConfig,
    enc: Stack,
    to_mu: Stack,
    to_logvar: Option<Stack>,
    dec: Stack,
    layout: Layout,
}

/// Forward-pass outputs; `mu`/`logvar` are present for variational models.
pub struct AeOutput {
    pub z: Array2<f64>,
    pub x_hat: Array2<f64>,
    pub mu: Array2<f64>,
    pub logvar: Option<Array2<f64>>,
}

struct FullTrace {
    enc: StackTrace,
    mu: StackTrace,
    logvar: Option<StackTrace>,
    dec: StackTrace,
    z: Array2<f64>,
}

impl AutoencoderModel {
    /// Assemble the stage list for a validated config.
    pub(super) fn build(cfg: &ModelConfig, input_dim: usize) -> Self {
        let enc = match cfg.family {
            Family::Classical => {
                let mut stages = Vec::new();
                let mut dim = input_dim;
                for &w in &cfg.encoder_widths {
                    stages.push(StageSpec::Dense {
                        in_dim: dim,
                        out_dim: w,
                        activation: Activation::Relu,
                    });
                    dim = w;
                }
                Stack::new(stages)
            }
            Family::Hqc => {
                let qspec = cfg.qspec().expect("validated hqc config");
                let mut stages = Vec::new();
                match cfg.placement.expect("validated hqc config") {
                    // Single projection to 2^N, bounded for a well-defined
                    // amplitude embedding.
                    Placement::Early => {
                        stages.push(StageSpec::Dense {
                            in_dim: input_dim,
                            out_dim: qspec.input_dim(),
                            activation: Activation::Tanh,
                        });
                    }
                    // Full width stack, then a bounded projection to N
                    // rotation angles.
                    Placement::Late => {
                        let mut dim = input_dim;
                        for &w in &cfg.encoder_widths {
                            stages.push(StageSpec::Dense {
                                in_dim: dim,
                                out_dim: w,
                                activation: Activation::Relu,
                            });
                            dim = w;
                        }
                        stages.push(StageSpec::Dense {
                            in_dim: dim,
                            out_dim: qspec.input_dim(),
                            activation: Activation::Tanh,
                        });
                    }
                }
                stages.push(StageSpec::Quantum(qspec));
                Stack::new(stages)
            }
        };

        let h_dim = enc.out_dim();
        let head = |_: &str| {
            Stack::new(vec![StageSpec::Dense {
                in_dim: h_dim,
                out_dim: cfg.latent_dim,
                activation: Activation::Identity,
            }])
        };
        let to_mu = head("mu");
        let to_logvar = cfg.variational.then(|| head("logvar"));

        let mut dec_stages = Vec::new();
        let mut dim = cfg.latent_dim;
        for &w in cfg.encoder_widths.iter().rev() {
            dec_stages.push(StageSpec::Dense {
                in_dim: dim,
                out_dim: w,
                activation: Activation::Relu,
            });
            dim = w;
        }
        dec_stages.push(StageSpec::Dense {
            in_dim: dim,
            out_dim: input_dim,
            activation: Activation::Identity,
        });
        let dec = Stack::new(dec_stages);

        let mut offset = 0;
        let mut take = |n: usize| {
            let r = offset..offset + n;
            offset += n;
            r
        };
        let layout = Layout {
            enc: take(enc.param_count()),
            mu: take(to_mu.param_count()),
            logvar: to_logvar.as_ref().map(|s| take(s.param_count())),
            dec: take(dec.param_count()),
            centroid: cfg.latent_reg.then(|| take(cfg.latent_dim)),
            total: 0,
        };
        let layout = Layout {
            total: offset,
            ..layout
        };

        Self {
            input_dim,
            latent_dim: cfg.latent_dim,
            variational: cfg.variational,
            loss_cfg: cfg.loss_config(),
            enc,
            to_mu,
            to_logvar,
            dec,
            layout,
        }
    }

    pub fn param_count(&self) -> usize {
        self.layout.total
    }

    pub fn param_counts(&self) -> ParamCounts {
        let quantum: usize = self
            .enc
            .stages()
            .iter()
            .filter_map(|s| match s {
                StageSpec::Quantum(spec) => Some(spec.param_count()),
                StageSpec::Dense { .. } => None,
            })
            .sum();
        ParamCounts {
            dense: self.layout.total - quantum,
            quantum,
        }
    }

    pub fn centroid<'a>(&self, params: &'a [f64]) -> Option<&'a [f64]> {
        self.layout
            .centroid
            .as_ref()
            .map(|r| &params[r.clone()])
    }

    fn forward_full(
        &self,
        params: &[f64],
        x: ArrayView2<f64>,
        rng: Option<&mut ChaCha8Rng>,
        noise: Option<&mut NoiseSession>,
    ) -> Result<FullTrace, NnError> {
        let enc = self.enc.forward(&params[self.layout.enc.clone()], x, noise)?;
        let mu = self
            .to_mu
            .forward(&params[self.layout.mu.clone()], enc.output.view(), None)?;
        let logvar = match (&self.to_logvar, &self.layout.logvar) {
            (Some(stack), Some(range)) => {
                Some(stack.forward(&params[range.clone()], enc.output.view(), None)?)
            }
            _ => None,
        };

        let z = match (&logvar, rng) {
            // Training mode: sample via the reparameterization trick.
            (Some(lv), Some(rng)) => {
                let mut z = Array2::zeros(mu.output.dim());
                for ((m, l), mut row) in mu
                    .output
                    .outer_iter()
                    .zip(lv.output.outer_iter())
                    .zip(z.outer_iter_mut())
                {
                    let sample = reparameterize(
                        m.as_slice().unwrap(),
                        l.as_slice().unwrap(),
                        rng,
                    );
                    row.assign(&Array1::from(sample));
                }
                z
            }
            // Evaluation mode (or non-variational): z = mu.
            _ => mu.output.clone(),
        };

        let dec = self
            .dec
            .forward(&params[self.layout.dec.clone()], z.view(), None)?;
        Ok(FullTrace {
            enc,
            mu,
            logvar,
            dec,
            z,
        })
    }

    /// Forward pass. Training mode (with `rng`) samples the latent via
    /// reparameterization; evaluation mode uses `z = mu` for deterministic
    /// scores.
    pub fn forward(
        &self,
        params: &[f64],
        x: ArrayView2<f64>,
        rng: Option<&mut ChaCha8Rng>,
    ) -> Result<AeOutput, NnError> {
        let t = self.forward_full(params, x, rng, None)?;
        Ok(AeOutput {
            z: t.z,
            x_hat: t.dec.output,
            mu: t.mu.output,
            logvar: t.logvar.map(|l| l.output),
        })
    }

    /// Per-sample reconstruction errors in evaluation mode, optionally under
    /// coherent gate noise on the quantum stage.
    pub fn recon_errors(
        &self,
        params: &[f64],
        x: ArrayView2<f64>,
        noise: Option<&mut NoiseSession>,
    ) -> Result<Array1<f64>, NnError> {
        let t = self.forward_full(params, x, None, noise)?;
        Ok(mse_per_sample(x, t.dec.output.view()))
    }

    /// Evaluation-mode latent representations (`z = mu`), optionally noisy.
    pub fn latents(
        &self,
        params: &[f64],
        x: ArrayView2<f64>,
        noise: Option<&mut NoiseSession>,
    ) -> Result<Array2<f64>, NnError> {
        let t = self.forward_full(params, x, None, noise)?;
        Ok(t.z)
    }

    fn losses(
        &self,
        params: &[f64],
        x: ArrayView2<f64>,
        trace: &FullTrace,
    ) -> Result<(f64, f64, f64), NnError> {
        let recon = mse_loss(x, trace.dec.output.view())?;
        let kl = match &trace.logvar {
            Some(lv) => kl_loss_batch(trace.mu.output.view(), lv.output.view())?,
            None => 0.0,
        };
        let reg = match self.centroid(params) {
            Some(c) => {
                let c = Array1::from(c.to_vec());
                let diff = &trace.z - &c;
                diff.mapv(|v| v * v).sum() / trace.z.nrows() as f64
            }
            None => 0.0,
        };
        Ok((recon, kl, reg))
    }
}

impl Trainable for AutoencoderModel {
    fn init_params(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let mut params = Vec::with_capacity(self.layout.total);
        params.extend(self.enc.init_params(rng));
        params.extend(self.to_mu.init_params(rng));
        if let Some(lv) = &self.to_logvar {
            params.extend(lv.init_params(rng));
        }
        params.extend(self.dec.init_params(rng));
        if self.layout.centroid.is_some() {
            // Centroid starts at the origin; latent features are centered
            // after standardization.
            params.resize(params.len() + self.latent_dim, 0.0);
        }
        params
    }

    fn batch_loss_grad(
        &self,
        params: &[f64],
        batch: Batch<'_>,
        rng: &mut ChaCha8Rng,
    ) -> Result<(f64, Vec<f64>), NnError> {
        let x = batch.x;
        let b = x.nrows() as f64;
        let trace = self.forward_full(params, x, Some(rng), None)?;
        let (recon, kl, reg) = self.losses(params, x, &trace)?;
        let loss = total_loss(recon, kl, reg, &self.loss_cfg)?;

        let mut grad = vec![0.0; params.len()];

        // d recon / d x_hat, mean over features and batch.
        let upstream_xhat = (&trace.dec.output - &x) * (2.0 / (b * x.ncols() as f64));
        let mut g_z = self.dec.backward(
            &params[self.layout.dec.clone()],
            &trace.dec,
            upstream_xhat,
            &mut grad[self.layout.dec.clone()],
        )?;

        // Latent regularization pulls z toward the centroid and the
        // centroid toward the batch.
        if let Some(c_range) = &self.layout.centroid {
            let c = Array1::from(params[c_range.clone()].to_vec());
            let diff = &trace.z - &c;
            let scale = 2.0 * self.loss_cfg.alpha / b;
            g_z += &(&diff * scale);
            let c_grad = diff.sum_axis(Axis(0)) * (-scale);
            for (dst, src) in grad[c_range.clone()].iter_mut().zip(c_grad.iter()) {
                *dst += src;
            }
        }

        let g_h = if let (Some(lv_stack), Some(lv_range), Some(lv_trace)) = (
            &self.to_logvar,
            &self.layout.logvar,
            &trace.logvar,
        ) {
            // z = mu + exp(lv/2) * eps, so dz/dmu = 1 and
            // dz/dlv = (z - mu)/2 (zero where the clamp saturates).
            let mut g_mu = g_z.clone();
            let mut g_lv = (&trace.z - &trace.mu.output) * 0.5 * &g_z;
            for (mut row, lv_row) in g_lv.outer_iter_mut().zip(lv_trace.output.outer_iter()) {
                for (g, lv) in row.iter_mut().zip(lv_row.iter()) {
                    if lv.abs() > LOGVAR_CLAMP {
                        *g = 0.0;
                    }
                }
            }
            // KL term: d/dmu = mu, d/dlv = (exp(lv) - 1)/2, both averaged
            // over the batch and weighted by beta.
            let kw = self.loss_cfg.beta / b;
            g_mu += &(&trace.mu.output * kw);
            for (mut row, lv_row) in g_lv.outer_iter_mut().zip(lv_trace.output.outer_iter()) {
                for (g, lv) in row.iter_mut().zip(lv_row.iter()) {
                    if lv.abs() <= LOGVAR_CLAMP {
                        *g += kw * 0.5 * (lv.exp() - 1.0);
                    }
                }
            }
            let g_h_mu = self.to_mu.backward(
                &params[self.layout.mu.clone()],
                &trace.mu,
                g_mu,
                &mut grad[self.layout.mu.clone()],
            )?;
            let g_h_lv = lv_stack.backward(
                &params[lv_range.clone()],
                lv_trace,
                g_lv,
                &mut grad[lv_range.clone()],
            )?;
            g_h_mu + g_h_lv
        } else {
            self.to_mu.backward(
                &params[self.layout.mu.clone()],
                &trace.mu,
                g_z,
                &mut grad[self.layout.mu.clone()],
            )?
        };

        self.enc.backward(
            &params[self.layout.enc.clone()],
            &trace.enc,
            g_h,
            &mut grad[self.layout.enc.clone()],
        )?;

        Ok((loss, grad))
    }

    fn batch_loss(&self, params: &[f64], batch: Batch<'_>) -> Result<f64, NnError> {
        let trace = self.forward_full(params, batch.x, None, None)?;
        let (recon, kl, reg) = self.losses(params, batch.x, &trace)?;
        total_loss(recon, kl, reg, &self.loss_cfg)
    }
}
