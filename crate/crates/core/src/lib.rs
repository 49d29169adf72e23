//! Hybrid quantum-classical autoencoders for unsupervised network anomaly
//! detection.
//!
//! The crate is organized around the experiment pipeline:
//!
//! - [`qsim`] — differentiable statevector simulation of the quantum layer
//!   (embeddings, hardware-efficient ansatz, measurements, adjoint gradients,
//!   coherent gate noise).
//! - [`nncore`] — minimal dense network core: losses, reparameterization,
//!   Adam, and an early-stopping training loop with reverse-mode gradients.
//! - [`models`] — the four autoencoder types, their hybrid variants, and the
//!   supervised baseline.
//! - [`anomaly`] — reconstruction-error thresholding and an isolation forest
//!   over latent representations.
//! - [`data`] — CSV ingestion, one-hot/standardization preprocessing, split
//!   construction (including leave-one-attack-out), and a synthetic
//!   generator for desk-scale runs.
//! - [`evalstats`] — AUROC, seed aggregation, paired t-tests, noise sweeps,
//!   and report shaping.

pub mod anomaly;
pub mod data;
pub mod evalstats;
pub mod models;
pub mod nncore;
pub mod qsim;
