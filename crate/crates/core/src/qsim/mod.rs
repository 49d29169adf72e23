//! Differentiable statevector simulation of the quantum layer.
//!
//! Qubit ordering is little-endian throughout: qubit 0 is the least
//! significant bit of a computational-basis index. A `QuantumLayerSpec`
//! fixes the circuit shape; parameters are a flat `[f64]` of length
//! `n_layers * n_qubits * 3`, laid out layer-major then qubit-major, with
//! the three angles per qubit stored as `(phi, theta, omega)` for the
//! rotation `Rot(phi, theta, omega) = RZ(phi) · RY(theta) · RZ(omega)`
//! (so `RZ(omega)` acts first).

mod circuit;
mod grad;
mod state;

pub use circuit::{apply_ansatz, apply_ansatz_with, qlayer_forward, NoiseSession};
pub use grad::qlayer_gradients;
pub use state::{amplitude_embed, angle_embed, measure_expval_z, measure_probs, StateVector};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Error, Debug)]
pub enum QsimError {
    #[error("input length {actual} does not match embedding dimension {expected}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("amplitude embedding input has zero norm (degenerate state)")]
    ZeroNorm,
    #[error("non-finite value in input")]
    NonFinite,
    #[error("parameter count {actual} does not match spec shape {layers}x{qubits}x3")]
    ParamShape {
        layers: usize,
        qubits: usize,
        actual: usize,
    },
    #[error("state has {state} qubits but spec declares {spec}")]
    QubitMismatch { state: usize, spec: usize },
    #[error("gradients are defined for the noiseless circuit only")]
    NoiseInGradient,
    #[error("noise std-dev must be non-negative, got {0}")]
    NegativeSigma(f64),
}

/// How classical data enters the circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Embedding {
    /// Normalized input of length `2^N` becomes the state amplitudes.
    Amplitude,
    /// Input of length `N` drives one `RY` rotation per qubit.
    Angle,
}

/// How the final state is read out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasurementKind {
    /// Per-qubit Pauli-Z expectation values (`N` outputs).
    Expval,
    /// Full computational-basis distribution (`2^N` outputs).
    Probs,
}

/// Entangling topology applied after the rotation layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Entanglement {
    /// CZ on every ordered pair `i < j`.
    AllPairs,
    /// CZ on neighboring pairs `(i, i+1 mod N)`.
    Ring,
}

/// Shape of one quantum layer: embedding, ansatz depth, and readout.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuantumLayerSpec {
    pub n_qubits: usize,
    pub n_layers: usize,
    pub embedding: Embedding,
    pub measurement: MeasurementKind,
    pub entanglement: Entanglement,
}

impl QuantumLayerSpec {
    pub fn new(
        n_qubits: usize,
        n_layers: usize,
        embedding: Embedding,
        measurement: MeasurementKind,
        entanglement: Entanglement,
    ) -> Self {
        assert!(n_qubits >= 1, "need at least one qubit");
        assert!(n_layers >= 1, "need at least one layer");
        Self {
            n_qubits,
            n_layers,
            embedding,
            measurement,
            entanglement,
        }
    }

    /// Classical input dimension expected by the embedding.
    pub fn input_dim(&self) -> usize {
        match self.embedding {
            Embedding::Amplitude => 1 << self.n_qubits,
            Embedding::Angle => self.n_qubits,
        }
    }

    /// Classical output dimension produced by the measurement.
    pub fn output_dim(&self) -> usize {
        match self.measurement {
            MeasurementKind::Expval => self.n_qubits,
            MeasurementKind::Probs => 1 << self.n_qubits,
        }
    }

    /// Number of trainable circuit parameters (`L * N * 3`).
    pub fn param_count(&self) -> usize {
        self.n_layers * self.n_qubits * 3
    }

    pub(crate) fn check_params(&self, params: &[f64]) -> Result<(), QsimError> {
        if params.len() != self.param_count() {
            return Err(QsimError::ParamShape {
                layers: self.n_layers,
                qubits: self.n_qubits,
                actual: params.len(),
            });
        }
        Ok(())
    }
}

/// Coherent over-rotation noise: an `RX(eps)` with `eps ~ N(0, sigma^2)`
/// after each ansatz gate. `sigma == 0` reproduces the noiseless circuit
/// bit-for-bit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    pub sigma: f64,
    pub rng_seed: u64,
}

impl NoiseConfig {
    pub fn new(sigma: f64, rng_seed: u64) -> Result<Self, QsimError> {
        if sigma < 0.0 {
            return Err(QsimError::NegativeSigma(sigma));
        }
        Ok(Self { sigma, rng_seed })
    }
}

/// Average single-qubit gate fidelity and infidelity of the over-rotation
/// channel: `F_avg = (2 + exp(-sigma^2/2)) / 3`, `r = 1 - F_avg`.
pub fn avg_gate_fidelity(sigma: f64) -> Result<(f64, f64), QsimError> {
    if sigma < 0.0 {
        return Err(QsimError::NegativeSigma(sigma));
    }
    let decay = (-sigma * sigma / 2.0).exp();
    let f_avg = (2.0 + decay) / 3.0;
    let r = (1.0 - decay) / 3.0;
    Ok((f_avg, r))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fidelity_noiseless() {
        let (f, r) = avg_gate_fidelity(0.0).unwrap();
        assert_eq!(f, 1.0);
        assert_eq!(r, 0.0);
    }

    #[test]
    fn fidelity_matches_closed_form() {
        // sigma = 0.1 -> r = (1 - exp(-0.005)) / 3
        let (_, r) = avg_gate_fidelity(0.1).unwrap();
        let expected = (1.0 - (-0.005f64).exp()) / 3.0;
        assert!((r - expected).abs() < 1e-15);
        assert!((r - 1.663e-3).abs() < 1e-5);
    }

    #[test]
    fn fidelity_near_future_regime() {
        // sigma = 0.01 maps to a per-gate infidelity of about 1.7e-5.
        let (_, r) = avg_gate_fidelity(0.01).unwrap();
        assert!(r > 1.6e-5 && r < 1.8e-5, "r = {r}");
    }

    #[test]
    fn fidelity_sums_to_one_and_decreases() {
        let mut prev_f = 1.0;
        for i in 1..=100 {
            let sigma = i as f64 * 0.05;
            let (f, r) = avg_gate_fidelity(sigma).unwrap();
            assert!((f + r - 1.0).abs() < 1e-15);
            assert!(f < prev_f, "F_avg must be strictly decreasing");
            assert!(f > 2.0 / 3.0);
            prev_f = f;
        }
        let (f, _) = avg_gate_fidelity(100.0).unwrap();
        assert!((f - 2.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn fidelity_rejects_negative_sigma() {
        assert!(avg_gate_fidelity(-0.1).is_err());
        assert!(NoiseConfig::new(-1.0, 0).is_err());
    }

    #[test]
    fn spec_dimensions() {
        let spec = QuantumLayerSpec::new(
            4,
            2,
            Embedding::Amplitude,
            MeasurementKind::Probs,
            Entanglement::AllPairs,
        );
        assert_eq!(spec.input_dim(), 16);
        assert_eq!(spec.output_dim(), 16);
        assert_eq!(spec.param_count(), 24);
        let spec = QuantumLayerSpec::new(
            3,
            1,
            Embedding::Angle,
            MeasurementKind::Expval,
            Entanglement::Ring,
        );
        assert_eq!(spec.input_dim(), 3);
        assert_eq!(spec.output_dim(), 3);
    }
}
