//! Circuit construction and execution for the hardware-efficient ansatz.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::state::{amplitude_embed, angle_embed, measure_expval_z, measure_probs, Pauli};
use super::{Embedding, Entanglement, MeasurementKind, NoiseConfig, QsimError, QuantumLayerSpec, StateVector};

/// Where a gate angle comes from, for the differentiation pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum ParamRef {
    /// Index into the flat `L*N*3` ansatz parameter array.
    Ansatz(usize),
    /// Index into the classical input vector (angle-embedding rotations).
    Input(usize),
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum Gate {
    Rot {
        pauli: Pauli,
        qubit: usize,
        theta: f64,
        param: Option<ParamRef>,
    },
    Cz {
        a: usize,
        b: usize,
    },
}

impl Gate {
    pub(crate) fn apply(&self, state: &mut StateVector) {
        match *self {
            Gate::Rot {
                pauli,
                qubit,
                theta,
                ..
            } => match pauli {
                Pauli::Y => state.apply_ry(qubit, theta),
                Pauli::Z => state.apply_rz(qubit, theta),
            },
            Gate::Cz { a, b } => state.apply_cz(a, b),
        }
    }

    pub(crate) fn apply_inverse(&self, state: &mut StateVector) {
        match *self {
            Gate::Rot {
                pauli,
                qubit,
                theta,
                ..
            } => match pauli {
                Pauli::Y => state.apply_ry(qubit, -theta),
                Pauli::Z => state.apply_rz(qubit, -theta),
            },
            Gate::Cz { a, b } => state.apply_cz(a, b),
        }
    }
}

/// A built circuit: the gate sequence plus, per gate, the qubits that
/// receive an `RX(eps)` noise kick after it. A `Rot` block counts as one
/// gate for noise purposes, so only its final sub-rotation carries kicks.
pub(crate) struct Circuit {
    pub gates: Vec<Gate>,
    noise_after: Vec<Vec<usize>>,
}

impl Circuit {
    /// Angle-embedding rotations, flagged as input parameters. Embedding
    /// operations receive no noise kicks.
    pub(crate) fn embedding_gates(x: &[f64]) -> Vec<Gate> {
        x.iter()
            .enumerate()
            .map(|(q, &theta)| Gate::Rot {
                pauli: Pauli::Y,
                qubit: q,
                theta,
                param: Some(ParamRef::Input(q)),
            })
            .collect()
    }

    /// The variational ansatz: per layer, `Rot(phi, theta, omega)` on every
    /// qubit (applied as RZ(omega), RY(theta), RZ(phi)), then the entangling
    /// CZ pattern.
    pub(crate) fn ansatz(spec: &QuantumLayerSpec, params: &[f64]) -> Self {
        let n = spec.n_qubits;
        let mut gates = Vec::new();
        let mut noise_after = Vec::new();
        for layer in 0..spec.n_layers {
            for q in 0..n {
                let base = (layer * n + q) * 3;
                let (phi, theta, omega) = (params[base], params[base + 1], params[base + 2]);
                gates.push(Gate::Rot {
                    pauli: Pauli::Z,
                    qubit: q,
                    theta: omega,
                    param: Some(ParamRef::Ansatz(base + 2)),
                });
                noise_after.push(vec![]);
                gates.push(Gate::Rot {
                    pauli: Pauli::Y,
                    qubit: q,
                    theta,
                    param: Some(ParamRef::Ansatz(base + 1)),
                });
                noise_after.push(vec![]);
                gates.push(Gate::Rot {
                    pauli: Pauli::Z,
                    qubit: q,
                    theta: phi,
                    param: Some(ParamRef::Ansatz(base)),
                });
                noise_after.push(vec![q]);
            }
            for (a, b) in entangling_pairs(n, spec.entanglement) {
                gates.push(Gate::Cz { a, b });
                noise_after.push(vec![a, b]);
            }
        }
        Self { gates, noise_after }
    }

    pub(crate) fn run(&self, state: &mut StateVector, mut noise: Option<&mut NoiseSession>) {
        for (gate, kicks) in self.gates.iter().zip(&self.noise_after) {
            gate.apply(state);
            if let Some(session) = noise.as_deref_mut() {
                for &q in kicks {
                    state.apply_rx(q, session.draw());
                }
            }
        }
    }
}

/// Deterministic order of entangling CZ gates for a layer.
pub(crate) fn entangling_pairs(n: usize, topology: Entanglement) -> Vec<(usize, usize)> {
    match topology {
        Entanglement::AllPairs => {
            let mut pairs = Vec::new();
            for i in 0..n {
                for j in (i + 1)..n {
                    pairs.push((i, j));
                }
            }
            pairs
        }
        Entanglement::Ring => match n {
            0 | 1 => vec![],
            2 => vec![(0, 1)],
            _ => (0..n).map(|i| (i, (i + 1) % n)).collect(),
        },
    }
}

/// Streams over-rotation angles for one evaluation pass. Building a session
/// once and reusing it across a batch gives every sample independent noise
/// while staying deterministic for a fixed seed.
pub struct NoiseSession {
    sigma: f64,
    rng: ChaCha8Rng,
    normal: Normal<f64>,
}

impl NoiseSession {
    pub fn new(config: &NoiseConfig) -> Result<Self, QsimError> {
        if config.sigma < 0.0 {
            return Err(QsimError::NegativeSigma(config.sigma));
        }
        Ok(Self {
            sigma: config.sigma,
            rng: ChaCha8Rng::seed_from_u64(config.rng_seed),
            normal: Normal::new(0.0, config.sigma.max(f64::MIN_POSITIVE)).unwrap(),
        })
    }

    pub fn is_active(&self) -> bool {
        self.sigma > 0.0
    }

    fn draw(&mut self) -> f64 {
        self.normal.sample(&mut self.rng)
    }
}

/// Apply the variational ansatz to `state`, optionally under coherent gate
/// noise. With `sigma == 0` the noiseless path is taken and the output is
/// bit-identical to `noise = None`.
pub fn apply_ansatz(
    state: StateVector,
    params: &[f64],
    spec: &QuantumLayerSpec,
    noise: Option<&NoiseConfig>,
) -> Result<StateVector, QsimError> {
    let mut session = match noise {
        Some(cfg) => Some(NoiseSession::new(cfg)?),
        None => None,
    };
    apply_ansatz_with(state, params, spec, session.as_mut())
}

/// Like [`apply_ansatz`] but drawing noise from a caller-owned session, so a
/// batch of circuit executions shares one noise stream.
pub fn apply_ansatz_with(
    state: StateVector,
    params: &[f64],
    spec: &QuantumLayerSpec,
    noise: Option<&mut NoiseSession>,
) -> Result<StateVector, QsimError> {
    spec.check_params(params)?;
    if state.n_qubits() != spec.n_qubits {
        return Err(QsimError::QubitMismatch {
            state: state.n_qubits(),
            spec: spec.n_qubits,
        });
    }
    if params.iter().any(|p| !p.is_finite()) {
        return Err(QsimError::NonFinite);
    }
    let circuit = Circuit::ansatz(spec, params);
    let mut state = state;
    let active = noise.as_ref().map(|s| s.is_active()).unwrap_or(false);
    circuit.run(&mut state, if active { noise } else { None });
    Ok(state)
}

pub(crate) fn embed(x: &[f64], spec: &QuantumLayerSpec) -> Result<StateVector, QsimError> {
    if x.len() != spec.input_dim() {
        return Err(QsimError::LengthMismatch {
            expected: spec.input_dim(),
            actual: x.len(),
        });
    }
    match spec.embedding {
        Embedding::Amplitude => amplitude_embed(x),
        Embedding::Angle => angle_embed(x),
    }
}

pub(crate) fn measure(state: &StateVector, kind: MeasurementKind) -> Vec<f64> {
    match kind {
        MeasurementKind::Expval => measure_expval_z(state),
        MeasurementKind::Probs => measure_probs(state),
    }
}

/// Full quantum layer: embed, run the ansatz, measure.
pub fn qlayer_forward(
    x: &[f64],
    params: &[f64],
    spec: &QuantumLayerSpec,
    noise: Option<&mut NoiseSession>,
) -> Result<Vec<f64>, QsimError> {
    let state = embed(x, spec)?;
    let state = apply_ansatz_with(state, params, spec, noise)?;
    Ok(measure(&state, spec.measurement))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(
        n: usize,
        l: usize,
        embedding: Embedding,
        measurement: MeasurementKind,
    ) -> QuantumLayerSpec {
        QuantumLayerSpec::new(n, l, embedding, measurement, Entanglement::AllPairs)
    }

    #[test]
    fn zero_params_leave_zero_state_unchanged() {
        let s = spec(2, 1, Embedding::Amplitude, MeasurementKind::Expval);
        let params = vec![0.0; s.param_count()];
        let state = amplitude_embed(&[1.0, 0.0, 0.0, 0.0]).unwrap();
        let out = apply_ansatz(state.clone(), &params, &s, None).unwrap();
        assert_eq!(out.amplitudes(), state.amplitudes());
    }

    #[test]
    fn single_ry_rotation_flips_qubit() {
        let s = QuantumLayerSpec::new(
            1,
            1,
            Embedding::Angle,
            MeasurementKind::Probs,
            Entanglement::AllPairs,
        );
        // params (phi, theta, omega) = (0, pi, 0): Rot reduces to RY(pi).
        let params = vec![0.0, std::f64::consts::PI, 0.0];
        let state = StateVector::zero_state(1);
        let out = apply_ansatz(state, &params, &s, None).unwrap();
        assert!(out.amplitudes()[0].norm() < 1e-12);
        assert!((out.amplitudes()[1].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn qlayer_forward_composition() {
        let s = spec(2, 1, Embedding::Amplitude, MeasurementKind::Expval);
        let params = vec![0.0; s.param_count()];
        let out = qlayer_forward(&[1.0, 0.0, 0.0, 0.0], &params, &s, None).unwrap();
        assert_eq!(out, vec![1.0, 1.0]);

        let s = QuantumLayerSpec::new(
            1,
            1,
            Embedding::Angle,
            MeasurementKind::Probs,
            Entanglement::AllPairs,
        );
        let out = qlayer_forward(&[0.0], &[0.0, 0.0, 0.0], &s, None).unwrap();
        assert!((out[0] - 1.0).abs() < 1e-12);
        assert!(out[1].abs() < 1e-12);
    }

    #[test]
    fn param_shape_is_checked() {
        let s = spec(2, 2, Embedding::Amplitude, MeasurementKind::Expval);
        let state = StateVector::zero_state(2);
        let err = apply_ansatz(state, &[0.0; 5], &s, None);
        assert!(matches!(err, Err(QsimError::ParamShape { .. })));
    }

    #[test]
    fn input_dim_is_checked() {
        let s = spec(2, 1, Embedding::Amplitude, MeasurementKind::Expval);
        let err = qlayer_forward(&[1.0, 0.0], &vec![0.0; s.param_count()], &s, None);
        assert!(matches!(err, Err(QsimError::LengthMismatch { .. })));
    }

    #[test]
    fn noise_is_deterministic_per_seed() {
        let s = spec(3, 2, Embedding::Amplitude, MeasurementKind::Probs);
        let params: Vec<f64> = (0..s.param_count()).map(|i| (i as f64) * 0.1 - 1.0).collect();
        let x: Vec<f64> = (0..8).map(|i| (i as f64) - 3.5).collect();
        let cfg = NoiseConfig::new(0.25, 99).unwrap();

        let mut s1 = NoiseSession::new(&cfg).unwrap();
        let mut s2 = NoiseSession::new(&cfg).unwrap();
        let a = qlayer_forward(&x, &params, &s, Some(&mut s1)).unwrap();
        let b = qlayer_forward(&x, &params, &s, Some(&mut s2)).unwrap();
        assert_eq!(a, b);

        // A different seed must give different outputs.
        let cfg2 = NoiseConfig::new(0.25, 100).unwrap();
        let mut s3 = NoiseSession::new(&cfg2).unwrap();
        let c = qlayer_forward(&x, &params, &s, Some(&mut s3)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn sigma_zero_is_bit_identical_to_noiseless() {
        let s = spec(3, 2, Embedding::Amplitude, MeasurementKind::Expval);
        let params: Vec<f64> = (0..s.param_count()).map(|i| (i as f64) * 0.07).collect();
        let x: Vec<f64> = (0..8).map(|i| 1.0 + i as f64).collect();
        let noiseless = qlayer_forward(&x, &params, &s, None).unwrap();
        let cfg = NoiseConfig::new(0.0, 7).unwrap();
        let mut session = NoiseSession::new(&cfg).unwrap();
        let zero_sigma = qlayer_forward(&x, &params, &s, Some(&mut session)).unwrap();
        assert_eq!(noiseless, zero_sigma);
    }

    #[test]
    fn ring_topology_pairs() {
        assert_eq!(entangling_pairs(2, Entanglement::Ring), vec![(0, 1)]);
        assert_eq!(
            entangling_pairs(4, Entanglement::Ring),
            vec![(0, 1), (1, 2), (2, 3), (3, 0)]
        );
        assert_eq!(
            entangling_pairs(3, Entanglement::AllPairs),
            vec![(0, 1), (0, 2), (1, 2)]
        );
    }
}
