//! Adjoint-mode differentiation of the quantum layer.
//!
//! Both readouts are diagonal observables: `sum_i w_i <Z_i>` and
//! `sum_j w_j P(j)` can each be written as `<psi_f| D |psi_f>` for a real
//! diagonal `D` built from the upstream weights. The scalar is then
//! differentiated with a single backward sweep over the gate list: for each
//! parameterized rotation `G = exp(-i theta P/2)`,
//! `d<D>/d theta = 2 Re <lambda| (-i P/2) |psi>` with `|psi>` the state
//! after the gate and `|lambda>` the observable-propagated dual state.

use num_complex::Complex64;

use super::circuit::{embed, Circuit, Gate, ParamRef};
use super::{Embedding, MeasurementKind, QsimError, QuantumLayerSpec, StateVector};

/// Exact gradients of `upstream . qlayer_forward(x, params)` with respect to
/// the ansatz parameters and the classical input. Noiseless circuits only;
/// noise is an evaluation-time perturbation.
pub fn qlayer_gradients(
    x: &[f64],
    params: &[f64],
    spec: &QuantumLayerSpec,
    upstream: &[f64],
) -> Result<(Vec<f64>, Vec<f64>), QsimError> {
    spec.check_params(params)?;
    if upstream.len() != spec.output_dim() {
        return Err(QsimError::LengthMismatch {
            expected: spec.output_dim(),
            actual: upstream.len(),
        });
    }

    // Full gate list: angle-embedding rotations (input params) followed by
    // the ansatz. Angle embedding starts from |0...0> with its rotations in
    // the gate list; amplitude embedding fixes the initial state directly
    // and contributes no gates — its input gradient falls out of the fully
    // back-propagated dual state.
    let mut gates: Vec<Gate> = Vec::new();
    let initial = match spec.embedding {
        Embedding::Amplitude => embed(x, spec)?,
        Embedding::Angle => {
            embed(x, spec)?; // input validation only
            gates.extend(Circuit::embedding_gates(x));
            StateVector::zero_state(spec.n_qubits)
        }
    };
    gates.extend(Circuit::ansatz(spec, params).gates);

    let mut ket = initial.clone();
    for gate in &gates {
        gate.apply(&mut ket);
    }

    // lambda = D |psi_f>
    let diag = observable_diagonal(spec, upstream);
    let mut lambda_amps: Vec<Complex64> = ket
        .amplitudes()
        .iter()
        .zip(&diag)
        .map(|(a, d)| a * d)
        .collect();
    let mut lambda = StateVector::from_raw(spec.n_qubits, std::mem::take(&mut lambda_amps));

    let mut grad_params = vec![0.0; spec.param_count()];
    let mut grad_x = vec![0.0; x.len()];

    for gate in gates.iter().rev() {
        if let Gate::Rot {
            pauli,
            qubit,
            param: Some(param),
            ..
        } = *gate
        {
            let mut gen = ket.clone();
            gen.apply_generator(pauli, qubit);
            let g = 2.0 * lambda.inner(&gen).re;
            match param {
                ParamRef::Ansatz(i) => grad_params[i] += g,
                ParamRef::Input(i) => grad_x[i] += g,
            }
        }
        gate.apply_inverse(&mut ket);
        gate.apply_inverse(&mut lambda);
    }

    if spec.embedding == Embedding::Amplitude {
        // ket is back to |psi_0> = x / ||x||, lambda = U^dag D U |psi_0|>.
        // d s / d psi0_j = 2 Re(lambda_j); chain through the normalization
        // psi0 = x / ||x||.
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let g: Vec<f64> = lambda.amplitudes().iter().map(|a| 2.0 * a.re).collect();
        let dot = x.iter().zip(&g).map(|(xi, gi)| xi * gi).sum::<f64>();
        for (i, gx) in grad_x.iter_mut().enumerate() {
            *gx = (g[i] - dot * x[i] / (norm * norm)) / norm;
        }
    }

    Ok((grad_params, grad_x))
}

fn observable_diagonal(spec: &QuantumLayerSpec, upstream: &[f64]) -> Vec<f64> {
    let dim = 1usize << spec.n_qubits;
    match spec.measurement {
        MeasurementKind::Probs => upstream.to_vec(),
        MeasurementKind::Expval => (0..dim)
            .map(|j| {
                upstream
                    .iter()
                    .enumerate()
                    .map(|(q, w)| if j >> q & 1 == 0 { *w } else { -*w })
                    .sum()
            })
            .collect(),
    }
}

impl StateVector {
    fn from_raw(n_qubits: usize, amps: Vec<Complex64>) -> Self {
        debug_assert_eq!(amps.len(), 1 << n_qubits);
        // Dual states are not normalized; bypass the unit-norm check.
        let mut s = StateVector::zero_state(n_qubits);
        s.set_amplitudes(amps);
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::{qlayer_forward, Entanglement};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn numeric_grad(
        f: &dyn Fn(&[f64]) -> f64,
        at: &[f64],
        h: f64,
    ) -> Vec<f64> {
        let mut g = Vec::with_capacity(at.len());
        for i in 0..at.len() {
            let mut plus = at.to_vec();
            let mut minus = at.to_vec();
            plus[i] += h;
            minus[i] -= h;
            g.push((f(&plus) - f(&minus)) / (2.0 * h));
        }
        g
    }

    fn close(analytic: &[f64], numeric: &[f64]) {
        for (a, n) in analytic.iter().zip(numeric) {
            let tol = (1e-4 * n.abs()).max(1e-7);
            assert!((a - n).abs() < tol, "analytic {a} vs numeric {n}");
        }
    }

    #[test]
    fn zero_upstream_gives_zero_gradients() {
        let spec = QuantumLayerSpec::new(
            2,
            1,
            Embedding::Angle,
            MeasurementKind::Expval,
            Entanglement::AllPairs,
        );
        let params = vec![0.3; spec.param_count()];
        let (gp, gx) = qlayer_gradients(&[0.1, 0.2], &params, &spec, &[0.0, 0.0]).unwrap();
        assert!(gp.iter().all(|v| *v == 0.0));
        assert!(gx.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn closed_form_single_qubit() {
        // Angle embed [0], params (0, theta, 0), expval readout:
        // output = cos(theta), d/dtheta = -sin(theta).
        let spec = QuantumLayerSpec::new(
            1,
            1,
            Embedding::Angle,
            MeasurementKind::Expval,
            Entanglement::AllPairs,
        );
        let theta = std::f64::consts::FRAC_PI_2;
        let params = vec![0.0, theta, 0.0];
        let out = qlayer_forward(&[0.0], &params, &spec, None).unwrap();
        assert!((out[0] - theta.cos()).abs() < 1e-12);
        let (gp, _) = qlayer_gradients(&[0.0], &params, &spec, &[1.0]).unwrap();
        assert!((gp[1] - (-theta.sin())).abs() < 1e-9);
        assert!((gp[1] + 1.0).abs() < 1e-9);
    }

    #[test]
    fn matches_finite_differences_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for case in 0..24 {
            let n = 1 + case % 3;
            let layers = 1 + case % 2;
            let embedding = if case % 2 == 0 {
                Embedding::Amplitude
            } else {
                Embedding::Angle
            };
            let measurement = if case % 4 < 2 {
                MeasurementKind::Expval
            } else {
                MeasurementKind::Probs
            };
            let topology = if case % 3 == 0 {
                Entanglement::Ring
            } else {
                Entanglement::AllPairs
            };
            let spec = QuantumLayerSpec::new(n, layers, embedding, measurement, topology);
            let params: Vec<f64> = (0..spec.param_count())
                .map(|_| rng.gen_range(-1.5..1.5))
                .collect();
            let x: Vec<f64> = (0..spec.input_dim())
                .map(|_| rng.gen_range(-1.0..1.0) + 0.1)
                .collect();
            let upstream: Vec<f64> = (0..spec.output_dim())
                .map(|_| rng.gen_range(-1.0..1.0))
                .collect();

            let (gp, gx) = qlayer_gradients(&x, &params, &spec, &upstream).unwrap();

            let scalar_of_params = |p: &[f64]| {
                qlayer_forward(&x, p, &spec, None)
                    .unwrap()
                    .iter()
                    .zip(&upstream)
                    .map(|(o, w)| o * w)
                    .sum::<f64>()
            };
            close(&gp, &numeric_grad(&scalar_of_params, &params, 1e-5));

            let scalar_of_x = |xv: &[f64]| {
                qlayer_forward(xv, &params, &spec, None)
                    .unwrap()
                    .iter()
                    .zip(&upstream)
                    .map(|(o, w)| o * w)
                    .sum::<f64>()
            };
            close(&gx, &numeric_grad(&scalar_of_x, &x, 1e-5));
        }
    }

    #[test]
    fn rejects_upstream_shape_mismatch() {
        let spec = QuantumLayerSpec::new(
            2,
            1,
            Embedding::Angle,
            MeasurementKind::Probs,
            Entanglement::AllPairs,
        );
        let err = qlayer_gradients(&[0.1, 0.2], &vec![0.0; 6], &spec, &[1.0]);
        assert!(matches!(err, Err(QsimError::LengthMismatch { .. })));
    }
}
