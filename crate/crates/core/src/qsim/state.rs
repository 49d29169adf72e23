//! Statevector storage, data embeddings, gates, and measurements.

use num_complex::Complex64;

use super::QsimError;

/// An `N`-qubit pure state: `2^N` complex amplitudes in little-endian basis
/// ordering (qubit 0 is the least significant bit of the basis index).
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// The all-zeros basis state `|0...0>`.
    pub fn zero_state(n_qubits: usize) -> Self {
        assert!(n_qubits >= 1);
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Self { n_qubits, amps }
    }

    /// Build directly from amplitudes; the length must be a power of two and
    /// the norm must already be 1 within 1e-9.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self, QsimError> {
        let n = amps.len();
        if n < 2 || !n.is_power_of_two() {
            return Err(QsimError::LengthMismatch {
                expected: n.next_power_of_two().max(2),
                actual: n,
            });
        }
        let norm2: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if !norm2.is_finite() {
            return Err(QsimError::NonFinite);
        }
        if (norm2.sqrt() - 1.0).abs() > 1e-9 {
            return Err(QsimError::ZeroNorm);
        }
        Ok(Self {
            n_qubits: n.trailing_zeros() as usize,
            amps,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// RY rotation on one qubit.
    pub fn apply_ry(&mut self, qubit: usize, theta: f64) {
        let (s, c) = (theta / 2.0).sin_cos();
        self.for_pairs(qubit, |a0, a1| (c * a0 - s * a1, s * a0 + c * a1));
    }

    /// RZ rotation on one qubit.
    pub fn apply_rz(&mut self, qubit: usize, theta: f64) {
        let (s, c) = (theta / 2.0).sin_cos();
        let e_neg = Complex64::new(c, -s);
        let e_pos = Complex64::new(c, s);
        self.for_pairs(qubit, |a0, a1| (e_neg * a0, e_pos * a1));
    }

    /// RX rotation on one qubit.
    pub fn apply_rx(&mut self, qubit: usize, theta: f64) {
        let (s, c) = (theta / 2.0).sin_cos();
        let mis = Complex64::new(0.0, -s);
        self.for_pairs(qubit, |a0, a1| (c * a0 + mis * a1, mis * a0 + c * a1));
    }

    /// Controlled-Z on a pair of qubits (symmetric in its arguments).
    pub fn apply_cz(&mut self, a: usize, b: usize) {
        debug_assert_ne!(a, b);
        let mask = (1usize << a) | (1usize << b);
        for (idx, amp) in self.amps.iter_mut().enumerate() {
            if idx & mask == mask {
                *amp = -*amp;
            }
        }
    }

    /// Apply the generator `-i P_q / 2` of a rotation gate; used by the
    /// adjoint differentiation pass.
    pub(crate) fn apply_generator(&mut self, pauli: Pauli, qubit: usize) {
        match pauli {
            // -i/2 * Y = [[0, -1/2], [1/2, 0]]
            Pauli::Y => self.for_pairs(qubit, |a0, a1| (-0.5 * a1, 0.5 * a0)),
            // -i/2 * Z = diag(-i/2, i/2)
            Pauli::Z => {
                let mi = Complex64::new(0.0, -0.5);
                let pi = Complex64::new(0.0, 0.5);
                self.for_pairs(qubit, |a0, a1| (mi * a0, pi * a1));
            }
        }
    }

    /// Replace the amplitude buffer; used for unnormalized dual states in
    /// the adjoint pass.
    pub(crate) fn set_amplitudes(&mut self, amps: Vec<Complex64>) {
        debug_assert_eq!(amps.len(), self.amps.len());
        self.amps = amps;
    }

    /// `<self | other>`.
    pub(crate) fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    #[inline]
    fn for_pairs(&mut self, qubit: usize, f: impl Fn(Complex64, Complex64) -> (Complex64, Complex64)) {
        debug_assert!(qubit < self.n_qubits);
        let mask = 1usize << qubit;
        for i0 in 0..self.amps.len() {
            if i0 & mask == 0 {
                let i1 = i0 | mask;
                let (a0, a1) = (self.amps[i0], self.amps[i1]);
                let (b0, b1) = f(a0, a1);
                self.amps[i0] = b0;
                self.amps[i1] = b1;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Pauli {
    Y,
    Z,
}

/// Encode a real vector of length `2^N` as state amplitudes, normalizing to
/// unit norm: `|psi> = sum_i x_i |i> / ||x||`.
pub fn amplitude_embed(x: &[f64]) -> Result<StateVector, QsimError> {
    let n = x.len();
    if n < 2 || !n.is_power_of_two() {
        return Err(QsimError::LengthMismatch {
            expected: n.next_power_of_two().max(2),
            actual: n,
        });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(QsimError::NonFinite);
    }
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(QsimError::ZeroNorm);
    }
    let amps = x.iter().map(|v| Complex64::new(v / norm, 0.0)).collect();
    Ok(StateVector {
        n_qubits: n.trailing_zeros() as usize,
        amps,
    })
}

/// Encode a real vector of length `N` as one `RY(x_i)` rotation per qubit
/// from `|0...0>`, giving the product state
/// `prod_i (cos(x_i/2)|0> + sin(x_i/2)|1>)`.
pub fn angle_embed(x: &[f64]) -> Result<StateVector, QsimError> {
    if x.is_empty() {
        return Err(QsimError::LengthMismatch {
            expected: 1,
            actual: 0,
        });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(QsimError::NonFinite);
    }
    let mut state = StateVector::zero_state(x.len());
    for (q, &angle) in x.iter().enumerate() {
        state.apply_ry(q, angle);
    }
    Ok(state)
}

/// Per-qubit Pauli-Z expectation values:
/// `<Z_i> = sum_j |amp_j|^2 * (+1 if bit i of j is 0 else -1)`.
pub fn measure_expval_z(state: &StateVector) -> Vec<f64> {
    let n = state.n_qubits();
    let mut out = vec![0.0; n];
    for (idx, amp) in state.amplitudes().iter().enumerate() {
        let p = amp.norm_sqr();
        for (q, o) in out.iter_mut().enumerate() {
            if idx >> q & 1 == 0 {
                *o += p;
            } else {
                *o -= p;
            }
        }
    }
    out
}

/// Computational-basis probabilities `P(j) = |<j|psi>|^2`.
pub fn measure_probs(state: &StateVector) -> Vec<f64> {
    state.amplitudes().iter().map(|a| a.norm_sqr()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    #[test]
    fn amplitude_embed_basis_state() {
        let s = amplitude_embed(&[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(s.amplitudes()[0], Complex64::new(1.0, 0.0));
        assert_eq!(s.n_qubits(), 2);
    }

    #[test]
    fn amplitude_embed_normalizes() {
        let s = amplitude_embed(&[1.0, 1.0, 1.0, 1.0]).unwrap();
        for a in s.amplitudes() {
            assert!((a.re - 0.5).abs() < 1e-15);
        }
        let s = amplitude_embed(&[3.0, 4.0, 0.0, 0.0]).unwrap();
        assert!((s.amplitudes()[0].re - 0.6).abs() < 1e-15);
        assert!((s.amplitudes()[1].re - 0.8).abs() < 1e-15);
    }

    #[test]
    fn amplitude_embed_rejects_degenerate_input() {
        assert!(matches!(
            amplitude_embed(&[0.0, 0.0]),
            Err(QsimError::ZeroNorm)
        ));
        assert!(matches!(
            amplitude_embed(&[1.0, 2.0, 3.0]),
            Err(QsimError::LengthMismatch { .. })
        ));
        assert!(matches!(
            amplitude_embed(&[f64::NAN, 1.0]),
            Err(QsimError::NonFinite)
        ));
    }

    #[test]
    fn angle_embed_identity_and_flip() {
        let s = angle_embed(&[0.0, 0.0]).unwrap();
        assert!((s.amplitudes()[0].re - 1.0).abs() < 1e-12);

        let s = angle_embed(&[PI]).unwrap();
        assert!(s.amplitudes()[0].norm() < 1e-12);
        assert!((s.amplitudes()[1].re - 1.0).abs() < 1e-12);

        let s = angle_embed(&[PI / 2.0]).unwrap();
        assert!((s.amplitudes()[0].re - FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((s.amplitudes()[1].re - FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn angle_embed_rejects_bad_input() {
        assert!(angle_embed(&[]).is_err());
        assert!(matches!(
            angle_embed(&[f64::INFINITY]),
            Err(QsimError::NonFinite)
        ));
    }

    #[test]
    fn expval_z_basis_states() {
        let s = amplitude_embed(&[1.0, 0.0, 0.0, 0.0]).unwrap(); // |00>
        assert_eq!(measure_expval_z(&s), vec![1.0, 1.0]);
        let s = amplitude_embed(&[0.0, 0.0, 0.0, 1.0]).unwrap(); // |11>
        assert_eq!(measure_expval_z(&s), vec![-1.0, -1.0]);
        let s = angle_embed(&[PI / 2.0]).unwrap(); // (|0> + |1>) / sqrt(2)
        assert!(measure_expval_z(&s)[0].abs() < 1e-12);
    }

    #[test]
    fn probs_examples() {
        let s = amplitude_embed(&[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(measure_probs(&s), vec![1.0, 0.0, 0.0, 0.0]);
        let s = amplitude_embed(&[1.0, 1.0, 1.0, 1.0]).unwrap();
        for p in measure_probs(&s) {
            assert!((p - 0.25).abs() < 1e-15);
        }
        let s = amplitude_embed(&[0.6, 0.8]).unwrap();
        let p = measure_probs(&s);
        assert!((p[0] - 0.36).abs() < 1e-15);
        assert!((p[1] - 0.64).abs() < 1e-15);
    }

    #[test]
    fn gates_preserve_norm() {
        let mut s = amplitude_embed(&[0.3, -1.2, 0.4, 2.0, 0.1, 0.0, -0.7, 0.9]).unwrap();
        s.apply_ry(0, 0.37);
        s.apply_rz(1, -1.1);
        s.apply_rx(2, 2.4);
        s.apply_cz(0, 2);
        assert!((s.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cz_flips_phase_of_11_component() {
        let mut s = amplitude_embed(&[0.5, 0.5, 0.5, 0.5]).unwrap();
        s.apply_cz(0, 1);
        let a = s.amplitudes();
        assert!((a[3].re + 0.5).abs() < 1e-15);
        assert!((a[0].re - 0.5).abs() < 1e-15);
    }
}
