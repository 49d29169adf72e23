//! Shared test oracles, independent of the simulator's implementation
//! path: dense Kronecker-product circuit construction and plain matrix
//! arithmetic only.

use num_complex::Complex64;
use qnad_core::qsim::{Embedding, Entanglement, MeasurementKind, QuantumLayerSpec};

type Matrix = Vec<Vec<Complex64>>;

fn mat_mul_vec(m: &Matrix, v: &[Complex64]) -> Vec<Complex64> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    let (ra, ca) = (a.len(), a[0].len());
    let (rb, cb) = (b.len(), b[0].len());
    let mut out = vec![vec![Complex64::new(0.0, 0.0); ca * cb]; ra * rb];
    for i in 0..ra {
        for j in 0..ca {
            for k in 0..rb {
                for l in 0..cb {
                    out[i * rb + k][j * cb + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

fn identity(dim: usize) -> Matrix {
    let mut m = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = Complex64::new(1.0, 0.0);
    }
    m
}

fn ry(theta: f64) -> Matrix {
    let (s, c) = (theta / 2.0).sin_cos();
    vec![
        vec![Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
        vec![Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
    ]
}

fn rz(theta: f64) -> Matrix {
    let (s, c) = (theta / 2.0).sin_cos();
    vec![
        vec![Complex64::new(c, -s), Complex64::new(0.0, 0.0)],
        vec![Complex64::new(0.0, 0.0), Complex64::new(c, s)],
    ]
}

/// Embed a single-qubit gate at `qubit` in an `n`-qubit register
/// (little-endian: qubit 0 is the least significant bit).
fn single_qubit_gate(gate: &Matrix, qubit: usize, n: usize) -> Matrix {
    let low = identity(1 << qubit);
    let high = identity(1 << (n - 1 - qubit));
    kron(&high, &kron(gate, &low))
}

fn cz_gate(a: usize, b: usize, n: usize) -> Matrix {
    let dim = 1 << n;
    let mut m = identity(dim);
    let mask = (1usize << a) | (1usize << b);
    for (i, row) in m.iter_mut().enumerate() {
        if i & mask == mask {
            row[i] = Complex64::new(-1.0, 0.0);
        }
    }
    m
}

fn entangling_pairs(n: usize, topology: Entanglement) -> Vec<(usize, usize)> {
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

/// Final amplitudes of the full circuit (embedding then ansatz), computed
/// by multiplying dense gate matrices into the state.
pub fn oracle_amplitudes(spec: &QuantumLayerSpec, params: &[f64], x: &[f64]) -> Vec<Complex64> {
    let n = spec.n_qubits;
    let dim = 1usize << n;

    let mut psi: Vec<Complex64> = match spec.embedding {
        Embedding::Amplitude => {
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            x.iter().map(|v| Complex64::new(v / norm, 0.0)).collect()
        }
        Embedding::Angle => {
            let mut psi = vec![Complex64::new(0.0, 0.0); dim];
            psi[0] = Complex64::new(1.0, 0.0);
            for (q, &angle) in x.iter().enumerate() {
                psi = mat_mul_vec(&single_qubit_gate(&ry(angle), q, n), &psi);
            }
            psi
        }
    };

    for layer in 0..spec.n_layers {
        for q in 0..n {
            let base = (layer * n + q) * 3;
            let (phi, theta, omega) = (params[base], params[base + 1], params[base + 2]);
            // Rot(phi, theta, omega) = RZ(phi) . RY(theta) . RZ(omega)
            psi = mat_mul_vec(&single_qubit_gate(&rz(omega), q, n), &psi);
            psi = mat_mul_vec(&single_qubit_gate(&ry(theta), q, n), &psi);
            psi = mat_mul_vec(&single_qubit_gate(&rz(phi), q, n), &psi);
        }
        for (a, b) in entangling_pairs(n, spec.entanglement) {
            psi = mat_mul_vec(&cz_gate(a, b, n), &psi);
        }
    }
    psi
}

/// Measured output of the oracle circuit.
pub fn oracle_output(spec: &QuantumLayerSpec, params: &[f64], x: &[f64]) -> Vec<f64> {
    let psi = oracle_amplitudes(spec, params, x);
    match spec.measurement {
        MeasurementKind::Probs => psi.iter().map(|a| a.norm_sqr()).collect(),
        MeasurementKind::Expval => (0..spec.n_qubits)
            .map(|q| {
                psi.iter()
                    .enumerate()
                    .map(|(j, a)| {
                        let sign = if j >> q & 1 == 0 { 1.0 } else { -1.0 };
                        sign * a.norm_sqr()
                    })
                    .sum()
            })
            .collect(),
    }
}
