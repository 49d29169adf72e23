//! Sequential stacks of dense and quantum stages over a flat parameter
//! vector.

use ndarray::{Array1, Array2, ArrayView2};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::ops::Range;

use super::layer::{Activation, DenseLayer};
use super::NnError;
use crate::qsim::{self, NoiseSession, QuantumLayerSpec};

#[derive(Debug, Clone)]
pub enum StageSpec {
    Dense {
        in_dim: usize,
        out_dim: usize,
        activation: Activation,
    },
    Quantum(QuantumLayerSpec),
}

impl StageSpec {
    pub fn in_dim(&self) -> usize {
        match self {
            StageSpec::Dense { in_dim, .. } => *in_dim,
            StageSpec::Quantum(spec) => spec.input_dim(),
        }
    }

    pub fn out_dim(&self) -> usize {
        match self {
            StageSpec::Dense { out_dim, .. } => *out_dim,
            StageSpec::Quantum(spec) => spec.output_dim(),
        }
    }

    pub fn param_count(&self) -> usize {
        match self {
            StageSpec::Dense { in_dim, out_dim, .. } => DenseLayer::param_count(*in_dim, *out_dim),
            StageSpec::Quantum(spec) => spec.param_count(),
        }
    }
}

/// A sequential stack. Each stage owns a contiguous slice of the flat
/// parameter vector; ranges are assigned in stage order.
#[derive(Debug, Clone)]
pub struct Stack {
    stages: Vec<StageSpec>,
    ranges: Vec<Range<usize>>,
    param_count: usize,
}

/// Per-stage forward caches needed by the backward pass.
pub struct StackTrace {
    inputs: Vec<Array2<f64>>,
    pres: Vec<Option<Array2<f64>>>,
    pub output: Array2<f64>,
}

impl Stack {
    pub fn new(stages: Vec<StageSpec>) -> Self {
        for pair in stages.windows(2) {
            assert_eq!(
                pair[0].out_dim(),
                pair[1].in_dim(),
                "stage dimensions must chain"
            );
        }
        let mut ranges = Vec::with_capacity(stages.len());
        let mut offset = 0;
        for stage in &stages {
            let n = stage.param_count();
            ranges.push(offset..offset + n);
            offset += n;
        }
        Self {
            stages,
            ranges,
            param_count: offset,
        }
    }

    pub fn stages(&self) -> &[StageSpec] {
        &self.stages
    }

    pub fn param_count(&self) -> usize {
        self.param_count
    }

    pub fn in_dim(&self) -> usize {
        self.stages.first().map(|s| s.in_dim()).unwrap_or(0)
    }

    pub fn out_dim(&self) -> usize {
        self.stages.last().map(|s| s.out_dim()).unwrap_or(0)
    }

    /// Seeded initialization: dense weights uniform with fan-in scaling and
    /// zero biases, quantum angles uniform in [-pi, pi].
    pub fn init_params(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let mut params = vec![0.0; self.param_count];
        for (stage, range) in self.stages.iter().zip(&self.ranges) {
            let slot = &mut params[range.clone()];
            match stage {
                StageSpec::Dense { in_dim, out_dim, .. } => {
                    let bound = 1.0 / (*in_dim as f64).sqrt();
                    for w in slot.iter_mut().take(out_dim * in_dim) {
                        *w = rng.gen_range(-bound..bound);
                    }
                    // biases stay zero
                }
                StageSpec::Quantum(_) => {
                    for p in slot.iter_mut() {
                        *p = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
                    }
                }
            }
        }
        params
    }

    /// Batch forward pass. `noise` perturbs quantum stages only and is for
    /// evaluation-time studies; training always runs noiseless.
    pub fn forward(
        &self,
        params: &[f64],
        x: ArrayView2<f64>,
        mut noise: Option<&mut NoiseSession>,
    ) -> Result<StackTrace, NnError> {
        self.check_params(params)?;
        if x.ncols() != self.in_dim() {
            return Err(NnError::ShapeMismatch {
                expected: format!("{} input features", self.in_dim()),
                actual: format!("{}", x.ncols()),
            });
        }
        let mut inputs = Vec::with_capacity(self.stages.len());
        let mut pres = Vec::with_capacity(self.stages.len());
        let mut current = x.to_owned();
        for (stage, range) in self.stages.iter().zip(&self.ranges) {
            let stage_params = &params[range.clone()];
            let next = match stage {
                StageSpec::Dense {
                    in_dim,
                    out_dim,
                    activation,
                } => {
                    let layer =
                        DenseLayer::from_slice(stage_params, *in_dim, *out_dim, *activation);
                    let (out, pre) = layer.forward(current.view());
                    pres.push(Some(pre));
                    out
                }
                StageSpec::Quantum(spec) => {
                    let mut out = Array2::zeros((current.nrows(), spec.output_dim()));
                    for (row, mut out_row) in
                        current.outer_iter().zip(out.outer_iter_mut())
                    {
                        let y = qsim::qlayer_forward(
                            row.as_slice().unwrap(),
                            stage_params,
                            spec,
                            noise.as_deref_mut(),
                        )?;
                        out_row.assign(&Array1::from(y));
                    }
                    pres.push(None);
                    out
                }
            };
            inputs.push(current);
            current = next;
        }
        Ok(StackTrace {
            inputs,
            pres,
            output: current,
        })
    }

    /// Batch backward pass. `upstream` is dL/d(output); stage gradients are
    /// accumulated into `grad[..]` at this stack's offsets, and dL/d(input)
    /// is returned.
    pub fn backward(
        &self,
        params: &[f64],
        trace: &StackTrace,
        upstream: Array2<f64>,
        grad: &mut [f64],
    ) -> Result<Array2<f64>, NnError> {
        self.check_params(params)?;
        debug_assert_eq!(grad.len(), params.len());
        let mut upstream = upstream;
        for idx in (0..self.stages.len()).rev() {
            let range = self.ranges[idx].clone();
            let stage_params = &params[range.clone()];
            let input = &trace.inputs[idx];
            upstream = match &self.stages[idx] {
                StageSpec::Dense {
                    in_dim,
                    out_dim,
                    activation,
                } => {
                    let layer =
                        DenseLayer::from_slice(stage_params, *in_dim, *out_dim, *activation);
                    let pre = trace.pres[idx].as_ref().expect("dense stage cache");
                    let (gw, gb, gx) = layer.backward(input.view(), pre, upstream.view());
                    let slot = &mut grad[range];
                    let (ws, bs) = slot.split_at_mut(out_dim * in_dim);
                    for (dst, src) in ws.iter_mut().zip(gw.iter()) {
                        *dst += src;
                    }
                    for (dst, src) in bs.iter_mut().zip(gb.iter()) {
                        *dst += src;
                    }
                    gx
                }
                StageSpec::Quantum(spec) => {
                    let mut gx = Array2::zeros((input.nrows(), spec.input_dim()));
                    for ((row, up_row), mut gx_row) in input
                        .outer_iter()
                        .zip(upstream.outer_iter())
                        .zip(gx.outer_iter_mut())
                    {
                        let (gp, gxr) = qsim::qlayer_gradients(
                            row.as_slice().unwrap(),
                            stage_params,
                            spec,
                            up_row.as_slice().unwrap(),
                        )?;
                        for (dst, src) in grad[range.clone()].iter_mut().zip(&gp) {
                            *dst += src;
                        }
                        gx_row.assign(&Array1::from(gxr));
                    }
                    gx
                }
            };
        }
        Ok(upstream)
    }

    fn check_params(&self, params: &[f64]) -> Result<(), NnError> {
        if params.len() != self.param_count {
            return Err(NnError::ShapeMismatch {
                expected: format!("{} params", self.param_count),
                actual: format!("{}", params.len()),
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::{Embedding, Entanglement, MeasurementKind};
    use ndarray::array;
    use rand::SeedableRng;

    fn fd_check(stack: &Stack, x: &Array2<f64>, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = stack.init_params(&mut rng);
        // scalar = sum of outputs
        let scalar = |p: &[f64]| -> f64 {
            stack.forward(p, x.view(), None).unwrap().output.sum()
        };
        let trace = stack.forward(&params, x.view(), None).unwrap();
        let upstream = Array2::ones(trace.output.dim());
        let mut grad = vec![0.0; params.len()];
        stack.backward(&params, &trace, upstream, &mut grad).unwrap();

        let h = 1e-5;
        for i in 0..params.len() {
            let mut plus = params.clone();
            let mut minus = params.clone();
            plus[i] += h;
            minus[i] -= h;
            let numeric = (scalar(&plus) - scalar(&minus)) / (2.0 * h);
            let tol = (1e-4 * numeric.abs()).max(1e-6);
            assert!(
                (grad[i] - numeric).abs() < tol,
                "param {i}: analytic {} vs numeric {numeric}",
                grad[i]
            );
        }
    }

    #[test]
    fn dense_stack_matches_finite_differences() {
        let stack = Stack::new(vec![
            StageSpec::Dense {
                in_dim: 5,
                out_dim: 4,
                activation: Activation::Tanh,
            },
            StageSpec::Dense {
                in_dim: 4,
                out_dim: 3,
                activation: Activation::Sigmoid,
            },
            StageSpec::Dense {
                in_dim: 3,
                out_dim: 5,
                activation: Activation::Identity,
            },
        ]);
        let x = array![
            [0.3, -0.5, 1.2, 0.0, -0.1],
            [1.1, 0.4, -0.2, 0.7, 0.9],
            [-0.6, 0.0, 0.0, 0.2, -1.3],
        ];
        fd_check(&stack, &x, 17);
    }

    #[test]
    fn hybrid_stack_matches_finite_differences() {
        // dense -> qlayer -> dense, both embeddings
        for (embedding, measurement) in [
            (Embedding::Amplitude, MeasurementKind::Expval),
            (Embedding::Angle, MeasurementKind::Probs),
        ] {
            let qspec = QuantumLayerSpec::new(2, 2, embedding, measurement, Entanglement::AllPairs);
            let stack = Stack::new(vec![
                StageSpec::Dense {
                    in_dim: 5,
                    out_dim: qspec.input_dim(),
                    activation: Activation::Tanh,
                },
                StageSpec::Quantum(qspec.clone()),
                StageSpec::Dense {
                    in_dim: qspec.output_dim(),
                    out_dim: 3,
                    activation: Activation::Identity,
                },
            ]);
            let x = array![[0.4, -0.8, 0.3, 1.0, -0.2], [0.1, 0.6, -0.5, -0.9, 0.8]];
            fd_check(&stack, &x, 23);
        }
    }

    #[test]
    fn init_is_deterministic() {
        let stack = Stack::new(vec![StageSpec::Dense {
            in_dim: 3,
            out_dim: 2,
            activation: Activation::Relu,
        }]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = stack.init_params(&mut rng);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let b = stack.init_params(&mut rng);
        assert_eq!(a, b);
        assert_eq!(a.len(), stack.param_count());
        // biases zero
        assert_eq!(a[6], 0.0);
        assert_eq!(a[7], 0.0);
    }

    #[test]
    fn rejects_wrong_param_count() {
        let stack = Stack::new(vec![StageSpec::Dense {
            in_dim: 3,
            out_dim: 2,
            activation: Activation::Relu,
        }]);
        let x = array![[0.0, 0.0, 0.0]];
        assert!(stack.forward(&[0.0; 3], x.view(), None).is_err());
    }
}
