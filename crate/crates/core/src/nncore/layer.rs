//! Dense layers and activations.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Tanh,
    Sigmoid,
    Identity,
}

impl Activation {
    #[inline]
    pub fn apply(self, v: f64) -> f64 {
        match self {
            Activation::Relu => v.max(0.0),
            Activation::Tanh => v.tanh(),
            Activation::Sigmoid => 1.0 / (1.0 + (-v).exp()),
            Activation::Identity => v,
        }
    }

    /// Derivative as a function of the pre-activation value.
    #[inline]
    pub fn derivative(self, pre: f64) -> f64 {
        match self {
            Activation::Relu => {
                if pre > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => {
                let t = pre.tanh();
                1.0 - t * t
            }
            Activation::Sigmoid => {
                let s = 1.0 / (1.0 + (-pre).exp());
                s * (1.0 - s)
            }
            Activation::Identity => 1.0,
        }
    }
}

/// A dense layer materialized from a slice of the flat parameter vector:
/// `out = act(W x + b)` with `W` row-major `(out, in)` followed by `b`.
#[derive(Debug, Clone)]
pub struct DenseLayer<'a> {
    pub weights: ArrayView2<'a, f64>,
    pub bias: ArrayView1<'a, f64>,
    pub activation: Activation,
}

impl<'a> DenseLayer<'a> {
    /// Number of parameters for a layer of the given shape.
    pub fn param_count(in_dim: usize, out_dim: usize) -> usize {
        out_dim * in_dim + out_dim
    }

    pub fn from_slice(
        params: &'a [f64],
        in_dim: usize,
        out_dim: usize,
        activation: Activation,
    ) -> Self {
        let (w, b) = params.split_at(out_dim * in_dim);
        Self {
            weights: ArrayView2::from_shape((out_dim, in_dim), w).expect("weight shape"),
            bias: ArrayView1::from_shape(out_dim, b).expect("bias shape"),
            activation,
        }
    }

    /// Batch forward pass; returns activated outputs and pre-activations.
    pub fn forward(&self, x: ArrayView2<f64>) -> (Array2<f64>, Array2<f64>) {
        let mut pre = x.dot(&self.weights.t());
        pre += &self.bias;
        let out = pre.mapv(|v| self.activation.apply(v));
        (out, pre)
    }

    /// Batch backward pass. `upstream` is dL/d(out); returns
    /// (dL/dW, dL/db, dL/dx).
    pub fn backward(
        &self,
        x: ArrayView2<f64>,
        pre: &Array2<f64>,
        upstream: ArrayView2<f64>,
    ) -> (Array2<f64>, Array1<f64>, Array2<f64>) {
        let delta = upstream.to_owned() * pre.mapv(|v| self.activation.derivative(v));
        let grad_w = delta.t().dot(&x);
        let grad_b = delta.sum_axis(ndarray::Axis(0));
        let grad_x = delta.dot(&self.weights);
        (grad_w, grad_b, grad_x)
    }
}
