use ndarray::{Array1, Array2, ArrayView2};
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Identity,
    Sigmoid,
    Softplus,
}

pub fn sigmoid(v: f64) -> f64 {
    if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        let e = v.exp();
        e / (1.0 + e)
    }
}

pub fn softplus(v: f64) -> f64 {
    v.max(0.0) + (-v.abs()).exp().ln_1p()
}

impl Activation {
    pub fn apply(self, pre: &Array2<f64>) -> Array2<f64> {
        match self {
            Activation::Identity => pre.clone(),
            Activation::Sigmoid => pre.mapv(sigmoid),
            Activation::Softplus => pre.mapv(softplus),
        }
    }

    /// Multiplies `delta` (gradient w.r.t. the output) by the activation
    /// derivative, giving the gradient w.r.t. the pre-activation.
    pub fn backprop(self, delta: &mut Array2<f64>, pre: &Array2<f64>, post: &Array2<f64>) {
        match self {
            Activation::Identity => {}
            Activation::Sigmoid => delta.zip_mut_with(post, |d, &s| *d *= s * (1.0 - s)),
            Activation::Softplus => delta.zip_mut_with(pre, |d, &p| *d *= sigmoid(p)),
        }
    }
}

/// Fully connected layer `activation(x · weightsᵀ + bias)`; `weights` is `out x in`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
    pub activation: Activation,
}

impl DenseLayer {
    /// Glorot-uniform weights in `±sqrt(6 / (fan_in + fan_out))`, zero bias.
    pub fn glorot<R: Rng + ?Sized>(
        fan_in: usize,
        fan_out: usize,
        activation: Activation,
        rng: &mut R,
    ) -> Self {
        let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
        let weights =
            Array2::from_shape_simple_fn((fan_out, fan_in), || rng.random_range(-limit..=limit));
        Self {
            weights,
            bias: Array1::zeros(fan_out),
            activation,
        }
    }

    pub fn inputs(&self) -> usize {
        self.weights.ncols()
    }

    pub fn outputs(&self) -> usize {
        self.weights.nrows()
    }

    pub fn pre_activation(&self, input: ArrayView2<f64>) -> Array2<f64> {
        input.dot(&self.weights.t()) + &self.bias
    }

    pub fn forward(&self, input: ArrayView2<f64>) -> Array2<f64> {
        self.activation.apply(&self.pre_activation(input))
    }
}
