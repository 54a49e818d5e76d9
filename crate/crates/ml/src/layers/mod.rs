//! Layer-wise forward/backward passes for the CNN layer set.
//!
//! Activations are `[batch, channels, height, width]` (or `[batch, features]`
//! after flattening). `forward` caches whatever `backward` needs; `backward`
//! overwrites the parameter gradients and returns the input gradient.

mod activation;
mod batchnorm;
mod conv;
mod dense;
mod loss;
mod pool;

pub use activation::{Dropout, Flatten, Relu};
pub use batchnorm::BatchNorm;
pub use conv::Conv2d;
pub use dense::Dense;
pub use loss::{softmax, softmax_cross_entropy};
pub use pool::MaxPool2d;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::exec::Exec;
use crate::scalar::Scalar;
use crate::tensor::Tensor;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Train,
    Infer,
}

/// Per-call state threaded through a forward pass.
pub struct Pass<'a> {
    pub mode: Mode,
    pub rng: &'a mut ChaCha8Rng,
    pub exec: Exec,
}

/// A parameter tensor exposed for serialization.
pub struct TensorRef<'a, T> {
    pub name: &'static str,
    pub shape: Vec<usize>,
    pub data: &'a [T],
}

#[derive(Clone, Debug)]
pub enum Layer<T> {
    Conv(Conv2d<T>),
    BatchNorm(BatchNorm<T>),
    Relu(Relu),
    MaxPool(MaxPool2d),
    Dropout(Dropout),
    Flatten(Flatten),
    Dense(Dense<T>),
}

impl<T: Scalar> Layer<T> {
    pub fn forward(&mut self, x: &Tensor<T>, pass: &mut Pass<'_>) -> Result<Tensor<T>> {
        match self {
            Layer::Conv(l) => l.forward(x, pass.exec),
            Layer::BatchNorm(l) => l.forward(x, pass.mode),
            Layer::Relu(l) => Ok(l.forward(x)),
            Layer::MaxPool(l) => l.forward(x),
            Layer::Dropout(l) => Ok(l.forward(x, pass.mode, pass.rng)),
            Layer::Flatten(l) => l.forward(x),
            Layer::Dense(l) => l.forward(x),
        }
    }

    pub fn backward(&mut self, grad: &Tensor<T>, exec: Exec) -> Result<Tensor<T>> {
        match self {
            Layer::Conv(l) => l.backward(grad, exec),
            Layer::BatchNorm(l) => l.backward(grad),
            Layer::Relu(l) => l.backward(grad),
            Layer::MaxPool(l) => l.backward(grad),
            Layer::Dropout(l) => l.backward(grad),
            Layer::Flatten(l) => l.backward(grad),
            Layer::Dense(l) => l.backward(grad),
        }
    }

    /// Visits `(parameters, gradients)` pairs in a fixed order.
    pub fn visit_params(&mut self, f: &mut dyn FnMut(&mut [T], &[T])) {
        match self {
            Layer::Conv(l) => {
                f(&mut l.weight, &l.grad_weight);
                f(&mut l.bias, &l.grad_bias);
            }
            Layer::BatchNorm(l) => {
                f(&mut l.gamma, &l.grad_gamma);
                f(&mut l.beta, &l.grad_beta);
            }
            Layer::Dense(l) => {
                f(&mut l.weight, &l.grad_weight);
                f(&mut l.bias, &l.grad_bias);
            }
            _ => {}
        }
    }

    /// Number of trainable scalars.
    pub fn param_count(&self) -> usize {
        match self {
            Layer::Conv(l) => l.weight.len() + l.bias.len(),
            Layer::BatchNorm(l) => l.gamma.len() + l.beta.len(),
            Layer::Dense(l) => l.weight.len() + l.bias.len(),
            _ => 0,
        }
    }

    /// Every persisted tensor, including non-trainable running statistics.
    pub fn tensors(&self) -> Vec<TensorRef<'_, T>> {
        match self {
            Layer::Conv(l) => vec![
                TensorRef {
                    name: "weight",
                    shape: vec![l.out_channels, l.in_channels, l.kernel, l.kernel],
                    data: &l.weight,
                },
                TensorRef { name: "bias", shape: vec![l.out_channels], data: &l.bias },
            ],
            Layer::BatchNorm(l) => vec![
                TensorRef { name: "gamma", shape: vec![l.channels], data: &l.gamma },
                TensorRef { name: "beta", shape: vec![l.channels], data: &l.beta },
                TensorRef { name: "running_mean", shape: vec![l.channels], data: &l.running_mean },
                TensorRef { name: "running_var", shape: vec![l.channels], data: &l.running_var },
            ],
            Layer::Dense(l) => vec![
                TensorRef { name: "weight", shape: vec![l.out_features, l.in_features], data: &l.weight },
                TensorRef { name: "bias", shape: vec![l.out_features], data: &l.bias },
            ],
            _ => Vec::new(),
        }
    }

    /// Mutable counterparts of [`Layer::tensors`], same order.
    pub fn tensors_mut(&mut self) -> Vec<&mut Vec<T>> {
        match self {
            Layer::Conv(l) => vec![&mut l.weight, &mut l.bias],
            Layer::BatchNorm(l) => {
                vec![&mut l.gamma, &mut l.beta, &mut l.running_mean, &mut l.running_var]
            }
            Layer::Dense(l) => vec![&mut l.weight, &mut l.bias],
            _ => Vec::new(),
        }
    }

    /// Drops cached activations.
    pub fn clear_cache(&mut self) {
        match self {
            Layer::Conv(l) => l.cols.clear(),
            Layer::BatchNorm(l) => l.xhat.clear(),
            Layer::Relu(l) => l.mask.clear(),
            Layer::MaxPool(l) => l.argmax.clear(),
            Layer::Dropout(l) => l.mask.clear(),
            Layer::Dense(l) => l.input = None,
            Layer::Flatten(_) => {}
        }
    }
}

/// Glorot/Xavier uniform: `U(-a, a)` with `a = sqrt(6 / (fan_in + fan_out))`.
pub fn glorot_uniform<T: Scalar>(len: usize, fan_in: usize, fan_out: usize, rng: &mut impl Rng) -> Vec<T> {
    let a = (6.0 / (fan_in + fan_out) as f64).sqrt();
    (0..len).map(|_| T::from_f64(rng.random_range(-a..a))).collect()
}

pub(crate) fn expect_rank<T: Scalar>(x: &Tensor<T>, rank: usize, who: &str) -> Result<()> {
    if x.shape().len() != rank {
        return Err(crate::MlError::Shape(format!(
            "{who} expects rank {rank}, got shape {:?}",
            x.shape()
        )));
    }
    Ok(())
}

