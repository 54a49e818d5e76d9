use rand::Rng;

use super::{expect_rank, glorot_uniform};
use crate::error::{MlError, Result};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// Fully connected layer, `y = x W^T + b` with `W: [out, in]`.
#[derive(Clone, Debug)]
pub struct Dense<T> {
    pub in_features: usize,
    pub out_features: usize,
    pub weight: Vec<T>,
    pub bias: Vec<T>,
    pub grad_weight: Vec<T>,
    pub grad_bias: Vec<T>,
    pub(crate) input: Option<Tensor<T>>,
}

impl<T: Scalar> Dense<T> {
    pub fn new(in_features: usize, out_features: usize, rng: &mut impl Rng) -> Self {
        let weight = glorot_uniform(in_features * out_features, in_features, out_features, rng);
        Self::from_parts(in_features, out_features, weight, vec![T::ZERO; out_features])
    }

    pub fn from_parts(in_features: usize, out_features: usize, weight: Vec<T>, bias: Vec<T>) -> Self {
        assert_eq!(weight.len(), in_features * out_features);
        assert_eq!(bias.len(), out_features);
        Dense {
            in_features,
            out_features,
            grad_weight: vec![T::ZERO; weight.len()],
            grad_bias: vec![T::ZERO; out_features],
            weight,
            bias,
            input: None,
        }
    }

    pub fn forward(&mut self, x: &Tensor<T>) -> Result<Tensor<T>> {
        expect_rank(x, 2, "dense")?;
        let (b, f) = (x.shape()[0], x.shape()[1]);
        if f != self.in_features {
            return Err(MlError::Shape(format!("dense expects {} features, got {f}", self.in_features)));
        }
        let o = self.out_features;
        let mut out = Vec::with_capacity(b * o);
        for _ in 0..b {
            out.extend_from_slice(&self.bias);
        }
        T::gemm(b, f, o, T::ONE, x.data(), f as isize, 1, &self.weight, 1, f as isize, T::ONE, &mut out, o as isize, 1);
        self.input = Some(x.clone());
        Tensor::from_vec(&[b, o], out)
    }

    pub fn backward(&mut self, grad: &Tensor<T>) -> Result<Tensor<T>> {
        let x = self.input.as_ref().ok_or_else(|| MlError::Shape("dense backward before forward".into()))?;
        let (b, f, o) = (x.shape()[0], self.in_features, self.out_features);
        if grad.shape() != [b, o] {
            return Err(MlError::Shape(format!("dense backward got {:?}", grad.shape())));
        }
        let dy = grad.data();
        // dW = dy^T x
        T::gemm(o, b, f, T::ONE, dy, 1, o as isize, x.data(), f as isize, 1, T::ZERO, &mut self.grad_weight, f as isize, 1);
        for (j, g) in self.grad_bias.iter_mut().enumerate() {
            *g = (0..b).map(|n| dy[n * o + j]).sum();
        }
        let mut dx = vec![T::ZERO; b * f];
        T::gemm(b, o, f, T::ONE, dy, o as isize, 1, &self.weight, f as isize, 1, T::ZERO, &mut dx, f as isize, 1);
        Tensor::from_vec(&[b, f], dx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forward_matches_hand_computation() {
        let mut d = Dense::from_parts(3, 2, vec![1.0, 2.0, 3.0, -1.0, 0.0, 1.0], vec![0.5, -0.5]);
        let x = Tensor::from_vec(&[2, 3], vec![1.0, 1.0, 1.0, 2.0, 0.0, -1.0]).unwrap();
        let y = d.forward(&x).unwrap();
        assert_eq!(y.data(), &[6.5, -0.5, -0.5, -3.5]);
    }
}
