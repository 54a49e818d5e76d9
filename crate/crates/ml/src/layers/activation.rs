use rand::Rng;

use super::Mode;
use crate::error::{MlError, Result};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

#[derive(Clone, Debug, Default)]
pub struct Relu {
    pub(crate) mask: Vec<bool>,
}

impl Relu {
    pub fn forward<T: Scalar>(&mut self, x: &Tensor<T>) -> Tensor<T> {
        self.mask = x.data().iter().map(|&v| v > T::ZERO).collect();
        x.map(|v| if v > T::ZERO { v } else { T::ZERO })
    }

    pub fn backward<T: Scalar>(&mut self, grad: &Tensor<T>) -> Result<Tensor<T>> {
        if grad.len() != self.mask.len() {
            return Err(MlError::Shape("relu backward length mismatch".into()));
        }
        let data = grad.data().iter().zip(&self.mask).map(|(&g, &m)| if m { g } else { T::ZERO }).collect();
        Tensor::from_vec(grad.shape(), data)
    }
}

/// Inverted dropout: kept units are scaled by `1 / (1 - p)` while training,
/// inference is the identity.
#[derive(Clone, Debug)]
pub struct Dropout {
    pub p: f64,
    pub(crate) mask: Vec<f64>,
}

impl Dropout {
    pub fn new(p: f64) -> Self {
        assert!((0.0..1.0).contains(&p), "dropout probability must be in [0, 1)");
        Dropout { p, mask: Vec::new() }
    }

    pub fn forward<T: Scalar>(&mut self, x: &Tensor<T>, mode: Mode, rng: &mut impl Rng) -> Tensor<T> {
        match mode {
            Mode::Infer => {
                self.mask = vec![1.0; x.len()];
                x.clone()
            }
            Mode::Train => {
                let keep = 1.0 / (1.0 - self.p);
                self.mask = (0..x.len()).map(|_| if rng.random::<f64>() < self.p { 0.0 } else { keep }).collect();
                let data = x.data().iter().zip(&self.mask).map(|(&v, &m)| v * T::from_f64(m)).collect();
                Tensor::from_vec(x.shape(), data).expect("same shape")
            }
        }
    }

    pub fn backward<T: Scalar>(&mut self, grad: &Tensor<T>) -> Result<Tensor<T>> {
        if grad.len() != self.mask.len() {
            return Err(MlError::Shape("dropout backward length mismatch".into()));
        }
        let data = grad.data().iter().zip(&self.mask).map(|(&g, &m)| g * T::from_f64(m)).collect();
        Tensor::from_vec(grad.shape(), data)
    }
}

#[derive(Clone, Debug, Default)]
pub struct Flatten {
    in_shape: Vec<usize>,
}

impl Flatten {
    pub fn forward<T: Scalar>(&mut self, x: &Tensor<T>) -> Result<Tensor<T>> {
        self.in_shape = x.shape().to_vec();
        let (b, n) = (x.batch(), x.row_len());
        x.clone().reshape(&[b, n])
    }

    pub fn backward<T: Scalar>(&mut self, grad: &Tensor<T>) -> Result<Tensor<T>> {
        grad.clone().reshape(&self.in_shape)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn dropout_inference_is_identity_and_training_rescales() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut d = Dropout::new(0.5);
        let x = Tensor::from_vec(&[1, 1000], vec![1.0f64; 1000]).unwrap();
        assert_eq!(d.forward(&x, Mode::Infer, &mut rng), x);
        let y = d.forward(&x, Mode::Train, &mut rng);
        assert!(y.data().iter().all(|&v| v == 0.0 || v == 2.0));
        let mean = y.data().iter().sum::<f64>() / 1000.0;
        assert!((mean - 1.0).abs() < 0.1);
    }
}
