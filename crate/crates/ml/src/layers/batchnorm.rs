use super::Mode;
use crate::error::{MlError, Result};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

pub const BN_EPS: f64 = 1e-5;
pub const BN_MOMENTUM: f64 = 0.1;

/// Per-channel batch normalization over `(batch, spatial)`.
///
/// Works on `[b, c, h, w]` and on `[b, f]` (each feature is a channel).
/// Inference uses momentum-tracked running statistics.
#[derive(Clone, Debug)]
pub struct BatchNorm<T> {
    pub channels: usize,
    pub gamma: Vec<T>,
    pub beta: Vec<T>,
    pub running_mean: Vec<T>,
    pub running_var: Vec<T>,
    pub grad_gamma: Vec<T>,
    pub grad_beta: Vec<T>,
    pub(crate) xhat: Vec<T>,
    inv_std: Vec<T>,
    shape: Vec<usize>,
    mode: Option<Mode>,
}

impl<T: Scalar> BatchNorm<T> {
    pub fn new(channels: usize) -> Self {
        BatchNorm {
            channels,
            gamma: vec![T::ONE; channels],
            beta: vec![T::ZERO; channels],
            running_mean: vec![T::ZERO; channels],
            running_var: vec![T::ONE; channels],
            grad_gamma: vec![T::ZERO; channels],
            grad_beta: vec![T::ZERO; channels],
            xhat: Vec::new(),
            inv_std: Vec::new(),
            shape: Vec::new(),
            mode: None,
        }
    }

    fn layout(&self, shape: &[usize]) -> Result<(usize, usize)> {
        let (b, c, spatial) = match shape {
            [b, c] => (*b, *c, 1),
            [b, c, h, w] => (*b, *c, h * w),
            _ => return Err(MlError::Shape(format!("batchnorm got shape {shape:?}"))),
        };
        if c != self.channels {
            return Err(MlError::Shape(format!("batchnorm expects {} channels, got {c}", self.channels)));
        }
        Ok((b, spatial))
    }

    pub fn forward(&mut self, x: &Tensor<T>, mode: Mode) -> Result<Tensor<T>> {
        let (b, spatial) = self.layout(x.shape())?;
        if mode == Mode::Train && b < 2 {
            return Err(MlError::Domain("batchnorm in training mode needs a batch of at least 2".into()));
        }
        let c = self.channels;
        let eps = T::from_f64(BN_EPS);
        let data = x.data();
        let idx = |n: usize, ch: usize| (n * c + ch) * spatial;

        let (mean, var) = match mode {
            Mode::Train => {
                let count = (b * spatial) as f64;
                let mut mean = vec![T::ZERO; c];
                let mut var = vec![T::ZERO; c];
                for ch in 0..c {
                    let mut acc = 0.0f64;
                    for n in 0..b {
                        acc += data[idx(n, ch)..idx(n, ch) + spatial].iter().map(|v| v.to_f64()).sum::<f64>();
                    }
                    let mu = acc / count;
                    let mut sq = 0.0f64;
                    for n in 0..b {
                        sq += data[idx(n, ch)..idx(n, ch) + spatial]
                            .iter()
                            .map(|v| (v.to_f64() - mu).powi(2))
                            .sum::<f64>();
                    }
                    let sigma2 = sq / count;
                    mean[ch] = T::from_f64(mu);
                    var[ch] = T::from_f64(sigma2);
                    let m = T::from_f64(BN_MOMENTUM);
                    let unbiased = T::from_f64(sigma2 * count / (count - 1.0));
                    self.running_mean[ch] = (T::ONE - m) * self.running_mean[ch] + m * mean[ch];
                    self.running_var[ch] = (T::ONE - m) * self.running_var[ch] + m * unbiased;
                }
                (mean, var)
            }
            Mode::Infer => (self.running_mean.clone(), self.running_var.clone()),
        };

        self.inv_std = var.iter().map(|&v| T::ONE / (v + eps).sqrt()).collect();
        let mut xhat = vec![T::ZERO; data.len()];
        let mut out = vec![T::ZERO; data.len()];
        for n in 0..b {
            for ch in 0..c {
                let s = idx(n, ch);
                for i in s..s + spatial {
                    let h = (data[i] - mean[ch]) * self.inv_std[ch];
                    xhat[i] = h;
                    out[i] = self.gamma[ch] * h + self.beta[ch];
                }
            }
        }
        self.xhat = xhat;
        self.shape = x.shape().to_vec();
        self.mode = Some(mode);
        Tensor::from_vec(x.shape(), out)
    }

    pub fn backward(&mut self, grad: &Tensor<T>) -> Result<Tensor<T>> {
        if grad.shape() != self.shape.as_slice() {
            return Err(MlError::Shape(format!("batchnorm backward got {:?}", grad.shape())));
        }
        let (b, spatial) = self.layout(grad.shape())?;
        let c = self.channels;
        let dy = grad.data();
        let idx = |n: usize, ch: usize| (n * c + ch) * spatial;
        let count = T::from_f64((b * spatial) as f64);
        let mut dx = vec![T::ZERO; dy.len()];
        for ch in 0..c {
            let mut sum_dy = T::ZERO;
            let mut sum_dy_xhat = T::ZERO;
            for n in 0..b {
                let s = idx(n, ch);
                for i in s..s + spatial {
                    sum_dy += dy[i];
                    sum_dy_xhat += dy[i] * self.xhat[i];
                }
            }
            self.grad_gamma[ch] = sum_dy_xhat;
            self.grad_beta[ch] = sum_dy;
            let g = self.gamma[ch] * self.inv_std[ch];
            for n in 0..b {
                let s = idx(n, ch);
                for i in s..s + spatial {
                    dx[i] = match self.mode {
                        Some(Mode::Train) => g * (count * dy[i] - sum_dy - self.xhat[i] * sum_dy_xhat) / count,
                        _ => g * dy[i],
                    };
                }
            }
        }
        Tensor::from_vec(grad.shape(), dx)
    }
}
