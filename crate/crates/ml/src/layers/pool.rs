use super::expect_rank;
use crate::error::{MlError, Result};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// Non-overlapping max pooling with a square window (stride == window).
/// Trailing rows/columns that do not fill a window are dropped.
#[derive(Clone, Debug)]
pub struct MaxPool2d {
    pub size: usize,
    pub(crate) argmax: Vec<usize>,
    in_shape: Vec<usize>,
}

impl MaxPool2d {
    pub fn new(size: usize) -> Self {
        assert!(size >= 1);
        MaxPool2d { size, argmax: Vec::new(), in_shape: Vec::new() }
    }

    pub fn forward<T: Scalar>(&mut self, x: &Tensor<T>) -> Result<Tensor<T>> {
        expect_rank(x, 4, "maxpool")?;
        let (b, c, h, w) = (x.shape()[0], x.shape()[1], x.shape()[2], x.shape()[3]);
        let s = self.size;
        let (oh, ow) = (h / s, w / s);
        if oh == 0 || ow == 0 {
            return Err(MlError::Shape(format!("maxpool {s} on {h}x{w} input")));
        }
        let data = x.data();
        let mut out = Vec::with_capacity(b * c * oh * ow);
        self.argmax.clear();
        for plane in 0..b * c {
            let base = plane * h * w;
            for oy in 0..oh {
                for ox in 0..ow {
                    let mut best = base + oy * s * w + ox * s;
                    for dy in 0..s {
                        for dx in 0..s {
                            let i = base + (oy * s + dy) * w + ox * s + dx;
                            if data[i] > data[best] {
                                best = i;
                            }
                        }
                    }
                    out.push(data[best]);
                    self.argmax.push(best);
                }
            }
        }
        self.in_shape = x.shape().to_vec();
        Tensor::from_vec(&[b, c, oh, ow], out)
    }

    pub fn backward<T: Scalar>(&mut self, grad: &Tensor<T>) -> Result<Tensor<T>> {
        if grad.len() != self.argmax.len() {
            return Err(MlError::Shape(format!("maxpool backward got {:?}", grad.shape())));
        }
        let mut dx = Tensor::zeros(&self.in_shape);
        let d = dx.data_mut();
        for (&i, &g) in self.argmax.iter().zip(grad.data()) {
            d[i] += g;
        }
        Ok(dx)
    }
}
