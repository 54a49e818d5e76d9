use rand::Rng;

use super::{expect_rank, glorot_uniform};
use crate::error::{MlError, Result};
use crate::exec::Exec;
use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// 2-D cross-correlation, stride 1, "same" zero padding, odd square kernel.
///
/// Lowered to im2col + GEMM per sample; per-sample weight gradients are
/// summed in batch order.
#[derive(Clone, Debug)]
pub struct Conv2d<T> {
    pub in_channels: usize,
    pub out_channels: usize,
    pub kernel: usize,
    /// `[out, in, k, k]`
    pub weight: Vec<T>,
    pub bias: Vec<T>,
    pub grad_weight: Vec<T>,
    pub grad_bias: Vec<T>,
    pub(crate) cols: Vec<Vec<T>>,
    in_hw: (usize, usize),
}

impl<T: Scalar> Conv2d<T> {
    pub fn new(in_channels: usize, out_channels: usize, kernel: usize, rng: &mut impl Rng) -> Self {
        let k2 = kernel * kernel;
        let weight = glorot_uniform(out_channels * in_channels * k2, in_channels * k2, out_channels * k2, rng);
        Self::from_parts(in_channels, out_channels, kernel, weight, vec![T::ZERO; out_channels])
    }

    pub fn from_parts(in_channels: usize, out_channels: usize, kernel: usize, weight: Vec<T>, bias: Vec<T>) -> Self {
        assert!(kernel % 2 == 1, "same padding needs an odd kernel");
        assert_eq!(weight.len(), out_channels * in_channels * kernel * kernel);
        assert_eq!(bias.len(), out_channels);
        Conv2d {
            in_channels,
            out_channels,
            kernel,
            grad_weight: vec![T::ZERO; weight.len()],
            grad_bias: vec![T::ZERO; out_channels],
            weight,
            bias,
            cols: Vec::new(),
            in_hw: (0, 0),
        }
    }

    fn col_rows(&self) -> usize {
        self.in_channels * self.kernel * self.kernel
    }

    pub fn forward(&mut self, x: &Tensor<T>, exec: Exec) -> Result<Tensor<T>> {
        expect_rank(x, 4, "conv2d")?;
        let (b, c, h, w) = (x.shape()[0], x.shape()[1], x.shape()[2], x.shape()[3]);
        if c != self.in_channels {
            return Err(MlError::Shape(format!("conv2d expects {} channels, got {c}", self.in_channels)));
        }
        let hw = h * w;
        let rows = self.col_rows();
        let out_c = self.out_channels;
        let kernel = self.kernel;
        let weight = &self.weight;
        let bias = &self.bias;
        let per_sample = exec.map(b, |i| {
            let col = im2col(x.row(i), c, h, w, kernel);
            let mut out = vec![T::ZERO; out_c * hw];
            for (o, chunk) in out.chunks_mut(hw).enumerate() {
                chunk.fill(bias[o]);
            }
            T::gemm(out_c, rows, hw, T::ONE, weight, rows as isize, 1, &col, hw as isize, 1, T::ONE, &mut out, hw as isize, 1);
            (out, col)
        });
        let mut data = Vec::with_capacity(b * out_c * hw);
        self.cols.clear();
        for (out, col) in per_sample {
            data.extend_from_slice(&out);
            self.cols.push(col);
        }
        self.in_hw = (h, w);
        Tensor::from_vec(&[b, out_c, h, w], data)
    }

    pub fn backward(&mut self, grad: &Tensor<T>, exec: Exec) -> Result<Tensor<T>> {
        let (h, w) = self.in_hw;
        let b = self.cols.len();
        if grad.shape() != [b, self.out_channels, h, w] {
            return Err(MlError::Shape(format!("conv2d backward got {:?}", grad.shape())));
        }
        let hw = h * w;
        let rows = self.col_rows();
        let (out_c, in_c, kernel) = (self.out_channels, self.in_channels, self.kernel);
        let weight = &self.weight;
        let cols = &self.cols;
        let per_sample = exec.map(b, |i| {
            let dout = grad.row(i);
            let col = &cols[i];
            let mut dw = vec![T::ZERO; out_c * rows];
            // dW = dout * col^T
            T::gemm(out_c, hw, rows, T::ONE, dout, hw as isize, 1, col, 1, hw as isize, T::ZERO, &mut dw, rows as isize, 1);
            let db: Vec<T> = dout.chunks(hw).map(|ch| ch.iter().copied().sum()).collect();
            // dcol = W^T * dout
            let mut dcol = vec![T::ZERO; rows * hw];
            T::gemm(rows, out_c, hw, T::ONE, weight, 1, rows as isize, dout, hw as isize, 1, T::ZERO, &mut dcol, hw as isize, 1);
            (dw, db, col2im(&dcol, in_c, h, w, kernel))
        });
        self.grad_weight.fill(T::ZERO);
        self.grad_bias.fill(T::ZERO);
        let mut dx = Vec::with_capacity(b * in_c * hw);
        for (dw, db, dxi) in per_sample {
            for (g, v) in self.grad_weight.iter_mut().zip(&dw) {
                *g += *v;
            }
            for (g, v) in self.grad_bias.iter_mut().zip(&db) {
                *g += *v;
            }
            dx.extend_from_slice(&dxi);
        }
        Tensor::from_vec(&[b, in_c, h, w], dx)
    }
}

/// Unfolds one `[c, h, w]` image into a `[c*k*k, h*w]` patch matrix.
fn im2col<T: Scalar>(x: &[T], c: usize, h: usize, w: usize, k: usize) -> Vec<T> {
    let pad = (k / 2) as isize;
    let hw = h * w;
    let mut col = vec![T::ZERO; c * k * k * hw];
    for ch in 0..c {
        let plane = &x[ch * hw..(ch + 1) * hw];
        for ky in 0..k {
            for kx in 0..k {
                let row = (ch * k + ky) * k + kx;
                let dst = &mut col[row * hw..(row + 1) * hw];
                let dx = kx as isize - pad;
                let dy = ky as isize - pad;
                let x_lo = (-dx).max(0) as usize;
                let x_hi = (w as isize - dx).min(w as isize).max(0) as usize;
                for y in 0..h {
                    let sy = y as isize + dy;
                    if sy < 0 || sy >= h as isize || x_lo >= x_hi {
                        continue;
                    }
                    let src_row = sy as usize * w;
                    let sx_lo = (x_lo as isize + dx) as usize;
                    let n = x_hi - x_lo;
                    dst[y * w + x_lo..y * w + x_hi].copy_from_slice(&plane[src_row + sx_lo..src_row + sx_lo + n]);
                }
            }
        }
    }
    col
}

/// Adjoint of [`im2col`]: scatters patch gradients back onto the image.
fn col2im<T: Scalar>(col: &[T], c: usize, h: usize, w: usize, k: usize) -> Vec<T> {
    let pad = (k / 2) as isize;
    let hw = h * w;
    let mut x = vec![T::ZERO; c * hw];
    for ch in 0..c {
        let plane = &mut x[ch * hw..(ch + 1) * hw];
        for ky in 0..k {
            for kx in 0..k {
                let row = (ch * k + ky) * k + kx;
                let src = &col[row * hw..(row + 1) * hw];
                let dx = kx as isize - pad;
                let dy = ky as isize - pad;
                let x_lo = (-dx).max(0) as usize;
                let x_hi = (w as isize - dx).min(w as isize).max(0) as usize;
                for y in 0..h {
                    let sy = y as isize + dy;
                    if sy < 0 || sy >= h as isize || x_lo >= x_hi {
                        continue;
                    }
                    let dst_row = sy as usize * w;
                    let sx_lo = (x_lo as isize + dx) as usize;
                    let n = x_hi - x_lo;
                    for (d, s) in plane[dst_row + sx_lo..dst_row + sx_lo + n]
                        .iter_mut()
                        .zip(&src[y * w + x_lo..y * w + x_hi])
                    {
                        *d += *s;
                    }
                }
            }
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Direct nested-loop cross-correlation with zero padding.
    fn direct_conv(x: &[f64], c: usize, h: usize, w: usize, weight: &[f64], bias: &[f64], out_c: usize, k: usize) -> Vec<f64> {
        let pad = (k / 2) as isize;
        let mut out = vec![0.0; out_c * h * w];
        for o in 0..out_c {
            for y in 0..h {
                for xx in 0..w {
                    let mut acc = bias[o];
                    for ch in 0..c {
                        for ky in 0..k {
                            for kx in 0..k {
                                let sy = y as isize + ky as isize - pad;
                                let sx = xx as isize + kx as isize - pad;
                                if sy < 0 || sx < 0 || sy >= h as isize || sx >= w as isize {
                                    continue;
                                }
                                acc += weight[((o * c + ch) * k + ky) * k + kx] * x[(ch * h + sy as usize) * w + sx as usize];
                            }
                        }
                    }
                    out[(o * h + y) * w + xx] = acc;
                }
            }
        }
        out
    }

    #[test]
    fn identity_kernel_is_identity() {
        let mut w = vec![0.0f64; 9];
        w[4] = 1.0;
        let mut conv = Conv2d::from_parts(1, 1, 3, w, vec![0.0]);
        let x = Tensor::from_vec(&[1, 1, 5, 6], (0..30).map(|i| i as f64 - 7.5).collect()).unwrap();
        let y = conv.forward(&x, Exec::Sequential).unwrap();
        assert_eq!(y, x);
    }

    #[test]
    fn known_kernel_matches_direct_loops() {
        let x: Vec<f64> = (1..=16).map(|v| v as f64).collect();
        let w = vec![1.0, 0.0, -1.0, 2.0, 0.5, -2.0, 1.0, 0.0, -1.0];
        let want = direct_conv(&x, 1, 4, 4, &w, &[0.25], 1, 3);
        let mut conv = Conv2d::from_parts(1, 1, 3, w, vec![0.25]);
        let y = conv.forward(&Tensor::from_vec(&[1, 1, 4, 4], x).unwrap(), Exec::Sequential).unwrap();
        // Small integers and halves: GEMM and loops agree exactly.
        assert_eq!(y.data(), want.as_slice());
        // Corner (0,0): 0.5*1 - 2*2 + 0*5 - 1*6 + 0.25
        assert_eq!(y.data()[0], 0.5 - 4.0 - 6.0 + 0.25);
    }

    #[test]
    fn multi_channel_matches_direct_loops() {
        let (c, h, w, o, k) = (3, 5, 4, 2, 3);
        let x: Vec<f64> = (0..c * h * w).map(|i| ((i * 37 % 11) as f64 - 5.0) / 3.0).collect();
        let wt: Vec<f64> = (0..o * c * k * k).map(|i| ((i * 13 % 7) as f64 - 3.0) / 5.0).collect();
        let bias = vec![0.1, -0.2];
        let want = direct_conv(&x, c, h, w, &wt, &bias, o, k);
        let mut conv = Conv2d::from_parts(c, o, k, wt, bias);
        let x = Tensor::from_vec(&[1, c, h, w], x).unwrap();
        let y = conv.forward(&x, Exec::Parallel).unwrap();
        for (a, b) in y.data().iter().zip(&want) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn channel_mismatch_is_shape_error() {
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(1);
        let mut conv = Conv2d::<f32>::new(2, 4, 3, &mut rng);
        let x = Tensor::zeros(&[1, 3, 4, 4]);
        assert!(matches!(conv.forward(&x, Exec::Sequential), Err(MlError::Shape(_))));
    }
}
