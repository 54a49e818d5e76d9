//! Linear soft-margin SVM trained in the primal.
//!
//! Minimizes `½‖w‖² + C Σ max(0, 1 − y(wᵀx + b))` with the Pegasos
//! schedule: per-sample hinge subgradient steps with learning rate
//! `1/(λt)`, `λ = 1/(C·P)`, over a fixed number of seeded-shuffle epochs.
//! The bias is learned as the weight of a constant feature whose value is
//! the mean training-row norm, so rescaling all features rescales it too.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{MlError, Result};
use crate::linalg::dot;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Kernel {
    Linear,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvmConfig {
    pub c: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig { c: 1.0, epochs: 200, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub w: Vec<f64>,
    pub b: f64,
    pub c_param: f64,
    pub kernel: Kernel,
}

impl SvmModel {
    /// Trains on `n` row-major samples of length `dim`; labels must be ±1.
    pub fn train(x: &[f64], n: usize, dim: usize, y: &[i8], cfg: SvmConfig) -> Result<Self> {
        if x.len() != n * dim || y.len() != n {
            return Err(MlError::Shape(format!("svm: {} values / {} labels for {n} x {dim}", x.len(), y.len())));
        }
        if y.iter().any(|&l| l != 1 && l != -1) {
            return Err(MlError::Domain("svm labels must be -1 or +1".into()));
        }
        if !(y.contains(&1) && y.contains(&-1)) {
            return Err(MlError::Training("svm needs samples from both classes".into()));
        }
        if !(cfg.c > 0.0) || cfg.epochs == 0 {
            return Err(MlError::Domain("svm needs C > 0 and at least one epoch".into()));
        }

        let mean_norm = x.chunks(dim).map(|r| dot(r, r).sqrt()).sum::<f64>() / n as f64;
        let bias_feature = if mean_norm > 0.0 { mean_norm } else { 1.0 };
        let lambda = 1.0 / (cfg.c * n as f64);

        // u = [w, beta]; b = beta * bias_feature
        let mut u = vec![0.0; dim + 1];
        let mut order: Vec<usize> = (0..n).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut t = 0u64;
        for _ in 0..cfg.epochs {
            order.shuffle(&mut rng);
            for &i in &order {
                t += 1;
                let eta = 1.0 / (lambda * t as f64);
                let row = &x[i * dim..(i + 1) * dim];
                let yi = y[i] as f64;
                let margin = yi * (dot(&u[..dim], row) + u[dim] * bias_feature);
                let shrink = 1.0 - 1.0 / t as f64;
                u.iter_mut().for_each(|v| *v *= shrink);
                if margin < 1.0 {
                    for (w, xv) in u[..dim].iter_mut().zip(row) {
                        *w += eta * yi * xv;
                    }
                    u[dim] += eta * yi * bias_feature;
                }
            }
        }
        let b = u[dim] * bias_feature;
        u.truncate(dim);
        Ok(SvmModel { w: u, b, c_param: cfg.c, kernel: Kernel::Linear })
    }

    /// Signed decision score `wᵀx + b`.
    pub fn decide(&self, x: &[f64]) -> f64 {
        dot(&self.w, x) + self.b
    }

    /// +1 when the score is non-negative, otherwise -1.
    pub fn predict(&self, x: &[f64]) -> i8 {
        if self.decide(x) >= 0.0 {
            1
        } else {
            -1
        }
    }
}
