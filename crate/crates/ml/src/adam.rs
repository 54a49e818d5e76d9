use serde::{Deserialize, Serialize};

use crate::error::{MlError, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig { lr: 1e-4, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

/// Bias-corrected Adam. Moments are allocated lazily on the first step,
/// one pair per parameter slot, in visiting order.
#[derive(Clone, Debug)]
pub struct AdamState<T> {
    pub config: AdamConfig,
    pub step: u64,
    first: Vec<Vec<T>>,
    second: Vec<Vec<T>>,
    slot: usize,
}

impl<T: Scalar> AdamState<T> {
    pub fn new(config: AdamConfig) -> Self {
        AdamState { config, step: 0, first: Vec::new(), second: Vec::new(), slot: 0 }
    }

    /// Starts a new optimizer step; call [`AdamState::update`] once per slot afterwards.
    pub fn begin_step(&mut self) {
        self.step += 1;
        self.slot = 0;
    }

    pub fn update(&mut self, params: &mut [T], grads: &[T]) -> Result<()> {
        if params.len() != grads.len() {
            return Err(MlError::Shape(format!(
                "adam: {} params vs {} grads",
                params.len(),
                grads.len()
            )));
        }
        if self.step == 0 {
            return Err(MlError::Domain("adam: update before begin_step".into()));
        }
        if self.slot == self.first.len() {
            self.first.push(vec![T::ZERO; params.len()]);
            self.second.push(vec![T::ZERO; params.len()]);
        }
        let m = &mut self.first[self.slot];
        let v = &mut self.second[self.slot];
        if m.len() != params.len() {
            return Err(MlError::Shape(format!("adam: slot {} changed size", self.slot)));
        }
        self.slot += 1;

        let c = self.config;
        let t = self.step as i32;
        let b1 = T::from_f64(c.beta1);
        let b2 = T::from_f64(c.beta2);
        let corr1 = T::from_f64(1.0 - c.beta1.powi(t));
        let corr2 = T::from_f64(1.0 - c.beta2.powi(t));
        let lr = T::from_f64(c.lr);
        let eps = T::from_f64(c.eps);
        for i in 0..params.len() {
            let g = grads[i];
            m[i] = b1 * m[i] + (T::ONE - b1) * g;
            v[i] = b2 * v[i] + (T::ONE - b2) * g * g;
            let m_hat = m[i] / corr1;
            let v_hat = v[i] / corr2;
            params[i] -= lr * m_hat / (v_hat.sqrt() + eps);
        }
        Ok(())
    }

    /// Single-slot convenience: one full step over one parameter vector.
    pub fn step_single(&mut self, params: &mut [T], grads: &[T]) -> Result<()> {
        self.begin_step();
        self.update(params, grads)
    }
}
