use crate::error::{Error, Result};

use super::MlpParams;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamConfig {
    pub fn with_lr(learning_rate: f64) -> Self {
        Self { learning_rate, beta1: 0.9, beta2: 0.999, epsilon: 1e-8 }
    }
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self::with_lr(3e-4)
    }
}

/// Bias-corrected Adam update of one scalar. `step` is the 1-based step count.
#[inline]
pub fn adam_scalar_step(cfg: &AdamConfig, step: u64, p: &mut f64, g: f64, m: &mut f64, v: &mut f64) {
    *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * g;
    *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * g * g;
    let m_hat = *m / (1.0 - cfg.beta1.powi(step as i32));
    let v_hat = *v / (1.0 - cfg.beta2.powi(step as i32));
    *p -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.epsilon);
}

/// First/second moment accumulators for one network.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub config: AdamConfig,
    pub m: MlpParams,
    pub v: MlpParams,
    pub step: u64,
}

impl AdamState {
    pub fn new(params: &MlpParams, config: AdamConfig) -> Self {
        Self { config, m: params.zeros_like(), v: params.zeros_like(), step: 0 }
    }

    /// One Adam step. Rejects non-finite gradients before touching any state.
    pub fn apply(&mut self, params: &mut MlpParams, grads: &MlpParams) -> Result<()> {
        if !params.same_shape(grads) || !params.same_shape(&self.m) {
            return Err(Error::Contract("adam step on mismatched shapes".into()));
        }
        if let Some((layer, index)) = grads.find_non_finite() {
            return Err(Error::NonFinite { what: "gradient", layer, index });
        }
        self.step += 1;
        let cfg = self.config;
        let step = self.step;
        for (((p, g), m), v) in params.iter_mut().zip(grads.iter()).zip(self.m.iter_mut()).zip(self.v.iter_mut()) {
            adam_scalar_step(&cfg, step, p, *g, m, v);
        }
        Ok(())
    }
}

/// Adam for a single scalar parameter (the SAC temperature).
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarAdam {
    pub config: AdamConfig,
    pub m: f64,
    pub v: f64,
    pub step: u64,
}

impl ScalarAdam {
    pub fn new(config: AdamConfig) -> Self {
        Self { config, m: 0.0, v: 0.0, step: 0 }
    }

    pub fn apply(&mut self, param: &mut f64, grad: f64) -> Result<()> {
        if !grad.is_finite() {
            return Err(Error::NonFinite { what: "scalar gradient", layer: 0, index: 0 });
        }
        self.step += 1;
        adam_scalar_step(&self.config, self.step, param, grad, &mut self.m, &mut self.v);
        Ok(())
    }
}
