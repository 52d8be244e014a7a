//! Adam with bias correction and a piecewise-constant learning-rate schedule.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Base rate times the product of every multiplier whose step has been reached.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LrSchedule {
    pub base_lr: f64,
    /// `(step, multiplier)` pairs.
    pub milestones: Vec<(u64, f64)>,
}

impl LrSchedule {
    pub fn constant(base_lr: f64) -> Self {
        Self { base_lr, milestones: Vec::new() }
    }

    /// 1e-3, multiplied by 0.3 at steps 12800 and 32000.
    pub fn graphrnn_default() -> Self {
        Self { base_lr: 1e-3, milestones: vec![(12_800, 0.3), (32_000, 0.3)] }
    }

    pub fn multiplier(&self, step: u64) -> f64 {
        self.milestones.iter().filter(|(s, _)| *s <= step).map(|(_, m)| m).product()
    }

    pub fn lr(&self, step: u64) -> f64 {
        self.base_lr * self.multiplier(step)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub schedule: LrSchedule,
    /// Global gradient-norm clip; off when `None`.
    pub clip_norm: Option<f64>,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self { beta1: 0.9, beta2: 0.999, eps: 1e-8, schedule: LrSchedule::graphrnn_default(), clip_norm: None }
    }
}

#[derive(Debug, Clone)]
pub struct Adam {
    pub config: AdamConfig,
    /// Number of updates applied so far.
    pub t: u64,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl Adam {
    pub fn new(config: AdamConfig, num_params: usize) -> Self {
        Self { config, t: 0, m: vec![0.0; num_params], v: vec![0.0; num_params] }
    }

    pub fn current_lr(&self) -> f64 {
        self.config.schedule.lr(self.t + 1)
    }

    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(Error::Shape(format!(
                "adam state {} vs params {} / grads {}",
                self.m.len(),
                params.len(),
                grads.len()
            )));
        }
        self.t += 1;
        let c = &self.config;
        let scale = match c.clip_norm {
            Some(max) => {
                let norm = grads.iter().map(|g| g * g).sum::<f64>().sqrt();
                if norm > max { max / norm } else { 1.0 }
            }
            None => 1.0,
        };
        let lr = c.schedule.lr(self.t);
        let bc1 = 1.0 - c.beta1.powf(self.t as f64);
        let bc2 = 1.0 - c.beta2.powf(self.t as f64);
        for (((p, &g), m), v) in params.iter_mut().zip(grads).zip(&mut self.m).zip(&mut self.v) {
            let g = g * scale;
            *m = c.beta1 * *m + (1.0 - c.beta1) * g;
            *v = c.beta2 * *v + (1.0 - c.beta2) * g * g;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            *p -= lr * m_hat / (v_hat.sqrt() + c.eps);
        }
        Ok(())
    }
}
