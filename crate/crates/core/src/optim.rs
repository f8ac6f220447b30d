//! Adam with global-norm gradient clipping.

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::math::sqrt;
use crate::model::ModelParameters;

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields, default))]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Rescale gradients whose global norm exceeds this.
    pub clip_norm: Option<f64>,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            clip_norm: Some(5.0),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Adam {
    config: AdamConfig,
    m: ModelParameters,
    v: ModelParameters,
    t: i32,
}

impl Adam {
    pub fn new(config: AdamConfig, params: &ModelParameters) -> Self {
        Adam {
            config,
            m: params.zeros_like(),
            v: params.zeros_like(),
            t: 0,
        }
    }

    pub fn steps(&self) -> i32 {
        self.t
    }

    /// One update. Returns the gradient norm before clipping.
    pub fn step(&mut self, params: &mut ModelParameters, grad: &ModelParameters) -> f64 {
        let c = self.config;
        let norm = sqrt(grad.squared_norm());
        let scale = match c.clip_norm {
            Some(max) if norm > max => max / norm,
            _ => 1.0,
        };
        self.t += 1;
        let bc1 = 1.0 - libm::pow(c.beta1, f64::from(self.t));
        let bc2 = 1.0 - libm::pow(c.beta2, f64::from(self.t));
        let tensors = params
            .tensors_mut()
            .into_iter()
            .zip(grad.tensors())
            .zip(self.m.tensors_mut())
            .zip(self.v.tensors_mut());
        for (((p, g), m), v) in tensors {
            for idx in 0..p.len() {
                let gi = g[idx] * scale;
                m[idx] = c.beta1 * m[idx] + (1.0 - c.beta1) * gi;
                v[idx] = c.beta2 * v[idx] + (1.0 - c.beta2) * gi * gi;
                let mh = m[idx] / bc1;
                let vh = v[idx] / bc2;
                p[idx] -= c.learning_rate * mh / (sqrt(vh) + c.epsilon);
            }
        }
        norm
    }
}
