use serde::{Deserialize, Serialize};

use super::params::{ParamSet, PARAM_NAMES};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    /// Global gradient-norm clip; `0` disables clipping.
    pub grad_clip: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            grad_clip: 5.0,
        }
    }
}

/// First and second moment estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: ParamSet,
    pub v: ParamSet,
    pub step: u64,
}

impl AdamState {
    pub fn new(like: &ParamSet) -> Self {
        AdamState {
            m: like.zeros_like(),
            v: like.zeros_like(),
            step: 0,
        }
    }
}

/// One bias-corrected Adam update after global-norm clipping. Returns the
/// gradient norm before clipping.
pub fn adam_step(p: &mut ParamSet, g: &ParamSet, state: &mut AdamState, cfg: &AdamConfig) -> Result<f64> {
    if p.dims() != g.dims() || p.dims() != state.m.dims() {
        return Err(Error::invalid("gradient and parameter shapes differ"));
    }
    for (name, t) in PARAM_NAMES.iter().zip(g.tensors()) {
        if t.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteGradient(name));
        }
    }
    let norm = g.norm();
    let scale = if cfg.grad_clip > 0.0 && norm > cfg.grad_clip {
        cfg.grad_clip / norm
    } else {
        1.0
    };

    state.step += 1;
    let t = state.step as i32;
    let c1 = 1.0 - cfg.beta1.powi(t);
    let c2 = 1.0 - cfg.beta2.powi(t);
    let params = p.tensors_mut();
    let grads = g.tensors();
    let ms = state.m.tensors_mut();
    let vs = state.v.tensors_mut();
    for (((p, g), m), v) in params.into_iter().zip(grads).zip(ms).zip(vs) {
        let it = p
            .as_mut_slice()
            .iter_mut()
            .zip(g.as_slice())
            .zip(m.as_mut_slice())
            .zip(v.as_mut_slice());
        for (((p, &g), m), v) in it {
            let g = g * scale;
            *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * g;
            *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *p -= cfg.lr * m_hat / (v_hat.sqrt() + cfg.eps);
        }
    }
    Ok(norm)
}
