use serde::{Deserialize, Serialize};

use super::ModelParams;
use crate::error::{Error, Result};

fn check_grads(params: &ModelParams, grads: &[f64]) -> Result<()> {
    if grads.len() != params.len() {
        return Err(Error::Shape(format!(
            "{} gradient entries for {} parameters",
            grads.len(),
            params.len()
        )));
    }
    if let Some(index) = grads.iter().position(|g| !g.is_finite()) {
        return Err(Error::GradientOverflow { index });
    }
    Ok(())
}

/// `params - lr * grads`.
pub fn sgd_step(params: &ModelParams, grads: &[f64], lr: f64) -> Result<ModelParams> {
    check_grads(params, grads)?;
    let data = params.as_slice().iter().zip(grads).map(|(p, g)| p - lr * g).collect();
    Ok(params.with_data(data))
}

/// Moment estimates for Adam.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub step_count: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    /// Zero moments with `beta1 = 0.9`, `beta2 = 0.999`, `eps = 1e-9`.
    pub fn new(len: usize) -> Self {
        Self {
            m: vec![0.0; len],
            v: vec![0.0; len],
            step_count: 0,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-9,
        }
    }
}

/// Bias-corrected Adam update.
pub fn adam_step(params: &ModelParams, grads: &[f64], state: &AdamState, lr: f64) -> Result<(ModelParams, AdamState)> {
    check_grads(params, grads)?;
    if state.m.len() != params.len() || state.v.len() != params.len() {
        return Err(Error::Shape(format!(
            "optimizer state sized for {} parameters, model has {}",
            state.m.len(),
            params.len()
        )));
    }
    let mut next = state.clone();
    next.step_count += 1;
    let t = next.step_count as i32;
    let c1 = 1.0 - state.beta1.powi(t);
    let c2 = 1.0 - state.beta2.powi(t);
    let mut data = params.as_slice().to_vec();
    for i in 0..data.len() {
        let g = grads[i];
        next.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
        next.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g;
        let m_hat = next.m[i] / c1;
        let v_hat = next.v[i] / c2;
        data[i] -= lr * m_hat / (v_hat.sqrt() + state.eps);
    }
    Ok((params.with_data(data), next))
}
