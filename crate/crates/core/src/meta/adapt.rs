use crate::autodiff::{mse_and_gradient, predict, sgd_step, ModelParams};
use crate::error::{Error, Result};
use crate::partition::WindowPair;

use super::MetaConfig;

/// Mean MSE over `windows` and its gradient.
pub fn support_loss_and_gradient(params: &ModelParams, windows: &[WindowPair]) -> Result<(f64, Vec<f64>)> {
    if windows.is_empty() {
        return Err(Error::Empty("support set"));
    }
    let mut loss = 0.0;
    let mut grad = vec![0.0; params.len()];
    for w in windows {
        let (l, g) = mse_and_gradient(params, &w.input, &w.target)?;
        loss += l;
        grad.iter_mut().zip(&g).for_each(|(a, b)| *a += b);
    }
    let n = windows.len() as f64;
    grad.iter_mut().for_each(|g| *g /= n);
    Ok((loss / n, grad))
}

/// Mean MSE over `windows` without gradients.
pub fn support_loss(params: &ModelParams, windows: &[WindowPair]) -> Result<f64> {
    if windows.is_empty() {
        return Err(Error::Empty("support set"));
    }
    let mut loss = 0.0;
    for w in windows {
        let pred = predict(params, &w.input)?;
        loss += pred.iter().zip(&w.target).map(|(p, t)| (p - t) * (p - t)).sum::<f64>() / pred.len() as f64;
    }
    Ok(loss / windows.len() as f64)
}

fn sgd_loop(params: &ModelParams, support: &[WindowPair], lr: f64, steps: usize) -> Result<ModelParams> {
    if support.is_empty() {
        return Err(Error::Empty("support set"));
    }
    let mut cur = params.clone();
    for step in 0..steps {
        let (loss, grad) = support_loss_and_gradient(&cur, support)?;
        if !loss.is_finite() {
            return Err(Error::NonFiniteLoss { step });
        }
        cur = sgd_step(&cur, &grad, lr)?;
    }
    Ok(cur)
}

/// `inner_steps` plain gradient steps on the mean support MSE. Returns the
/// adapted parameters; `params` is left as is.
pub fn inner_adapt(params: &ModelParams, support: &[WindowPair], cfg: &MetaConfig) -> Result<ModelParams> {
    sgd_loop(params, support, cfg.inner_lr, cfg.inner_steps)
}

/// Adapts meta-trained parameters to a target-domain support set. The
/// support size must equal the `k` used during meta-training.
pub fn fine_tune(params: &ModelParams, support: &[WindowPair], trained_k: usize, cfg: &MetaConfig) -> Result<ModelParams> {
    if support.len() != trained_k {
        return Err(Error::KMismatch {
            expected: trained_k,
            got: support.len(),
        });
    }
    sgd_loop(params, support, cfg.inner_lr, cfg.fine_tune_steps())
}
