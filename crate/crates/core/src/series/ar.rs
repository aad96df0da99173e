use serde::{Deserialize, Serialize};

use super::linalg::ols;
use super::Series;
use crate::error::{Error, Result};

/// Least-squares autoregression `y_t = b0 + sum_i b_i y_{t-i} + e_t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArFit {
    pub order_p: usize,
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    /// Mean squared residual.
    pub residual_variance: f64,
}

impl ArFit {
    /// One-step prediction from the `order_p` most recent values (oldest first).
    pub fn predict_next(&self, recent: &[f64]) -> f64 {
        let p = self.order_p;
        let tail = &recent[recent.len() - p..];
        self.intercept + (1..=p).map(|i| self.coefficients[i - 1] * tail[p - i]).sum::<f64>()
    }
}

/// Fits an AR(p) model with intercept by ordinary least squares.
///
/// Rank-deficient designs are accepted only when the remaining columns fit
/// exactly (e.g. a constant series); the dropped coefficients are then 0.
/// Exact fits (residual energy below 1e-20 of the response energy) report
/// a residual variance of 0.
pub fn fit_ar(series: &Series, order_p: usize) -> Result<ArFit> {
    series.require_univariate("fit_ar")?;
    if order_p == 0 {
        return Err(Error::Config("AR order must be positive".into()));
    }
    let y = series.values();
    if y.len() < order_p + 2 {
        return Err(Error::SeriesTooShort {
            what: "AR fit",
            len: y.len(),
            needed: order_p + 2,
        });
    }
    let rows = order_p..y.len();
    let response: Vec<f64> = rows.clone().map(|t| y[t]).collect();
    let mut columns = vec![vec![1.0; rows.len()]];
    for i in 1..=order_p {
        columns.push(rows.clone().map(|t| y[t - i]).collect());
    }
    let fit = ols(&columns, &response);
    let tss: f64 = response.iter().map(|v| v * v).sum();
    let exact = fit.rss <= 1e-20 * tss.max(f64::MIN_POSITIVE);
    if !fit.dropped.is_empty() && !exact {
        return Err(Error::Singular(format!(
            "AR({order_p}) design columns {:?} are collinear",
            fit.dropped
        )));
    }
    Ok(ArFit {
        order_p,
        intercept: fit.coef[0],
        coefficients: fit.coef[1..].to_vec(),
        residual_variance: if exact { 0.0 } else { fit.rss / fit.nobs as f64 },
    })
}
