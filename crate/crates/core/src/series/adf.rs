use serde::{Deserialize, Serialize};

use super::linalg::ols;
use super::{difference, Series};
use crate::error::{Error, Result};

/// Outcome of an augmented Dickey-Fuller test with a constant term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdfReport {
    pub statistic: f64,
    pub lag_used: usize,
    /// Rows in the test regression.
    pub nobs: usize,
    /// Critical values at the 1%, 5% and 10% levels.
    pub critical_values: [f64; 3],
    pub critical_value_5pct: f64,
    /// Unit root rejected at the 5% level.
    pub is_stationary: bool,
}

// MacKinnon (2010) response-surface coefficients, constant-only case,
// one variable: cv(T) = b0 + b1/T + b2/T^2 + b3/T^3.
const TAU_C: [[f64; 4]; 3] = [
    [-3.43035, -6.5393, -16.786, -79.433],
    [-2.86154, -2.8903, -4.234, -40.040],
    [-2.56677, -1.5384, -2.809, 0.0],
];

/// Finite-sample 1%/5%/10% critical values for `nobs` regression rows.
pub fn mackinnon_critical_values(nobs: usize) -> [f64; 3] {
    let inv = 1.0 / nobs as f64;
    TAU_C.map(|b| b[0] + b[1] * inv + b[2] * inv * inv + b[3] * inv * inv * inv)
}

/// `floor((n - 1)^(1/3))`.
pub fn default_max_lag(n: usize) -> usize {
    let base = n.saturating_sub(1) as f64;
    let mut lag = base.cbrt().floor() as usize;
    // cbrt may land a hair below an exact cube.
    while ((lag + 1) as f64).powi(3) <= base {
        lag += 1;
    }
    lag
}

/// Augmented Dickey-Fuller test, constant and no trend, fixed lag order.
///
/// Regresses `dy_t` on `(1, y_{t-1}, dy_{t-1}, ..., dy_{t-max_lag})` and
/// reports the t-statistic of the `y_{t-1}` coefficient.
///
/// A series whose increments are exactly constant (a pure drift, e.g. a
/// linear ramp) fits the unit-root model perfectly with a zero level
/// coefficient; it is reported with statistic 0 rather than as an error.
pub fn adf_test(series: &Series, max_lag: usize) -> Result<AdfReport> {
    series.require_univariate("adf_test")?;
    let y = series.values();
    let n = y.len();
    if n < max_lag + 10 {
        return Err(Error::SeriesTooShort {
            what: "ADF test",
            len: n,
            needed: max_lag + 10,
        });
    }
    let dy: Vec<f64> = y.windows(2).map(|w| w[1] - w[0]).collect();
    let rows = max_lag..dy.len();
    let nobs = rows.len();

    let response: Vec<f64> = rows.clone().map(|i| dy[i]).collect();
    let mut columns = Vec::with_capacity(max_lag + 2);
    columns.push(vec![1.0; nobs]);
    columns.push(rows.clone().map(|i| y[i]).collect::<Vec<_>>());
    for lag in 1..=max_lag {
        columns.push(rows.clone().map(|i| dy[i - lag]).collect());
    }

    let fit = ols(&columns, &response);
    if fit.dropped.contains(&1) {
        return Err(Error::Degenerate("lagged level is constant".into()));
    }
    let critical_values = mackinnon_critical_values(nobs);
    let tss: f64 = response.iter().map(|v| v * v).sum();
    let gamma = fit.coef[1];

    let exact_fit = fit.rss <= 1e-20 * tss.max(f64::MIN_POSITIVE);
    let statistic = if exact_fit {
        if gamma.abs() > 1e-8 {
            return Err(Error::Degenerate("deterministic series with mean-reverting exact fit".into()));
        }
        0.0
    } else {
        if !fit.dropped.is_empty() {
            return Err(Error::Degenerate(format!(
                "collinear lag columns {:?} in ADF regression",
                fit.dropped
            )));
        }
        let dof = nobs.checked_sub(fit.rank).filter(|d| *d > 0).ok_or_else(|| {
            Error::Degenerate("no residual degrees of freedom".into())
        })?;
        let sigma2 = fit.rss / dof as f64;
        let se = (sigma2 * fit.inv_gram_diag[1].unwrap_or(f64::NAN)).sqrt();
        if !(se > 0.0) || !se.is_finite() {
            return Err(Error::Degenerate("zero standard error".into()));
        }
        gamma / se
    };

    Ok(AdfReport {
        statistic,
        lag_used: max_lag,
        nobs,
        critical_values,
        critical_value_5pct: critical_values[1],
        is_stationary: statistic < critical_values[1],
    })
}

/// Smallest differencing order in `0..=max_d` whose result passes the ADF
/// test at 5%; `max_d` when none does.
///
/// Each candidate is tested with `max_lag`, or the default lag for its
/// length when `None`.
pub fn select_difference_order(series: &Series, max_d: usize, max_lag: Option<usize>) -> Result<usize> {
    if max_d > 2 {
        return Err(Error::Config(format!("maximum differencing order is 2, got {max_d}")));
    }
    for d in 0..=max_d {
        let candidate = if d == 0 {
            series.clone()
        } else {
            difference(series, d)?.0
        };
        let lag = max_lag.unwrap_or_else(|| default_max_lag(candidate.len()));
        if adf_test(&candidate, lag)?.is_stationary {
            return Ok(d);
        }
    }
    Ok(max_d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn noise(seed: u64, n: usize) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    fn cumsum(v: &[f64]) -> Vec<f64> {
        v.iter()
            .scan(0.0, |acc, x| {
                *acc += x;
                Some(*acc)
            })
            .collect()
    }

    fn s(v: Vec<f64>) -> Series {
        Series::new("adf", v).unwrap()
    }

    #[test]
    fn critical_values_approach_asymptotic_table() {
        let cv = mackinnon_critical_values(1_000_000);
        assert!((cv[0] + 3.43035).abs() < 1e-4);
        assert!((cv[1] + 2.86154).abs() < 1e-4);
        assert!((cv[2] + 2.56677).abs() < 1e-4);
        // Finite samples push the values further into the tail.
        let small = mackinnon_critical_values(100);
        assert!(small[1] < cv[1]);
    }

    #[test]
    fn default_lag_is_cube_root_floor() {
        assert_eq!(default_max_lag(500), 7);
        assert_eq!(default_max_lag(28), 3);
        assert_eq!(default_max_lag(9), 2);
        assert_eq!(default_max_lag(1), 0);
    }

    #[test]
    fn linear_ramp_is_not_stationary() {
        let ramp: Vec<f64> = (0..500).map(|t| t as f64 / 500.0).collect();
        let report = adf_test(&s(ramp.clone()), 0).unwrap();
        assert!(!report.is_stationary);
        let report = adf_test(&s(ramp), default_max_lag(500)).unwrap();
        assert!(!report.is_stationary);
    }

    #[test]
    fn constant_series_is_degenerate() {
        let err = adf_test(&s(vec![2.5; 100]), 2).unwrap_err();
        assert!(err.to_string().contains("degenerate series"));
    }

    #[test]
    fn too_short_for_lag() {
        assert!(matches!(adf_test(&s(noise(1, 12)), 4), Err(Error::SeriesTooShort { .. })));
    }

    #[test]
    fn report_flag_matches_statistic() {
        for seed in 0..20 {
            let r = adf_test(&s(noise(seed, 200)), 3).unwrap();
            assert_eq!(r.is_stationary, r.statistic < r.critical_value_5pct);
            assert_eq!(r.critical_value_5pct, r.critical_values[1]);
        }
    }

    #[test]
    fn statistic_ignores_constant_offset() {
        let base = cumsum(&noise(3, 300));
        let shifted: Vec<f64> = base.iter().map(|v| v + 250.0).collect();
        let a = adf_test(&s(base), 4).unwrap();
        let b = adf_test(&s(shifted), 4).unwrap();
        assert!((a.statistic - b.statistic).abs() < 1e-8);
    }

    #[test]
    fn deterministic_input_gives_identical_reports() {
        let x = s(noise(9, 250));
        assert_eq!(adf_test(&x, 5).unwrap(), adf_test(&x, 5).unwrap());
    }

    #[test]
    fn difference_order_selection() {
        let mut votes = [[0usize; 3]; 3];
        for seed in 0..15 {
            let e = noise(100 + seed, 500);
            let walk = cumsum(&e);
            let twice = cumsum(&walk);
            votes[0][select_difference_order(&s(e), 2, None).unwrap()] += 1;
            votes[1][select_difference_order(&s(walk), 2, None).unwrap()] += 1;
            votes[2][select_difference_order(&s(twice), 2, None).unwrap()] += 1;
        }
        // Majority over seeds lands on the integration order.
        for (order, v) in votes.iter().enumerate() {
            let winner = (0..3).max_by_key(|&d| v[d]).unwrap();
            assert_eq!(winner, order, "votes {v:?}");
        }
    }

    #[test]
    fn selection_rejects_order_above_two() {
        assert!(select_difference_order(&s(noise(1, 100)), 3, None).is_err());
    }
}
