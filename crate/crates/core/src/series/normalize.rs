use super::{NormBounds, Series, TransformStack};
use crate::error::{Error, Result};

/// Rescales a series onto `[0, 1]`; the minimum maps to 0 and the maximum to 1.
pub fn normalize_minmax(series: &Series) -> Result<(Series, TransformStack)> {
    series.require_univariate("normalize_minmax")?;
    if series.len() < 2 {
        return Err(Error::SeriesTooShort {
            what: "normalization",
            len: series.len(),
            needed: 2,
        });
    }
    let (min, max) = series
        .values()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if !(max > min) {
        return Err(Error::ZeroRange);
    }
    let range = max - min;
    let values = series
        .values()
        .iter()
        .map(|&v| ((v - min) / range).clamp(0.0, 1.0))
        .collect();
    let stack = TransformStack {
        diff_order: 0,
        diff_initials: Vec::new(),
        norm: Some(NormBounds { min, max }),
    };
    Ok((series.derived(values)?, stack))
}

/// Undoes the normalization recorded in `stack`; identity if none was applied.
pub fn denormalize(series: &Series, stack: &TransformStack) -> Result<Series> {
    stack.validate()?;
    if stack.norm.is_none() {
        return Ok(series.clone());
    }
    let values = series.values().iter().map(|&v| stack.denormalize_value(v)).collect();
    series.derived(values)
}
