use super::{Series, TransformStack};
use crate::error::{Error, Result};

fn diff_once(values: &[f64]) -> Vec<f64> {
    values.windows(2).map(|w| w[1] - w[0]).collect()
}

/// Applies first-order differencing `order` times.
///
/// Pass `k` records the first element of its input in
/// `diff_initials[k - 1]`, which is what [`integrate`] needs to undo it.
pub fn difference(series: &Series, order: usize) -> Result<(Series, TransformStack)> {
    series.require_univariate("difference")?;
    if order == 0 {
        return Err(Error::Config("differencing order must be positive".into()));
    }
    if series.len() <= order {
        return Err(Error::SeriesTooShort {
            what: "differencing order",
            len: series.len(),
            needed: order + 1,
        });
    }
    let mut current = series.values().to_vec();
    let mut initials = Vec::with_capacity(order);
    for _ in 0..order {
        initials.push(current[0]);
        current = diff_once(&current);
    }
    let stack = TransformStack {
        diff_order: order,
        diff_initials: initials,
        norm: None,
    };
    Ok((series.derived(current)?, stack))
}

fn integrate_values(diffed: &[f64], initials: &[f64]) -> Vec<f64> {
    let mut current = diffed.to_vec();
    for &init in initials.iter().rev() {
        let mut next = Vec::with_capacity(current.len() + 1);
        let mut acc = init;
        next.push(acc);
        for d in &current {
            acc += d;
            next.push(acc);
        }
        current = next;
    }
    current
}

/// Inverts [`difference`] using the initial values stored in `stack`.
///
/// Normalization bounds in the stack are ignored here; see
/// [`TransformStack::invert`] for the full inverse.
pub fn integrate(diffed: &Series, stack: &TransformStack) -> Result<Series> {
    diffed.require_univariate("integrate")?;
    if stack.diff_order == 0 {
        return Err(Error::InconsistentStack("stack records no differencing".into()));
    }
    if stack.diff_initials.len() != stack.diff_order {
        return Err(Error::InconsistentStack(format!(
            "diff order {} but {} initial values",
            stack.diff_order,
            stack.diff_initials.len()
        )));
    }
    diffed.derived(integrate_values(diffed.values(), &stack.diff_initials))
}

/// Integrates a differenced continuation of a known history.
///
/// `history` holds the original-scale values immediately preceding the
/// first element of `diffed` (at least `order` of them). Returns the
/// original-scale values aligned with `diffed`.
pub fn integrate_from_history(diffed: &[f64], history: &[f64], order: usize) -> Result<Vec<f64>> {
    if order == 0 {
        return Ok(diffed.to_vec());
    }
    if history.len() < order {
        return Err(Error::InconsistentStack(format!(
            "order {order} inversion needs {order} history values, got {}",
            history.len()
        )));
    }
    let tail = &history[history.len() - order..];
    // Initial value of each pass, taken from the tail's successive differences.
    let mut initials = Vec::with_capacity(order);
    let mut level = tail.to_vec();
    for _ in 0..order {
        initials.push(level[0]);
        level = diff_once(&level);
    }
    // The tail itself is reconstructed as the first `order` outputs.
    let full = integrate_values(diffed, &initials);
    Ok(full[order..].to_vec())
}
