//! Time-series values and the pure transforms applied before windowing:
//! differencing and its inverse, min-max normalization, the augmented
//! Dickey-Fuller stationarity test, and least-squares AR fitting.

mod adf;
mod ar;
mod diff;
pub(crate) mod linalg;
mod normalize;

pub use adf::{adf_test, default_max_lag, mackinnon_critical_values, select_difference_order, AdfReport};
pub use ar::{fit_ar, ArFit};
pub use diff::{difference, integrate, integrate_from_history};
pub use normalize::{denormalize, normalize_minmax};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An ordered, finite-valued observation sequence.
///
/// Multichannel series store values row-major: observation `t` of channel
/// `c` lives at `t * channel_count + c`. Transforms in this module operate
/// on univariate series; use [`Series::channels`] to split first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    name: String,
    values: Vec<f64>,
    channel_count: usize,
}

impl Series {
    pub fn new(name: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        Self::multichannel(name, values, 1)
    }

    pub fn multichannel(name: impl Into<String>, values: Vec<f64>, channel_count: usize) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty("series has no observations"));
        }
        if channel_count == 0 || values.len() % channel_count != 0 {
            return Err(Error::Shape(format!(
                "{} values cannot be split into {channel_count} channels",
                values.len()
            )));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self {
            name: name.into(),
            values,
            channel_count,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn channel_count(&self) -> usize {
        self.channel_count
    }

    /// Number of time steps.
    pub fn len(&self) -> usize {
        self.values.len() / self.channel_count
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Splits a multichannel series into univariate series named `name[c]`.
    pub fn channels(&self) -> Vec<Series> {
        if self.channel_count == 1 {
            return vec![self.clone()];
        }
        (0..self.channel_count)
            .map(|c| Series {
                name: format!("{}[{c}]", self.name),
                values: self.values.iter().skip(c).step_by(self.channel_count).copied().collect(),
                channel_count: 1,
            })
            .collect()
    }

    pub(crate) fn require_univariate(&self, what: &'static str) -> Result<()> {
        if self.channel_count != 1 {
            return Err(Error::Shape(format!(
                "{what} expects a univariate series, {:?} has {} channels",
                self.name, self.channel_count
            )));
        }
        Ok(())
    }

    pub(crate) fn derived(&self, values: Vec<f64>) -> Result<Series> {
        Series::new(self.name.clone(), values)
    }
}

/// Min-max bounds recorded by normalization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormBounds {
    pub min: f64,
    pub max: f64,
}

impl NormBounds {
    pub fn range(&self) -> f64 {
        self.max - self.min
    }
}

/// Everything needed to undo preprocessing: differencing order with the
/// initial value consumed by each pass, then optional normalization bounds.
///
/// Forward order is difference, then normalize. [`TransformStack::invert`]
/// undoes them in reverse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformStack {
    pub diff_order: usize,
    /// `diff_initials[k]` is the first element of the series before pass `k + 1`.
    pub diff_initials: Vec<f64>,
    pub norm: Option<NormBounds>,
}

impl TransformStack {
    pub fn identity() -> Self {
        Self {
            diff_order: 0,
            diff_initials: Vec::new(),
            norm: None,
        }
    }

    /// Differences `series` `diff_order` times, then optionally normalizes.
    pub fn fit_apply(series: &Series, diff_order: usize, normalize: bool) -> Result<(Series, TransformStack)> {
        let (diffed, mut stack) = if diff_order == 0 {
            series.require_univariate("preprocessing")?;
            (series.clone(), TransformStack::identity())
        } else {
            difference(series, diff_order)?
        };
        if !normalize {
            return Ok((diffed, stack));
        }
        let (normed, norm_stack) = normalize_minmax(&diffed)?;
        stack.norm = norm_stack.norm;
        Ok((normed, stack))
    }

    /// Maps a transformed value back to the differenced scale.
    pub fn denormalize_value(&self, v: f64) -> f64 {
        match self.norm {
            Some(b) => b.min + v * b.range(),
            None => v,
        }
    }

    /// Undoes normalization, then differencing.
    pub fn invert(&self, transformed: &Series) -> Result<Series> {
        let denormed = denormalize(transformed, self)?;
        if self.diff_order == 0 {
            return Ok(denormed);
        }
        integrate(&denormed, self)
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.diff_initials.len() != self.diff_order {
            return Err(Error::InconsistentStack(format!(
                "diff order {} but {} initial values",
                self.diff_order,
                self.diff_initials.len()
            )));
        }
        if let Some(b) = self.norm {
            if !(b.max > b.min) || !b.min.is_finite() || !b.max.is_finite() {
                return Err(Error::InconsistentStack(format!(
                    "normalization bounds [{}, {}] are not a valid range",
                    b.min, b.max
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite_values() {
        let err = Series::new("x", vec![1.0, f64::NAN]).unwrap_err();
        assert!(matches!(err, Error::NonFinite { index: 1 }));
        assert!(Series::new("x", vec![]).is_err());
    }

    #[test]
    fn channel_split_preserves_order() {
        let s = Series::multichannel("m", vec![1.0, 10.0, 2.0, 20.0, 3.0, 30.0], 2).unwrap();
        assert_eq!(s.len(), 3);
        let ch = s.channels();
        assert_eq!(ch[0].values(), &[1.0, 2.0, 3.0]);
        assert_eq!(ch[1].values(), &[10.0, 20.0, 30.0]);
        assert_eq!(ch[1].name(), "m[1]");
    }

    #[test]
    fn stack_inverts_difference_then_normalize() {
        let s = Series::new("x", vec![3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0]).unwrap();
        let (t, stack) = TransformStack::fit_apply(&s, 1, true).unwrap();
        assert!(t.values().iter().all(|v| (0.0..=1.0).contains(v)));
        let back = stack.invert(&t).unwrap();
        for (a, b) in back.values().iter().zip(s.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
