use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::Series;

const BURN_IN: usize = 200;

/// Trend plus seasonality plus AR noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    pub length: usize,
    #[serde(default)]
    pub trend_slope: f64,
    #[serde(default)]
    pub season_amplitude: f64,
    #[serde(default = "default_period")]
    pub season_period: usize,
    #[serde(default)]
    pub ar_coeffs: Vec<f64>,
    #[serde(default)]
    pub noise_sigma: f64,
    #[serde(default)]
    pub seed: u64,
    /// Constant added to every value.
    #[serde(default)]
    pub offset: f64,
}

fn default_period() -> usize {
    24
}

/// The generated components, kept apart. Their sum is the series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub spec: SynthSpec,
    pub trend: Vec<f64>,
    pub season: Vec<f64>,
    pub noise: Vec<f64>,
}

/// True when `1 - a_1 z - ... - a_p z^p` has all roots outside the unit
/// circle, via the step-down recursion: every reflection coefficient must
/// lie strictly inside (-1, 1).
pub fn ar_is_stationary(coeffs: &[f64]) -> bool {
    let mut a = coeffs.to_vec();
    while let Some(&k) = a.last() {
        if !k.is_finite() || k.abs() >= 1.0 {
            return false;
        }
        let p = a.len();
        let denom = 1.0 - k * k;
        a = (0..p - 1).map(|j| (a[j] + k * a[p - 2 - j]) / denom).collect();
    }
    true
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.length == 0 {
            return Err(Error::Config("synthetic length must be positive".into()));
        }
        if self.season_amplitude != 0.0 && self.season_period < 2 {
            return Err(Error::Config(format!(
                "season_period must be at least 2 with a nonzero amplitude, got {}",
                self.season_period
            )));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::Config(format!("noise_sigma must be non-negative, got {}", self.noise_sigma)));
        }
        for (name, v) in [("trend_slope", self.trend_slope), ("season_amplitude", self.season_amplitude), ("offset", self.offset)] {
            if !v.is_finite() {
                return Err(Error::Config(format!("{name} must be finite")));
            }
        }
        if !ar_is_stationary(&self.ar_coeffs) {
            return Err(Error::NonstationaryAr(self.ar_coeffs.clone()));
        }
        Ok(())
    }
}

/// `y_t = offset + slope * t + amplitude * sin(2 pi t / period) + x_t`, where
/// `x_t` is AR noise driven by Gaussian innovations of standard deviation
/// `noise_sigma`, started `200` samples before `t = 0`.
pub fn generate_synthetic(spec: &SynthSpec, name: &str) -> Result<(Series, GroundTruth)> {
    spec.validate()?;
    let n = spec.length;
    let trend: Vec<f64> = (0..n).map(|t| spec.offset + spec.trend_slope * t as f64).collect();
    let season: Vec<f64> = (0..n)
        .map(|t| {
            if spec.season_amplitude == 0.0 {
                0.0
            } else {
                spec.season_amplitude * (2.0 * std::f64::consts::PI * t as f64 / spec.season_period as f64).sin()
            }
        })
        .collect();
    let noise = if spec.noise_sigma == 0.0 {
        vec![0.0; n]
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let normal = Normal::new(0.0, spec.noise_sigma).expect("sigma validated");
        let p = spec.ar_coeffs.len();
        let mut x = vec![0.0; BURN_IN + n];
        for t in 0..x.len() {
            let ar: f64 = (1..=p.min(t)).map(|i| spec.ar_coeffs[i - 1] * x[t - i]).sum();
            x[t] = ar + normal.sample(&mut rng);
        }
        x.split_off(BURN_IN)
    };
    let values = (0..n).map(|t| trend[t] + season[t] + noise[t]).collect();
    Ok((
        Series::new(name, values)?,
        GroundTruth {
            spec: spec.clone(),
            trend,
            season,
            noise,
        },
    ))
}
