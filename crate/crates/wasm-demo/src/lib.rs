//! Browser bindings for the series and partition tools. Every export takes
//! plain numbers or `Float64Array`s and returns a JSON string.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use smaml_core::data::{generate_synthetic, SynthSpec};
use smaml_core::partition::{build_tasks, dtw_path, make_windows, Strategy};
use smaml_core::series::{adf_test, default_max_lag, difference, select_difference_order, Series};

fn js_err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

fn to_json<T: Serialize>(value: &T) -> Result<String, JsError> {
    serde_json::to_string(value).map_err(js_err)
}

#[derive(Serialize)]
struct Adf {
    statistic: f64,
    critical_5pct: f64,
    stationary: bool,
    lag: usize,
}

#[derive(Serialize)]
struct OrderView {
    d: usize,
    values: Vec<f64>,
    adf: Option<Adf>,
}

#[derive(Serialize)]
struct DiffView {
    suggested_d: Option<usize>,
    orders: Vec<OrderView>,
}

#[derive(Serialize)]
struct TaskView {
    query_origin: usize,
    support_origins: Vec<usize>,
}

#[derive(Serialize)]
struct PartitionView {
    windows: usize,
    target_len: usize,
    tasks: Vec<TaskView>,
}

#[derive(Serialize)]
struct DtwView {
    cost: f64,
    path: Vec<(usize, usize)>,
}

/// Trend + season + AR noise series.
#[wasm_bindgen]
pub fn synth_series(length: usize, slope: f64, amplitude: f64, period: usize, ar: f64, sigma: f64, seed: u64) -> Result<String, JsError> {
    let spec = SynthSpec {
        length,
        trend_slope: slope,
        season_amplitude: amplitude,
        season_period: period,
        ar_coeffs: vec![ar],
        noise_sigma: sigma,
        seed,
        offset: 0.0,
    };
    let (series, _) = generate_synthetic(&spec, "demo").map_err(js_err)?;
    to_json(&series.values())
}

/// The series differenced 0..=max_d times, each with its ADF result, and
/// the smallest order that tests stationary.
#[wasm_bindgen]
pub fn difference_explorer(values: &[f64], max_d: usize) -> Result<String, JsError> {
    let series = Series::new("demo", values.to_vec()).map_err(js_err)?;
    let mut orders = Vec::new();
    for d in 0..=max_d {
        let diffed = if d == 0 {
            series.clone()
        } else {
            match difference(&series, d) {
                Ok((s, _)) => s,
                Err(_) => break,
            }
        };
        let adf = adf_test(&diffed, default_max_lag(diffed.len())).ok().map(|r| Adf {
            statistic: r.statistic,
            critical_5pct: r.critical_value_5pct,
            stationary: r.is_stationary,
            lag: r.lag_used,
        });
        orders.push(OrderView {
            d,
            values: diffed.into_values(),
            adf,
        });
    }
    let suggested_d = select_difference_order(&series, max_d, None).ok();
    to_json(&DiffView { suggested_d, orders })
}

/// Meta-tasks for one support-selection strategy (`successive`, `random`,
/// `shuffle`, `dtw`, `es`).
#[wasm_bindgen]
pub fn partition_preview(values: &[f64], input_len: usize, k: usize, n: usize, strategy: &str, seed: u64) -> Result<String, JsError> {
    let strategy: Strategy = strategy.parse().map_err(js_err)?;
    let series = Series::new("demo", values.to_vec()).map_err(js_err)?;
    let windows = make_windows(&series, input_len, 1).map_err(js_err)?;
    let set = build_tasks(strategy, &windows, k, n, seed).map_err(js_err)?;
    let tasks = set
        .tasks
        .iter()
        .map(|t| TaskView {
            query_origin: t.query.origin_index,
            support_origins: t.support.iter().map(|w| w.origin_index).collect(),
        })
        .collect();
    to_json(&PartitionView {
        windows: windows.len(),
        target_len: windows[0].target.len(),
        tasks,
    })
}

/// Optimal DTW alignment of two sequences.
#[wasm_bindgen]
pub fn dtw_align(a: &[f64], b: &[f64]) -> Result<String, JsError> {
    let al = dtw_path(a, b).map_err(js_err)?;
    to_json(&DtwView {
        cost: al.cost,
        path: al.path,
    })
}
