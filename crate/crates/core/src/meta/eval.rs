use serde::{Deserialize, Serialize};

use crate::autodiff::{mae, predict, ModelParams};
use crate::error::{Error, Result};
use crate::partition::{TaskSet, WindowPair};
use crate::series::{integrate_from_history, Series, TransformStack};

use super::{fine_tune, MetaConfig};

/// MAE of one fine-tuned query prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub task_id: usize,
    pub seed: u64,
    pub mae_original_units: f64,
    pub mae_transformed: f64,
}

/// A target series in original units and the transform that produced the
/// windows cut from it.
#[derive(Debug, Clone)]
pub struct DomainTransform {
    pub original: Vec<f64>,
    pub stack: TransformStack,
}

impl DomainTransform {
    /// Preprocesses `series` and keeps what is needed to map predictions back.
    pub fn fit(series: &Series, diff_order: usize, normalize: bool) -> Result<(Series, Self)> {
        let (transformed, stack) = TransformStack::fit_apply(series, diff_order, normalize)?;
        Ok((
            transformed,
            Self {
                original: series.values().to_vec(),
                stack,
            },
        ))
    }

    /// Transformed-space values following `window`, mapped back to original
    /// units. Returns `(prediction, truth)` in original units.
    pub fn invert_window(&self, window: &WindowPair, transformed: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        self.stack.validate()?;
        let d = self.stack.diff_order;
        let end = window.origin_index + d + 1;
        let h = transformed.len();
        if end + h > self.original.len() {
            return Err(Error::InconsistentStack(format!(
                "window at origin {} with horizon {h} runs past the {}-point original series",
                window.origin_index,
                self.original.len()
            )));
        }
        let diffed: Vec<f64> = transformed.iter().map(|v| self.stack.denormalize_value(*v)).collect();
        let pred = integrate_from_history(&diffed, &self.original[..end], d)?;
        Ok((pred, self.original[end..end + h].to_vec()))
    }
}

/// Fine-tunes on every task's support set, predicts its query and records
/// MAE in transformed space and in original units. `domains` is indexed by
/// the windows' `segment`.
pub fn meta_test(
    params: &ModelParams,
    trained_k: usize,
    target_tasks: &TaskSet,
    domains: &[DomainTransform],
    cfg: &MetaConfig,
    seed: u64,
) -> Result<Vec<EvalRecord>> {
    if target_tasks.k != trained_k {
        return Err(Error::KMismatch {
            expected: trained_k,
            got: target_tasks.k,
        });
    }
    target_tasks
        .tasks
        .iter()
        .enumerate()
        .map(|(task_id, task)| {
            let domain = domains.get(task.query.segment).ok_or_else(|| {
                Error::InconsistentStack(format!("no transform for segment {}", task.query.segment))
            })?;
            let tuned = fine_tune(params, &task.support, trained_k, cfg)?;
            let pred = predict(&tuned, &task.query.input)?;
            let (pred_orig, truth_orig) = domain.invert_window(&task.query, &pred)?;
            Ok(EvalRecord {
                task_id,
                seed,
                mae_original_units: mae(&pred_orig, &truth_orig),
                mae_transformed: mae(&pred, &task.query.target),
            })
        })
        .collect()
}

/// Seed-level means and their average.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeedAggregate {
    pub mean: f64,
    /// `(seed, mean MAE in original units)`, ordered by seed.
    pub per_seed: Vec<(u64, f64)>,
}

/// Averages original-unit MAE per seed, then across seeds.
pub fn aggregate_seeds(records: &[EvalRecord]) -> Result<SeedAggregate> {
    if records.is_empty() {
        return Err(Error::Empty("evaluation records"));
    }
    let mut seeds: Vec<u64> = records.iter().map(|r| r.seed).collect();
    seeds.sort_unstable();
    seeds.dedup();
    let per_seed: Vec<(u64, f64)> = seeds
        .iter()
        .map(|&s| {
            let vals: Vec<f64> = records.iter().filter(|r| r.seed == s).map(|r| r.mae_original_units).collect();
            (s, vals.iter().sum::<f64>() / vals.len() as f64)
        })
        .collect();
    let mean = per_seed.iter().map(|(_, m)| m).sum::<f64>() / per_seed.len() as f64;
    Ok(SeedAggregate { mean, per_seed })
}
