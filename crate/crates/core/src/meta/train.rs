use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::autodiff::{adam_step, mse_and_gradient, AdamState, ModelParams};
use crate::error::{Error, Result};
use crate::partition::{MetaTask, TaskSet};

use super::{inner_adapt, MetaConfig};

/// Per-epoch training summary, written out as the loss trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpochStats {
    pub epoch: usize,
    /// Mean query MSE at the adapted parameters, before the outer step.
    pub mean_query_loss: f64,
    pub tasks_used: usize,
    pub aborted: usize,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: ModelParams,
    pub trace: Vec<EpochStats>,
    /// `(epoch, task index, reason)` for every skipped task.
    pub aborted: Vec<(usize, usize, String)>,
}

/// Query loss and its gradient at the task's adapted parameters.
fn task_gradient(params: &ModelParams, task: &MetaTask, cfg: &MetaConfig) -> Result<(f64, Vec<f64>)> {
    let adapted = inner_adapt(params, &task.support, cfg)?;
    let (loss, grad) = mse_and_gradient(&adapted, &task.query.input, &task.query.target)?;
    if !loss.is_finite() {
        return Err(Error::NonFiniteLoss { step: cfg.inner_steps });
    }
    if let Some(index) = grad.iter().position(|g| !g.is_finite()) {
        return Err(Error::GradientOverflow { index });
    }
    Ok((loss, grad))
}

fn recoverable(e: &Error) -> bool {
    matches!(e, Error::NonFiniteLoss { .. } | Error::GradientOverflow { .. })
}

/// First-order MAML. Each epoch shuffles the tasks with a generator seeded
/// from `seed`, then walks them in meta-batches: every task is adapted from
/// the current parameters, and the mean query gradient at the adapted
/// parameters drives one Adam step. Tasks whose adaptation diverges are
/// skipped; the run fails if more than 10% of task visits are skipped.
pub fn meta_train(init: &ModelParams, tasks: &TaskSet, cfg: &MetaConfig, seed: u64) -> Result<TrainOutcome> {
    cfg.check_runnable()?;
    if tasks.tasks.is_empty() {
        return Err(Error::Empty("task set"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params = init.clone();
    let mut adam = AdamState::new(params.len());
    let mut order: Vec<usize> = (0..tasks.n()).collect();
    let mut trace = Vec::with_capacity(cfg.meta_epochs);
    let mut aborted = Vec::new();

    for epoch in 0..cfg.meta_epochs {
        order.shuffle(&mut rng);
        let (mut loss_sum, mut used, mut skipped) = (0.0, 0usize, 0usize);
        for batch in order.chunks(cfg.tasks_per_meta_batch) {
            let mut grad_sum = vec![0.0; params.len()];
            let mut count = 0usize;
            for &t in batch {
                match task_gradient(&params, &tasks.tasks[t], cfg) {
                    Ok((loss, grad)) => {
                        loss_sum += loss;
                        grad_sum.iter_mut().zip(&grad).for_each(|(a, b)| *a += b);
                        count += 1;
                    }
                    Err(e) if recoverable(&e) => {
                        aborted.push((epoch, t, e.to_string()));
                        skipped += 1;
                    }
                    Err(e) => return Err(e),
                }
            }
            if count == 0 {
                continue;
            }
            grad_sum.iter_mut().for_each(|g| *g /= count as f64);
            let (next, state) = adam_step(&params, &grad_sum, &adam, cfg.outer_lr)?;
            params = next;
            adam = state;
            used += count;
        }
        trace.push(EpochStats {
            epoch,
            mean_query_loss: if used > 0 { loss_sum / used as f64 } else { f64::NAN },
            tasks_used: used,
            aborted: skipped,
        });
    }

    let visits = cfg.meta_epochs * tasks.n();
    if aborted.len() * 10 > visits {
        return Err(Error::TooManyAborts {
            aborted: aborted.len(),
            total: visits,
        });
    }
    Ok(TrainOutcome { params, trace, aborted })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodiff::{predict, sgd_step, LstmShape};
    use crate::partition::{build_successive_tasks, make_windows, WindowPair};
    use crate::series::Series;
    use rand::Rng;

    fn sine_tasks(k: usize, n: usize, input_len: usize, seed: u64) -> TaskSet {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let phase = rng.random_range(0.0..6.0);
        let values: Vec<f64> = (0..200).map(|t| 0.5 + 0.4 * (t as f64 * 0.4 + phase).sin()).collect();
        let windows = make_windows(&Series::new("s", values).unwrap(), input_len, 1).unwrap();
        build_successive_tasks(&windows, k, n, seed).unwrap()
    }

    #[test]
    fn zero_epochs_is_identity() {
        let p = ModelParams::init(LstmShape::new(1, 4, 4).unwrap(), 0);
        let cfg = MetaConfig { meta_epochs: 0, ..Default::default() };
        let out = meta_train(&p, &sine_tasks(5, 10, 16, 0), &cfg, 1).unwrap();
        assert_eq!(out.params, p);
        assert!(out.trace.is_empty());
    }

    #[test]
    fn fixed_seed_is_bit_identical() {
        let p = ModelParams::init(LstmShape::new(1, 6, 4).unwrap(), 0);
        let tasks = sine_tasks(5, 12, 16, 3);
        let cfg = MetaConfig { meta_epochs: 2, ..Default::default() };
        let a = meta_train(&p, &tasks, &cfg, 9).unwrap();
        let b = meta_train(&p, &tasks, &cfg, 9).unwrap();
        assert_eq!(a.params, b.params);
        assert_eq!(a.trace, b.trace);
        let c = meta_train(&p, &tasks, &cfg, 10).unwrap();
        assert_ne!(a.params, c.params);
    }

    #[test]
    fn second_order_rejected() {
        let p = ModelParams::init(LstmShape::new(1, 2, 4).unwrap(), 0);
        let cfg = MetaConfig { first_order: false, ..Default::default() };
        assert!(matches!(meta_train(&p, &sine_tasks(5, 4, 16, 0), &cfg, 0), Err(Error::Config(_))));
    }

    // Independent restatement of the training loop with its own Adam
    // arithmetic, for a 50-parameter model and single-task batches.
    fn reference_loop(init: &ModelParams, tasks: &TaskSet, cfg: &MetaConfig, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut theta = init.clone();
        let n = theta.len();
        let (mut m, mut v) = (vec![0.0; n], vec![0.0; n]);
        let mut order: Vec<usize> = (0..tasks.n()).collect();
        let mut t = 0i32;
        for _ in 0..cfg.meta_epochs {
            order.shuffle(&mut rng);
            for &i in &order {
                let task = &tasks.tasks[i];
                let mut adapted = theta.clone();
                for _ in 0..cfg.inner_steps {
                    let mut g = vec![0.0; n];
                    for w in &task.support {
                        let (_, gw) = mse_and_gradient(&adapted, &w.input, &w.target).unwrap();
                        for j in 0..n {
                            g[j] += gw[j] / task.support.len() as f64;
                        }
                    }
                    adapted = sgd_step(&adapted, &g, cfg.inner_lr).unwrap();
                }
                let (_, gq) = mse_and_gradient(&adapted, &task.query.input, &task.query.target).unwrap();
                t += 1;
                let mut next = theta.as_slice().to_vec();
                for j in 0..n {
                    m[j] = 0.9 * m[j] + 0.1 * gq[j];
                    v[j] = 0.999 * v[j] + 0.001 * gq[j] * gq[j];
                    let mh = m[j] / (1.0 - 0.9f64.powi(t));
                    let vh = v[j] / (1.0 - 0.999f64.powi(t));
                    next[j] -= cfg.outer_lr * mh / (vh.sqrt() + 1e-9);
                }
                theta = ModelParams::from_vec(theta.shape(), next).unwrap();
            }
        }
        theta.as_slice().to_vec()
    }

    #[test]
    fn matches_reference_loop() {
        // 4*2*1 + 4*2*2 + 4*2 + 6*2 + 6 = 50 parameters.
        let shape = LstmShape::new(1, 2, 6).unwrap();
        assert_eq!(shape.param_count(), 50);
        let p = ModelParams::init(shape, 4);
        let tasks = sine_tasks(3, 6, 24, 5);
        let cfg = MetaConfig {
            tasks_per_meta_batch: 1,
            meta_epochs: 2,
            inner_steps: 3,
            inner_lr: 0.01,
            outer_lr: 0.01,
            ..Default::default()
        };
        let ours = meta_train(&p, &tasks, &cfg, 77).unwrap();
        let reference = reference_loop(&p, &tasks, &cfg, 77);
        for (a, b) in ours.params.as_slice().iter().zip(&reference) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn meta_training_beats_random_init_on_sinusoids() {
        let p = ModelParams::init(LstmShape::new(1, 16, 4).unwrap(), 1);
        let tasks = sine_tasks(5, 40, 16, 2);
        let cfg = MetaConfig { meta_epochs: 5, outer_lr: 0.01, ..Default::default() };
        let trained = meta_train(&p, &tasks, &cfg, 3).unwrap().params;
        let query_mse = |params: &ModelParams| {
            tasks
                .tasks
                .iter()
                .map(|t| {
                    let pred = predict(params, &t.query.input).unwrap();
                    pred.iter().zip(&t.query.target).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / 4.0
                })
                .sum::<f64>()
                / tasks.n() as f64
        };
        assert!(query_mse(&trained) < query_mse(&p));
    }

    #[test]
    fn diverging_tasks_abort_the_run() {
        let p = ModelParams::init(LstmShape::new(1, 4, 1).unwrap(), 0);
        let huge = |o: usize| WindowPair { input: vec![1.0; 4], target: vec![1e300], origin_index: o, segment: 0 };
        let task = MetaTask {
            support: vec![huge(0)],
            query: huge(1),
            support_positions: vec![0],
            query_position: 1,
            strategy: crate::partition::Strategy::Successive,
        };
        let tasks = TaskSet { tasks: vec![task], k: 1, strategy: crate::partition::Strategy::Successive };
        let err = meta_train(&p, &tasks, &MetaConfig { meta_epochs: 1, ..Default::default() }, 0).unwrap_err();
        assert!(matches!(err, Error::TooManyAborts { aborted: 1, total: 1 }), "{err}");
        assert!(!err.is_validation());
    }
}
