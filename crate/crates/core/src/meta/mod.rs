//! First-order MAML over pseudo meta-task sets, fine-tuning and evaluation.

mod adapt;
mod checkpoint;
mod eval;
mod train;

pub use adapt::{fine_tune, inner_adapt, support_loss, support_loss_and_gradient};
pub use checkpoint::{dataset_fingerprint, load_checkpoint, save_checkpoint, CheckpointMeta};
pub use eval::{aggregate_seeds, meta_test, DomainTransform, EvalRecord, SeedAggregate};
pub use train::{meta_train, EpochStats, TrainOutcome};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Learning rates and loop sizes for meta-training and fine-tuning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaConfig {
    pub inner_lr: f64,
    pub inner_steps: usize,
    pub outer_lr: f64,
    pub meta_epochs: usize,
    pub tasks_per_meta_batch: usize,
    pub first_order: bool,
    /// Fine-tuning steps at test time; `None` uses `inner_steps`.
    pub fine_tune_steps: Option<usize>,
}

impl Default for MetaConfig {
    fn default() -> Self {
        Self {
            inner_lr: 0.001,
            inner_steps: 10,
            outer_lr: 0.001,
            meta_epochs: 8,
            tasks_per_meta_batch: 4,
            first_order: true,
            fine_tune_steps: None,
        }
    }
}

impl MetaConfig {
    /// Checks the invariants a user-supplied config must satisfy.
    pub fn validate(&self) -> Result<()> {
        if !(self.inner_lr > 0.0 && self.inner_lr.is_finite()) {
            return Err(Error::Config(format!("inner_lr must be positive, got {}", self.inner_lr)));
        }
        if !(self.outer_lr > 0.0 && self.outer_lr.is_finite()) {
            return Err(Error::Config(format!("outer_lr must be positive, got {}", self.outer_lr)));
        }
        if self.inner_steps == 0 {
            return Err(Error::Config("inner_steps must be at least 1".into()));
        }
        if self.meta_epochs == 0 {
            return Err(Error::Config("meta_epochs must be at least 1".into()));
        }
        self.check_runnable()
    }

    /// The weaker check applied by the training entry points, which also
    /// accept zero learning rates and step counts.
    pub(crate) fn check_runnable(&self) -> Result<()> {
        if self.tasks_per_meta_batch == 0 {
            return Err(Error::Config("tasks_per_meta_batch must be at least 1".into()));
        }
        if !self.first_order {
            return Err(Error::Config(
                "second-order meta-gradients are not implemented; set first_order = true".into(),
            ));
        }
        Ok(())
    }

    pub fn fine_tune_steps(&self) -> usize {
        self.fine_tune_steps.unwrap_or(self.inner_steps)
    }
}
