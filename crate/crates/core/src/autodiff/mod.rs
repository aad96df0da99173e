//! Reverse-mode differentiation, the LSTM forecaster and its optimizers.

mod checkpoint;
pub mod gradcheck;
mod loss;
mod model;
mod optim;
mod tape;
mod tensor;

pub use checkpoint::{load_params, params_from_bytes, params_to_bytes, save_params, MAGIC};
pub use loss::{mae_metric, mse_loss};
pub(crate) use loss::mae;
pub use model::{lstm_forward, mse_and_gradient, predict, window_tensor, LstmShape, ModelParams, ParamBindings, Segment};
pub use optim::{adam_step, sgd_step, AdamState};
pub use tape::{Gradients, NodeId, Tape};
pub use tensor::Tensor;
