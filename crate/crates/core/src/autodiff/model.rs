//! Single-layer LSTM with a linear head on the final hidden state.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::ops::Range;

use super::{NodeId, Tape, Tensor};
use crate::error::{Error, Result};

/// Layer sizes. `output_size` is the prediction horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LstmShape {
    pub input_size: usize,
    pub hidden_size: usize,
    pub output_size: usize,
}

/// Named parameter blocks, in storage order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Segment {
    /// `[4H, I]`, gate rows stacked input, forget, cell, output.
    InputWeights,
    /// `[4H, H]`.
    RecurrentWeights,
    /// `[4H]`.
    GateBias,
    /// `[O, H]`.
    HeadWeights,
    /// `[O]`.
    HeadBias,
}

impl Segment {
    pub const ALL: [Segment; 5] = [
        Segment::InputWeights,
        Segment::RecurrentWeights,
        Segment::GateBias,
        Segment::HeadWeights,
        Segment::HeadBias,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Segment::InputWeights => "w_ih",
            Segment::RecurrentWeights => "w_hh",
            Segment::GateBias => "b_gates",
            Segment::HeadWeights => "w_head",
            Segment::HeadBias => "b_head",
        }
    }

    pub fn dims(self, s: LstmShape) -> Vec<usize> {
        let g = 4 * s.hidden_size;
        match self {
            Segment::InputWeights => vec![g, s.input_size],
            Segment::RecurrentWeights => vec![g, s.hidden_size],
            Segment::GateBias => vec![g],
            Segment::HeadWeights => vec![s.output_size, s.hidden_size],
            Segment::HeadBias => vec![s.output_size],
        }
    }
}

impl LstmShape {
    pub fn new(input_size: usize, hidden_size: usize, output_size: usize) -> Result<Self> {
        if input_size == 0 || hidden_size == 0 || output_size == 0 {
            return Err(Error::Shape(format!(
                "all LSTM sizes must be positive (input {input_size}, hidden {hidden_size}, output {output_size})"
            )));
        }
        Ok(Self {
            input_size,
            hidden_size,
            output_size,
        })
    }

    pub fn segment_range(self, seg: Segment) -> Range<usize> {
        let mut start = 0;
        for s in Segment::ALL {
            let len: usize = s.dims(self).iter().product();
            if s == seg {
                return start..start + len;
            }
            start += len;
        }
        unreachable!("every segment is listed in Segment::ALL")
    }

    pub fn param_count(self) -> usize {
        self.segment_range(Segment::HeadBias).end
    }
}

/// Flat parameter vector for the LSTM and head.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    shape: LstmShape,
    data: Vec<f64>,
}

impl ModelParams {
    pub fn from_vec(shape: LstmShape, data: Vec<f64>) -> Result<Self> {
        if data.len() != shape.param_count() {
            return Err(Error::Shape(format!(
                "{shape:?} needs {} parameters, got {}",
                shape.param_count(),
                data.len()
            )));
        }
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: LstmShape) -> Self {
        Self {
            shape,
            data: vec![0.0; shape.param_count()],
        }
    }

    /// Weights uniform in `±1/sqrt(hidden)`, biases zero except the forget
    /// gate, which starts at 1.
    pub fn init(shape: LstmShape, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bound = 1.0 / (shape.hidden_size as f64).sqrt();
        let mut data = vec![0.0; shape.param_count()];
        for seg in [Segment::InputWeights, Segment::RecurrentWeights, Segment::HeadWeights] {
            for v in &mut data[shape.segment_range(seg)] {
                *v = rng.random_range(-bound..bound);
            }
        }
        let h = shape.hidden_size;
        let bias = shape.segment_range(Segment::GateBias);
        data[bias.start + h..bias.start + 2 * h].fill(1.0);
        Self { shape, data }
    }

    pub fn shape(&self) -> LstmShape {
        self.shape
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn segment(&self, seg: Segment) -> &[f64] {
        &self.data[self.shape.segment_range(seg)]
    }

    pub(crate) fn with_data(&self, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), self.data.len());
        Self { shape: self.shape, data }
    }
}

/// Parameter leaves recorded for one forward pass.
#[derive(Debug, Clone)]
pub struct ParamBindings {
    shape: LstmShape,
    ids: [NodeId; 5],
}

impl ParamBindings {
    pub fn bind(tape: &mut Tape, params: &ModelParams) -> Self {
        let shape = params.shape();
        let ids = Segment::ALL.map(|seg| {
            tape.leaf(Tensor::from_parts(seg.dims(shape), params.segment(seg).to_vec()))
        });
        Self { shape, ids }
    }

    pub fn id(&self, seg: Segment) -> NodeId {
        self.ids[Segment::ALL.iter().position(|s| *s == seg).expect("listed segment")]
    }

    /// Flat gradient aligned with [`ModelParams::as_slice`].
    pub fn gather(&self, grads: &super::Gradients) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.shape.param_count());
        for id in self.ids {
            out.extend(grads.wrt(id));
        }
        out
    }
}

/// Runs the LSTM over `input` (`[steps, input_size]`) from zero state and
/// applies the head to the last hidden state. Returns the `[output_size]`
/// prediction node.
pub fn lstm_forward(tape: &mut Tape, bindings: &ParamBindings, input: &Tensor) -> Result<NodeId> {
    let shape = bindings.shape;
    let dims = input.shape();
    if dims.len() != 2 || dims[0] == 0 {
        return Err(Error::Shape(format!("LSTM input must be [steps, features], got {dims:?}")));
    }
    if dims[1] != shape.input_size {
        return Err(Error::Shape(format!(
            "input has {} features per step but segment `{}` expects {}",
            dims[1],
            Segment::InputWeights.name(),
            shape.input_size
        )));
    }
    let h = shape.hidden_size;
    let w_ih = bindings.id(Segment::InputWeights);
    let w_hh = bindings.id(Segment::RecurrentWeights);
    let b = bindings.id(Segment::GateBias);

    let mut hidden = tape.leaf(Tensor::zeros(vec![h]));
    let mut cell = tape.leaf(Tensor::zeros(vec![h]));
    for t in 0..dims[0] {
        let x = tape.leaf(Tensor::from_parts(vec![shape.input_size], input.row(t).to_vec()));
        let zx = tape.matvec(w_ih, x)?;
        let zh = tape.matvec(w_hh, hidden)?;
        let z = tape.add(zx, zh)?;
        let z = tape.add(z, b)?;
        let i_pre = tape.slice(z, 0, h)?;
        let f_pre = tape.slice(z, h, h)?;
        let g_pre = tape.slice(z, 2 * h, h)?;
        let o_pre = tape.slice(z, 3 * h, h)?;
        let i_gate = tape.sigmoid(i_pre)?;
        let f_gate = tape.sigmoid(f_pre)?;
        let g_gate = tape.tanh(g_pre)?;
        let o_gate = tape.sigmoid(o_pre)?;
        let keep = tape.mul(f_gate, cell)?;
        let write = tape.mul(i_gate, g_gate)?;
        cell = tape.add(keep, write)?;
        let squashed = tape.tanh(cell)?;
        hidden = tape.mul(o_gate, squashed)?;
    }
    let head = tape.matvec(bindings.id(Segment::HeadWeights), hidden)?;
    tape.add(head, bindings.id(Segment::HeadBias))
}

/// Univariate window input as a `[steps, 1]` tensor.
pub fn window_tensor(values: &[f64]) -> Result<Tensor> {
    Tensor::new(vec![values.len(), 1], values.to_vec())
}

/// Forward pass without keeping the tape.
pub fn predict(params: &ModelParams, input: &[f64]) -> Result<Vec<f64>> {
    let mut tape = Tape::new();
    let bindings = ParamBindings::bind(&mut tape, params);
    let out = lstm_forward(&mut tape, &bindings, &window_tensor(input)?)?;
    Ok(tape.value(out).data().to_vec())
}

/// MSE of one window's prediction and its gradient with respect to all
/// parameters.
pub fn mse_and_gradient(params: &ModelParams, input: &[f64], target: &[f64]) -> Result<(f64, Vec<f64>)> {
    let mut tape = Tape::new();
    let bindings = ParamBindings::bind(&mut tape, params);
    let pred = lstm_forward(&mut tape, &bindings, &window_tensor(input)?)?;
    let target_id = tape.leaf(Tensor::vector(target.to_vec())?);
    let loss = tape.mse(pred, target_id)?;
    let value = tape.value(loss).data()[0];
    let grads = tape.backward(loss)?;
    Ok((value, bindings.gather(&grads)))
}
