//! Central finite-difference comparison for every tape op and the full model.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{lstm_forward, window_tensor, LstmShape, ModelParams, NodeId, ParamBindings, Tape, Tensor};
use crate::error::Result;

pub const STEP: f64 = 1e-5;
pub const TOLERANCE: f64 = 1e-4;

/// Result for one op at one shape.
#[derive(Debug, Clone, Serialize)]
pub struct OpCheck {
    pub op: String,
    pub shape: String,
    pub max_rel_error: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct GradcheckReport {
    pub checks: Vec<OpCheck>,
}

impl GradcheckReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// Worst error per op, in first-seen order.
    pub fn per_op(&self) -> Vec<(String, f64, bool)> {
        let mut out: Vec<(String, f64, bool)> = Vec::new();
        for c in &self.checks {
            match out.iter_mut().find(|(op, _, _)| *op == c.op) {
                Some(entry) => {
                    entry.1 = entry.1.max(c.max_rel_error);
                    entry.2 &= c.passed;
                }
                None => out.push((c.op.clone(), c.max_rel_error, c.passed)),
            }
        }
        out
    }

    pub fn failures(&self) -> Vec<&OpCheck> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

/// `|a - n| / max(|a|, |n|, 1e-6)`.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6)
}

type Build<'a> = dyn Fn(&mut Tape, &[NodeId]) -> Result<NodeId> + 'a;

/// Projects the op output onto a fixed random direction so every output
/// element contributes to a scalar loss.
fn scalar_loss(tape: &mut Tape, out: NodeId, weights: &[f64]) -> Result<NodeId> {
    let w = tape.leaf(Tensor::from_parts(vec![weights.len()], weights.to_vec()));
    let prod = tape.mul(out, w)?;
    tape.sum(prod)
}

fn evaluate(build: &Build, inputs: &[Tensor], weights: &[f64]) -> Result<f64> {
    let mut tape = Tape::new();
    let ids: Vec<NodeId> = inputs.iter().map(|t| tape.leaf(t.clone())).collect();
    let out = build(&mut tape, &ids)?;
    let loss = scalar_loss(&mut tape, out, weights)?;
    Ok(tape.value(loss).data()[0])
}

fn check_function(op: &str, shape: String, build: &Build, inputs: Vec<Tensor>, rng: &mut ChaCha8Rng, corrupt: bool) -> Result<OpCheck> {
    let mut tape = Tape::new();
    let ids: Vec<NodeId> = inputs.iter().map(|t| tape.leaf(t.clone())).collect();
    let out = build(&mut tape, &ids)?;
    let weights: Vec<f64> = (0..tape.value(out).len()).map(|_| rng.random_range(0.5..1.5)).collect();
    let loss = scalar_loss(&mut tape, out, &weights)?;
    let grads = tape.backward(loss)?;

    let mut worst: f64 = 0.0;
    for (k, id) in ids.iter().enumerate() {
        let mut analytic = grads.wrt(*id);
        if corrupt && k == 0 {
            analytic[0] = analytic[0] * 1.1 + 1e-3;
        }
        for j in 0..inputs[k].len() {
            let mut plus = inputs.clone();
            let mut minus = inputs.clone();
            plus[k] = nudge(&inputs[k], j, STEP);
            minus[k] = nudge(&inputs[k], j, -STEP);
            let numeric = (evaluate(build, &plus, &weights)? - evaluate(build, &minus, &weights)?) / (2.0 * STEP);
            worst = worst.max(relative_error(analytic[j], numeric));
        }
    }
    Ok(OpCheck {
        op: op.to_string(),
        shape,
        max_rel_error: worst,
        passed: worst < TOLERANCE,
    })
}

fn nudge(t: &Tensor, j: usize, h: f64) -> Tensor {
    let mut data = t.data().to_vec();
    data[j] += h;
    Tensor::from_parts(t.shape().to_vec(), data)
}

fn random_tensor(rng: &mut ChaCha8Rng, shape: &[usize], scale: f64) -> Tensor {
    let n = shape.iter().product();
    Tensor::from_parts(shape.to_vec(), (0..n).map(|_| rng.random_range(-scale..scale)).collect())
}

/// Runs the op checks at three sizes each, then the LSTM with head at three
/// model sizes (the largest has about 200 parameters). `corrupt_op` perturbs
/// the analytic gradient of that op, for testing the checker itself.
pub fn run_gradcheck(seed: u64, corrupt_op: Option<&str>) -> Result<GradcheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();
    let sizes = [1usize, 3, 7];

    let unary: [(&str, &Build); 5] = [
        ("sigmoid", &|t, x| t.sigmoid(x[0])),
        ("tanh", &|t, x| t.tanh(x[0])),
        ("scale", &|t, x| t.scale(x[0], -1.7)),
        ("sum", &|t, x| t.sum(x[0])),
        ("slice", &|t, x| {
            let n = t.value(x[0]).len();
            t.slice(x[0], n / 3, n - n / 3)
        }),
    ];
    let binary: [(&str, &Build); 4] = [
        ("add", &|t, x| t.add(x[0], x[1])),
        ("sub", &|t, x| t.sub(x[0], x[1])),
        ("mul", &|t, x| t.mul(x[0], x[1])),
        ("mse", &|t, x| t.mse(x[0], x[1])),
    ];
    for (op, build) in unary {
        for &n in &sizes {
            let inputs = vec![random_tensor(&mut rng, &[n], 2.0)];
            checks.push(check_function(op, format!("[{n}]"), build, inputs, &mut rng, corrupt_op == Some(op))?);
        }
    }
    for (op, build) in binary {
        for &n in &sizes {
            let inputs = vec![random_tensor(&mut rng, &[n], 2.0), random_tensor(&mut rng, &[n], 2.0)];
            checks.push(check_function(op, format!("[{n}]"), build, inputs, &mut rng, corrupt_op == Some(op))?);
        }
    }
    for (r, c) in [(1usize, 1usize), (3, 2), (5, 4)] {
        let inputs = vec![random_tensor(&mut rng, &[r, c], 1.0), random_tensor(&mut rng, &[c], 1.0)];
        let build: &Build = &|t, x| t.matvec(x[0], x[1]);
        checks.push(check_function("matvec", format!("[{r}x{c}]"), build, inputs, &mut rng, corrupt_op == Some("matvec"))?);
    }
    for (hidden, output, steps) in [(2usize, 1usize, 3usize), (4, 2, 8), (6, 2, 16)] {
        checks.push(check_model(hidden, output, steps, &mut rng, corrupt_op == Some("lstm"))?);
    }
    Ok(GradcheckReport { checks })
}

fn check_model(hidden: usize, output: usize, steps: usize, rng: &mut ChaCha8Rng, corrupt: bool) -> Result<OpCheck> {
    let shape = LstmShape::new(1, hidden, output)?;
    let data: Vec<f64> = (0..shape.param_count()).map(|_| rng.random_range(-0.8..0.8)).collect();
    let params = ModelParams::from_vec(shape, data)?;
    let input: Vec<f64> = (0..steps).map(|_| rng.random_range(-1.0..1.0)).collect();
    let target: Vec<f64> = (0..output).map(|_| rng.random_range(-1.0..1.0)).collect();
    let x = window_tensor(&input)?;
    let y = Tensor::vector(target)?;

    let loss_at = |p: &ModelParams| -> Result<f64> {
        let mut tape = Tape::new();
        let b = ParamBindings::bind(&mut tape, p);
        let pred = lstm_forward(&mut tape, &b, &x)?;
        let t = tape.leaf(y.clone());
        let l = tape.mse(pred, t)?;
        Ok(tape.value(l).data()[0])
    };

    let mut tape = Tape::new();
    let b = ParamBindings::bind(&mut tape, &params);
    let pred = lstm_forward(&mut tape, &b, &x)?;
    let t = tape.leaf(y.clone());
    let loss = tape.mse(pred, t)?;
    let mut analytic = b.gather(&tape.backward(loss)?);
    if corrupt {
        analytic[0] = analytic[0] * 1.1 + 1e-3;
    }

    let mut worst: f64 = 0.0;
    for j in 0..params.len() {
        let shifted = |h: f64| {
            let mut d = params.as_slice().to_vec();
            d[j] += h;
            params.with_data(d)
        };
        let numeric = (loss_at(&shifted(STEP))? - loss_at(&shifted(-STEP))?) / (2.0 * STEP);
        worst = worst.max(relative_error(analytic[j], numeric));
    }
    Ok(OpCheck {
        op: "lstm".into(),
        shape: format!("hidden {hidden}, output {output}, {steps} steps, {} params", params.len()),
        max_rel_error: worst,
        passed: worst < TOLERANCE,
    })
}
