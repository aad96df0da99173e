//! Tape-based reverse-mode differentiation.
//!
//! Every op appends a node holding its value and the ids of its operands.
//! [`Tape::backward`] walks the nodes in reverse, accumulating adjoints.

use super::Tensor;
use crate::error::{Error, Result};

/// Handle to a value recorded on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NodeId(usize);

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    Add(NodeId, NodeId),
    Sub(NodeId, NodeId),
    Mul(NodeId, NodeId),
    /// Matrix `[r, c]` times vector `[c]`.
    MatVec(NodeId, NodeId),
    Slice { src: NodeId, start: usize },
    Sigmoid(NodeId),
    Tanh(NodeId),
    Scale(NodeId, f64),
    Sum(NodeId),
    Mse(NodeId, NodeId),
}

#[derive(Debug, Clone)]
struct Node {
    value: Tensor,
    op: Op,
}

/// Records a computation for one backward pass.
#[derive(Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
    consumed: bool,
}

/// Adjoints of a scalar with respect to every recorded node.
#[derive(Debug)]
pub struct Gradients {
    grads: Vec<Option<Vec<f64>>>,
    shapes: Vec<usize>,
}

impl Gradients {
    /// `None` when the loss does not depend on `id`.
    pub fn get(&self, id: NodeId) -> Option<&[f64]> {
        self.grads.get(id.0).and_then(|g| g.as_deref())
    }

    /// Gradient for `id`, zeros if the loss does not depend on it.
    pub fn wrt(&self, id: NodeId) -> Vec<f64> {
        match self.get(id) {
            Some(g) => g.to_vec(),
            None => vec![0.0; self.shapes[id.0]],
        }
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn same_shape(a: &Tensor, b: &Tensor, op: &str) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::Shape(format!(
            "{op}: operand shapes {:?} and {:?} differ",
            a.shape(),
            b.shape()
        )));
    }
    Ok(())
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, value: Tensor, op: Op) -> NodeId {
        self.nodes.push(Node { value, op });
        NodeId(self.nodes.len() - 1)
    }

    fn node(&self, id: NodeId) -> Result<&Tensor> {
        self.nodes
            .get(id.0)
            .map(|n| &n.value)
            .ok_or(Error::Tape("node id does not belong to this tape"))
    }

    pub fn value(&self, id: NodeId) -> &Tensor {
        &self.nodes[id.0].value
    }

    /// Records an input or parameter.
    pub fn leaf(&mut self, value: Tensor) -> NodeId {
        self.push(value, Op::Leaf)
    }

    fn zip_with(&mut self, a: NodeId, b: NodeId, name: &str, f: impl Fn(f64, f64) -> f64, op: Op) -> Result<NodeId> {
        let (ta, tb) = (self.node(a)?, self.node(b)?);
        same_shape(ta, tb, name)?;
        let data = ta.data().iter().zip(tb.data()).map(|(x, y)| f(*x, *y)).collect();
        let value = Tensor::from_parts(ta.shape().to_vec(), data);
        Ok(self.push(value, op))
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        self.zip_with(a, b, "add", |x, y| x + y, Op::Add(a, b))
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        self.zip_with(a, b, "sub", |x, y| x - y, Op::Sub(a, b))
    }

    /// Elementwise product.
    pub fn mul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        self.zip_with(a, b, "mul", |x, y| x * y, Op::Mul(a, b))
    }

    pub fn matvec(&mut self, m: NodeId, v: NodeId) -> Result<NodeId> {
        let (tm, tv) = (self.node(m)?, self.node(v)?);
        if tm.shape().len() != 2 || tv.len() != tm.shape()[1] {
            return Err(Error::Shape(format!(
                "matvec: matrix {:?} cannot multiply vector {:?}",
                tm.shape(),
                tv.shape()
            )));
        }
        let rows = tm.shape()[0];
        let x = tv.data();
        let data = (0..rows)
            .map(|r| tm.row(r).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect();
        let value = Tensor::from_parts(vec![rows], data);
        Ok(self.push(value, Op::MatVec(m, v)))
    }

    /// Contiguous `len`-element slice of a flattened tensor.
    pub fn slice(&mut self, src: NodeId, start: usize, len: usize) -> Result<NodeId> {
        let t = self.node(src)?;
        if len == 0 || start + len > t.len() {
            return Err(Error::Shape(format!(
                "slice [{start}, {}) out of range for {} elements",
                start + len,
                t.len()
            )));
        }
        let value = Tensor::from_parts(vec![len], t.data()[start..start + len].to_vec());
        Ok(self.push(value, Op::Slice { src, start }))
    }

    pub fn sigmoid(&mut self, a: NodeId) -> Result<NodeId> {
        let t = self.node(a)?;
        let value = Tensor::from_parts(t.shape().to_vec(), t.data().iter().map(|&x| sigmoid(x)).collect());
        Ok(self.push(value, Op::Sigmoid(a)))
    }

    pub fn tanh(&mut self, a: NodeId) -> Result<NodeId> {
        let t = self.node(a)?;
        let value = Tensor::from_parts(t.shape().to_vec(), t.data().iter().map(|x| x.tanh()).collect());
        Ok(self.push(value, Op::Tanh(a)))
    }

    pub fn scale(&mut self, a: NodeId, c: f64) -> Result<NodeId> {
        let t = self.node(a)?;
        let value = Tensor::from_parts(t.shape().to_vec(), t.data().iter().map(|x| x * c).collect());
        Ok(self.push(value, Op::Scale(a, c)))
    }

    /// Sum of all elements, as a scalar.
    pub fn sum(&mut self, a: NodeId) -> Result<NodeId> {
        let t = self.node(a)?;
        let value = Tensor::from_parts(vec![1], vec![t.data().iter().sum()]);
        Ok(self.push(value, Op::Sum(a)))
    }

    /// Mean squared difference, as a scalar.
    pub fn mse(&mut self, pred: NodeId, target: NodeId) -> Result<NodeId> {
        let (tp, tt) = (self.node(pred)?, self.node(target)?);
        same_shape(tp, tt, "mse")?;
        let n = tp.len() as f64;
        let s: f64 = tp.data().iter().zip(tt.data()).map(|(p, t)| (p - t) * (p - t)).sum();
        let value = Tensor::from_parts(vec![1], vec![s / n]);
        Ok(self.push(value, Op::Mse(pred, target)))
    }

    /// Reverse pass from a scalar `loss`. The tape may not be differentiated
    /// again afterwards; use [`Tape::backward_retained`] to keep it.
    pub fn backward(&mut self, loss: NodeId) -> Result<Gradients> {
        if self.consumed {
            return Err(Error::Tape("tape already consumed by a backward pass"));
        }
        let grads = self.backward_retained(loss)?;
        self.consumed = true;
        Ok(grads)
    }

    /// Reverse pass that leaves the tape reusable.
    pub fn backward_retained(&self, loss: NodeId) -> Result<Gradients> {
        if self.nodes.is_empty() {
            return Err(Error::Tape("backward called before any forward pass"));
        }
        let lv = self.node(loss)?;
        if !lv.is_scalar() {
            return Err(Error::Shape(format!("backward needs a scalar loss, got shape {:?}", lv.shape())));
        }
        let mut grads: Vec<Option<Vec<f64>>> = vec![None; loss.0 + 1];
        grads[loss.0] = Some(vec![1.0]);

        fn slot(grads: &mut [Option<Vec<f64>>], id: NodeId, n: usize) -> &mut [f64] {
            grads[id.0].get_or_insert_with(|| vec![0.0; n])
        }

        for i in (0..=loss.0).rev() {
            let Some(g) = grads[i].take() else { continue };
            let node = &self.nodes[i];
            match node.op {
                Op::Leaf => {}
                Op::Add(a, b) => {
                    for id in [a, b] {
                        let ga = slot(&mut grads, id, g.len());
                        ga.iter_mut().zip(&g).for_each(|(x, y)| *x += y);
                    }
                }
                Op::Sub(a, b) => {
                    let ga = slot(&mut grads, a, g.len());
                    ga.iter_mut().zip(&g).for_each(|(x, y)| *x += y);
                    let gb = slot(&mut grads, b, g.len());
                    gb.iter_mut().zip(&g).for_each(|(x, y)| *x -= y);
                }
                Op::Mul(a, b) => {
                    let (va, vb) = (self.nodes[a.0].value.data(), self.nodes[b.0].value.data());
                    let ga = slot(&mut grads, a, g.len());
                    for ((x, gi), bi) in ga.iter_mut().zip(&g).zip(vb) {
                        *x += gi * bi;
                    }
                    let gb = slot(&mut grads, b, g.len());
                    for ((x, gi), ai) in gb.iter_mut().zip(&g).zip(va) {
                        *x += gi * ai;
                    }
                }
                Op::MatVec(m, v) => {
                    let tm = &self.nodes[m.0].value;
                    let tv = self.nodes[v.0].value.data();
                    let (rows, cols) = (tm.shape()[0], tm.shape()[1]);
                    let gm = slot(&mut grads, m, rows * cols);
                    for r in 0..rows {
                        let gr = g[r];
                        for (x, vc) in gm[r * cols..(r + 1) * cols].iter_mut().zip(tv) {
                            *x += gr * vc;
                        }
                    }
                    let gv = slot(&mut grads, v, cols);
                    for r in 0..rows {
                        let gr = g[r];
                        for (x, mrc) in gv.iter_mut().zip(tm.row(r)) {
                            *x += gr * mrc;
                        }
                    }
                }
                Op::Slice { src, start } => {
                    let gs = slot(&mut grads, src, self.nodes[src.0].value.len());
                    for (x, y) in gs[start..start + g.len()].iter_mut().zip(&g) {
                        *x += y;
                    }
                }
                Op::Sigmoid(a) => {
                    let out = node.value.data();
                    let ga = slot(&mut grads, a, g.len());
                    for ((x, gi), s) in ga.iter_mut().zip(&g).zip(out) {
                        *x += gi * s * (1.0 - s);
                    }
                }
                Op::Tanh(a) => {
                    let out = node.value.data();
                    let ga = slot(&mut grads, a, g.len());
                    for ((x, gi), t) in ga.iter_mut().zip(&g).zip(out) {
                        *x += gi * (1.0 - t * t);
                    }
                }
                Op::Scale(a, c) => {
                    let ga = slot(&mut grads, a, g.len());
                    ga.iter_mut().zip(&g).for_each(|(x, y)| *x += c * y);
                }
                Op::Sum(a) => {
                    let n = self.nodes[a.0].value.len();
                    let ga = slot(&mut grads, a, n);
                    ga.iter_mut().for_each(|x| *x += g[0]);
                }
                Op::Mse(p, t) => {
                    let (vp, vt) = (self.nodes[p.0].value.data(), self.nodes[t.0].value.data());
                    let k = 2.0 * g[0] / vp.len() as f64;
                    let gp = slot(&mut grads, p, vp.len());
                    for ((x, a), b) in gp.iter_mut().zip(vp).zip(vt) {
                        *x += k * (a - b);
                    }
                    let gt = slot(&mut grads, t, vt.len());
                    for ((x, a), b) in gt.iter_mut().zip(vp).zip(vt) {
                        *x -= k * (a - b);
                    }
                }
            }
            grads[i] = Some(g);
        }

        grads.resize(self.nodes.len(), None);
        Ok(Gradients {
            grads,
            shapes: self.nodes.iter().map(|n| n.value.len()).collect(),
        })
    }
}
