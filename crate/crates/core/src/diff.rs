//! Dense 2-D tensors and reverse-mode differentiation over a tape.
//!
//! A [`Tape`] owns every tensor that takes part in a computation. Leaves are
//! registered with [`Tape::param`] (differentiable) or [`Tape::constant`];
//! each operation appends a node holding its output value and the handles of
//! its inputs, so the node list is always in topological order.
//! [`Tape::backward`] walks the list once in reverse and accumulates
//! `d(output)/d(leaf)` into the leaf gradients. Leaf gradients are summed
//! across calls until [`Tape::zero_grads`] clears them, which is what lets a
//! parameter reused at every step of a recurrence collect all of its
//! contributions.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::{Error, Result};

/// Row-major dense matrix of `f64`.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Tensor {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Tensor {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::contract(alloc::format!(
                "tensor shape must be at least 1x1, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::contract(alloc::format!(
                "tensor {rows}x{cols} needs {} values, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Tensor { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::filled(rows, cols, 0.0)
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        assert!(rows > 0 && cols > 0, "tensor shape must be at least 1x1");
        Tensor { rows, cols, data: vec![value; rows * cols] }
    }

    pub fn scalar(value: f64) -> Self {
        Tensor { rows: 1, cols: 1, data: vec![value] }
    }

    /// Builds a tensor from equal-length rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            if r.as_ref().len() != cols {
                return Err(Error::contract(alloc::format!(
                    "row {i} has {} values, expected {cols}",
                    r.as_ref().len()
                )));
            }
            data.extend_from_slice(r.as_ref());
        }
        Self::new(rows.len(), cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// Value of a 1x1 tensor.
    pub fn item(&self) -> Option<f64> {
        (self.rows == 1 && self.cols == 1).then(|| self.data[0])
    }

    pub fn transpose(&self) -> Tensor {
        let mut out = vec![0.0; self.data.len()];
        for r in 0..self.rows {
            for c in 0..self.cols {
                out[c * self.rows + r] = self.data[r * self.cols + c];
            }
        }
        Tensor { rows: self.cols, cols: self.rows, data: out }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    fn map(&self, f: impl Fn(f64) -> f64) -> Tensor {
        Tensor { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&v| f(v)).collect() }
    }

    fn zip(&self, other: &Tensor, f: impl Fn(f64, f64) -> f64) -> Tensor {
        debug_assert_eq!(self.shape(), other.shape());
        Tensor {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    fn add_assign(&mut self, other: &Tensor) {
        debug_assert_eq!(self.shape(), other.shape());
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }
}

/// `a (m x k) * b (k x n)`; callers check shapes.
fn matmul_raw(a: &Tensor, b: &Tensor) -> Tensor {
    let (m, k, n) = (a.rows, a.cols, b.cols);
    let mut out = vec![0.0; m * n];
    for i in 0..m {
        let out_row = &mut out[i * n..(i + 1) * n];
        for p in 0..k {
            let aip = a.data[i * k + p];
            if aip == 0.0 {
                continue;
            }
            let b_row = &b.data[p * n..(p + 1) * n];
            for (o, &bv) in out_row.iter_mut().zip(b_row) {
                *o += aip * bv;
            }
        }
    }
    Tensor { rows: m, cols: n, data: out }
}

/// `aᵀ * b` without materializing the transpose.
fn matmul_tn(a: &Tensor, b: &Tensor) -> Tensor {
    let (k, m, n) = (a.rows, a.cols, b.cols);
    let mut out = vec![0.0; m * n];
    for p in 0..k {
        let b_row = &b.data[p * n..(p + 1) * n];
        for i in 0..m {
            let api = a.data[p * m + i];
            if api == 0.0 {
                continue;
            }
            let out_row = &mut out[i * n..(i + 1) * n];
            for (o, &bv) in out_row.iter_mut().zip(b_row) {
                *o += api * bv;
            }
        }
    }
    Tensor { rows: m, cols: n, data: out }
}

/// `a * bᵀ`.
fn matmul_nt(a: &Tensor, b: &Tensor) -> Tensor {
    let (m, k, n) = (a.rows, a.cols, b.rows);
    let mut out = vec![0.0; m * n];
    for i in 0..m {
        let a_row = &a.data[i * k..(i + 1) * k];
        for j in 0..n {
            let b_row = &b.data[j * k..(j + 1) * k];
            out[i * n + j] = a_row.iter().zip(b_row).map(|(x, y)| x * y).sum();
        }
    }
    Tensor { rows: m, cols: n, data: out }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + libm::exp(-x))
    } else {
        let e = libm::exp(x);
        e / (1.0 + e)
    }
}

/// Operation kinds understood by [`Tape::apply`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OpKind {
    MatMul,
    /// Elementwise sum; the right operand may be a `1 x cols` bias that is
    /// broadcast over rows.
    Add,
    /// Elementwise difference, same broadcasting as [`OpKind::Add`].
    Sub,
    /// Elementwise product; the right operand may be a `rows x 1` column
    /// broadcast over columns.
    Mul,
    Sigmoid,
    Tanh,
    Relu,
    ConcatCols,
    SliceCols { start: usize, len: usize },
    /// Column means: `r x c` to `1 x c`.
    MeanRows,
    MeanAll,
    /// Softmax of each row independently.
    SoftmaxRows,
    ScalarMul(f64),
    Square,
}

impl fmt::Display for OpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            OpKind::MatMul => "matmul",
            OpKind::Add => "add",
            OpKind::Sub => "subtract",
            OpKind::Mul => "elementwise-multiply",
            OpKind::Sigmoid => "sigmoid",
            OpKind::Tanh => "tanh",
            OpKind::Relu => "relu",
            OpKind::ConcatCols => "concat-columns",
            OpKind::SliceCols { .. } => "slice-columns",
            OpKind::MeanRows => "mean-rows",
            OpKind::MeanAll => "mean-all",
            OpKind::SoftmaxRows => "softmax-over-rows",
            OpKind::ScalarMul(_) => "scalar-multiply",
            OpKind::Square => "square",
        };
        f.write_str(name)
    }
}

/// Handle to a tensor recorded on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug)]
struct Node {
    value: Tensor,
    /// `None` for leaves.
    kind: Option<OpKind>,
    inputs: Vec<Var>,
    requires_grad: bool,
}

/// Single-owner record of a forward computation.
#[derive(Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
    grads: Vec<Option<Tensor>>,
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

    pub fn leaf(&mut self, value: Tensor, requires_grad: bool) -> Var {
        self.push(value, None, Vec::new(), requires_grad)
    }

    /// Differentiable leaf.
    pub fn param(&mut self, value: Tensor) -> Var {
        self.leaf(value, true)
    }

    pub fn constant(&mut self, value: Tensor) -> Var {
        self.leaf(value, false)
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    pub fn requires_grad(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }

    /// Accumulated gradient of a differentiable leaf, if any backward pass
    /// has reached it.
    pub fn grad(&self, v: Var) -> Option<&Tensor> {
        self.grads.get(v.0).and_then(|g| g.as_ref())
    }

    pub fn zero_grads(&mut self) {
        for g in &mut self.grads {
            *g = None;
        }
    }

    fn push(&mut self, value: Tensor, kind: Option<OpKind>, inputs: Vec<Var>, requires_grad: bool) -> Var {
        self.nodes.push(Node { value, kind, inputs, requires_grad });
        self.grads.push(None);
        Var(self.nodes.len() - 1)
    }

    /// Runs one operation and records it.
    pub fn apply(&mut self, kind: OpKind, inputs: &[Var]) -> Result<Var> {
        let arity_ok = match kind {
            OpKind::MatMul | OpKind::Add | OpKind::Sub | OpKind::Mul => inputs.len() == 2,
            OpKind::ConcatCols => !inputs.is_empty(),
            _ => inputs.len() == 1,
        };
        if !arity_ok {
            return Err(Error::contract(alloc::format!(
                "{kind} does not take {} input(s)",
                inputs.len()
            )));
        }
        let value = self.eval(kind, inputs)?;
        let requires_grad = inputs.iter().any(|v| self.nodes[v.0].requires_grad);
        Ok(self.push(value, Some(kind), inputs.to_vec(), requires_grad))
    }

    fn eval(&self, kind: OpKind, inputs: &[Var]) -> Result<Tensor> {
        let a = &self.nodes[inputs[0].0].value;
        let mismatch = |b: &Tensor| Error::Dimension { kind, lhs: a.shape(), rhs: b.shape() };
        let out = match kind {
            OpKind::MatMul => {
                let b = &self.nodes[inputs[1].0].value;
                if a.cols != b.rows {
                    return Err(mismatch(b));
                }
                matmul_raw(a, b)
            }
            OpKind::Add | OpKind::Sub => {
                let b = &self.nodes[inputs[1].0].value;
                let sign = if kind == OpKind::Add { 1.0 } else { -1.0 };
                if a.shape() == b.shape() {
                    a.zip(b, |x, y| x + sign * y)
                } else if b.rows == 1 && b.cols == a.cols {
                    let mut out = a.clone();
                    for row in out.data.chunks_mut(a.cols) {
                        for (o, y) in row.iter_mut().zip(&b.data) {
                            *o += sign * y;
                        }
                    }
                    out
                } else {
                    return Err(mismatch(b));
                }
            }
            OpKind::Mul => {
                let b = &self.nodes[inputs[1].0].value;
                if a.shape() == b.shape() {
                    a.zip(b, |x, y| x * y)
                } else if b.cols == 1 && b.rows == a.rows {
                    let mut out = a.clone();
                    for (row, s) in out.data.chunks_mut(a.cols).zip(&b.data) {
                        for o in row {
                            *o *= s;
                        }
                    }
                    out
                } else {
                    return Err(mismatch(b));
                }
            }
            OpKind::Sigmoid => a.map(sigmoid),
            OpKind::Tanh => a.map(libm::tanh),
            OpKind::Relu => a.map(|x| if x > 0.0 { x } else { 0.0 }),
            OpKind::ConcatCols => {
                let rows = a.rows;
                let mut cols = 0;
                for v in inputs {
                    let t = &self.nodes[v.0].value;
                    if t.rows != rows {
                        return Err(mismatch(t));
                    }
                    cols += t.cols;
                }
                let mut data = Vec::with_capacity(rows * cols);
                for r in 0..rows {
                    for v in inputs {
                        data.extend_from_slice(self.nodes[v.0].value.row(r));
                    }
                }
                Tensor { rows, cols, data }
            }
            OpKind::SliceCols { start, len } => {
                if len == 0 || start + len > a.cols {
                    return Err(Error::Dimension { kind, lhs: a.shape(), rhs: (start, len) });
                }
                let mut data = Vec::with_capacity(a.rows * len);
                for r in 0..a.rows {
                    data.extend_from_slice(&a.row(r)[start..start + len]);
                }
                Tensor { rows: a.rows, cols: len, data }
            }
            OpKind::MeanRows => {
                let mut data = vec![0.0; a.cols];
                for row in a.data.chunks(a.cols) {
                    for (o, x) in data.iter_mut().zip(row) {
                        *o += x;
                    }
                }
                let n = a.rows as f64;
                for o in &mut data {
                    *o /= n;
                }
                Tensor { rows: 1, cols: a.cols, data }
            }
            OpKind::MeanAll => Tensor::scalar(a.data.iter().sum::<f64>() / a.data.len() as f64),
            OpKind::SoftmaxRows => {
                let mut out = a.clone();
                for row in out.data.chunks_mut(a.cols) {
                    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    let mut total = 0.0;
                    for x in row.iter_mut() {
                        *x = libm::exp(*x - max);
                        total += *x;
                    }
                    for x in row.iter_mut() {
                        *x /= total;
                    }
                }
                out
            }
            OpKind::ScalarMul(s) => a.map(|x| s * x),
            OpKind::Square => a.map(|x| x * x),
        };
        Ok(out)
    }

    /// Propagates `d(output)/d(leaf)` into every differentiable leaf.
    pub fn backward(&mut self, output: Var) -> Result<()> {
        let shape = self.nodes[output.0].value.shape();
        if shape != (1, 1) {
            return Err(Error::contract(alloc::format!(
                "backward needs a 1x1 output, got {}x{}",
                shape.0,
                shape.1
            )));
        }
        let mut adjoint: Vec<Option<Tensor>> = vec![None; output.0 + 1];
        adjoint[output.0] = Some(Tensor::scalar(1.0));

        for i in (0..=output.0).rev() {
            let Some(g) = adjoint[i].take() else { continue };
            let node = &self.nodes[i];
            if !node.requires_grad {
                continue;
            }
            let Some(kind) = node.kind else {
                match &mut self.grads[i] {
                    Some(acc) => acc.add_assign(&g),
                    slot => *slot = Some(g),
                }
                continue;
            };
            let contributions = self.local_grads(kind, node, &g);
            for (input, grad) in node.inputs.iter().zip(contributions) {
                let Some(grad) = grad else { continue };
                match &mut adjoint[input.0] {
                    Some(acc) => acc.add_assign(&grad),
                    slot => *slot = Some(grad),
                }
            }
        }
        Ok(())
    }

    /// Vector-Jacobian products for each input of `node`; `None` where the
    /// input does not need a gradient.
    fn local_grads(&self, kind: OpKind, node: &Node, g: &Tensor) -> Vec<Option<Tensor>> {
        let needs = |v: &Var| self.nodes[v.0].requires_grad;
        let val = |v: &Var| &self.nodes[v.0].value;
        let y = &node.value;
        let ins = &node.inputs;
        match kind {
            OpKind::MatMul => {
                let (a, b) = (val(&ins[0]), val(&ins[1]));
                vec![
                    needs(&ins[0]).then(|| matmul_nt(g, b)),
                    needs(&ins[1]).then(|| matmul_tn(a, g)),
                ]
            }
            OpKind::Add | OpKind::Sub => {
                let sign = if kind == OpKind::Add { 1.0 } else { -1.0 };
                let b = val(&ins[1]);
                let db = needs(&ins[1]).then(|| {
                    if b.shape() == g.shape() {
                        g.map(|x| sign * x)
                    } else {
                        let mut sums = vec![0.0; g.cols];
                        for row in g.data.chunks(g.cols) {
                            for (s, x) in sums.iter_mut().zip(row) {
                                *s += sign * x;
                            }
                        }
                        Tensor { rows: 1, cols: g.cols, data: sums }
                    }
                });
                vec![needs(&ins[0]).then(|| g.clone()), db]
            }
            OpKind::Mul => {
                let (a, b) = (val(&ins[0]), val(&ins[1]));
                if a.shape() == b.shape() {
                    vec![
                        needs(&ins[0]).then(|| g.zip(b, |x, y| x * y)),
                        needs(&ins[1]).then(|| g.zip(a, |x, y| x * y)),
                    ]
                } else {
                    let da = needs(&ins[0]).then(|| {
                        let mut out = g.clone();
                        for (row, s) in out.data.chunks_mut(g.cols).zip(&b.data) {
                            for o in row {
                                *o *= s;
                            }
                        }
                        out
                    });
                    let db = needs(&ins[1]).then(|| {
                        let data = g
                            .data
                            .chunks(g.cols)
                            .zip(a.data.chunks(a.cols))
                            .map(|(gr, ar)| gr.iter().zip(ar).map(|(x, y)| x * y).sum())
                            .collect();
                        Tensor { rows: b.rows, cols: 1, data }
                    });
                    vec![da, db]
                }
            }
            OpKind::Sigmoid => vec![Some(g.zip(y, |gx, s| gx * s * (1.0 - s)))],
            OpKind::Tanh => vec![Some(g.zip(y, |gx, t| gx * (1.0 - t * t)))],
            OpKind::Relu => {
                let x = val(&ins[0]);
                vec![Some(g.zip(x, |gx, xv| if xv > 0.0 { gx } else { 0.0 }))]
            }
            OpKind::ConcatCols => {
                let mut offset = 0;
                ins.iter()
                    .map(|v| {
                        let cols = val(v).cols;
                        let start = offset;
                        offset += cols;
                        needs(v).then(|| {
                            let mut data = Vec::with_capacity(g.rows * cols);
                            for r in 0..g.rows {
                                data.extend_from_slice(&g.row(r)[start..start + cols]);
                            }
                            Tensor { rows: g.rows, cols, data }
                        })
                    })
                    .collect()
            }
            OpKind::SliceCols { start, len } => {
                let a = val(&ins[0]);
                let mut out = Tensor::zeros(a.rows, a.cols);
                for r in 0..a.rows {
                    out.data[r * a.cols + start..r * a.cols + start + len].copy_from_slice(g.row(r));
                }
                vec![Some(out)]
            }
            OpKind::MeanRows => {
                let a = val(&ins[0]);
                let n = a.rows as f64;
                let mut out = Tensor::zeros(a.rows, a.cols);
                for row in out.data.chunks_mut(a.cols) {
                    for (o, gx) in row.iter_mut().zip(&g.data) {
                        *o = gx / n;
                    }
                }
                vec![Some(out)]
            }
            OpKind::MeanAll => {
                let a = val(&ins[0]);
                vec![Some(Tensor::filled(a.rows, a.cols, g.data[0] / a.data.len() as f64))]
            }
            OpKind::SoftmaxRows => {
                let mut out = Tensor::zeros(y.rows, y.cols);
                for r in 0..y.rows {
                    let (yr, gr) = (y.row(r), g.row(r));
                    let dot: f64 = yr.iter().zip(gr).map(|(a, b)| a * b).sum();
                    for c in 0..y.cols {
                        out.data[r * y.cols + c] = yr[c] * (gr[c] - dot);
                    }
                }
                vec![Some(out)]
            }
            OpKind::ScalarMul(s) => vec![Some(g.map(|x| s * x))],
            OpKind::Square => {
                let a = val(&ins[0]);
                vec![Some(g.zip(a, |gx, x| 2.0 * x * gx))]
            }
        }
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.apply(OpKind::MatMul, &[a, b])
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.apply(OpKind::Add, &[a, b])
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        self.apply(OpKind::Sub, &[a, b])
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.apply(OpKind::Mul, &[a, b])
    }

    pub fn sigmoid(&mut self, a: Var) -> Result<Var> {
        self.apply(OpKind::Sigmoid, &[a])
    }

    pub fn tanh(&mut self, a: Var) -> Result<Var> {
        self.apply(OpKind::Tanh, &[a])
    }

    pub fn relu(&mut self, a: Var) -> Result<Var> {
        self.apply(OpKind::Relu, &[a])
    }

    pub fn concat_cols(&mut self, parts: &[Var]) -> Result<Var> {
        self.apply(OpKind::ConcatCols, parts)
    }

    pub fn slice_cols(&mut self, a: Var, start: usize, len: usize) -> Result<Var> {
        self.apply(OpKind::SliceCols { start, len }, &[a])
    }

    pub fn mean_rows(&mut self, a: Var) -> Result<Var> {
        self.apply(OpKind::MeanRows, &[a])
    }

    pub fn mean_all(&mut self, a: Var) -> Result<Var> {
        self.apply(OpKind::MeanAll, &[a])
    }

    pub fn softmax_rows(&mut self, a: Var) -> Result<Var> {
        self.apply(OpKind::SoftmaxRows, &[a])
    }

    pub fn scale(&mut self, a: Var, s: f64) -> Result<Var> {
        self.apply(OpKind::ScalarMul(s), &[a])
    }

    pub fn square(&mut self, a: Var) -> Result<Var> {
        self.apply(OpKind::Square, &[a])
    }

    /// `1 - a`, elementwise.
    pub fn one_minus(&mut self, a: Var) -> Result<Var> {
        let (r, c) = self.value(a).shape();
        let ones = self.constant(Tensor::filled(r, c, 1.0));
        self.sub(ones, a)
    }
}

/// Compares reverse-mode gradients of `f` at `point` with central
/// differences of step `eps`.
///
/// Returns the largest `|analytic - numeric| / max(1, |analytic| + |numeric|)`
/// over every entry of every input.
pub fn grad_check<F>(f: F, point: &[Tensor], eps: f64) -> Result<f64>
where
    F: Fn(&mut Tape, &[Var]) -> Result<Var>,
{
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::contract(alloc::format!("grad_check step must be positive, got {eps}")));
    }
    let mut tape = Tape::new();
    let vars: Vec<Var> = point.iter().map(|t| tape.param(t.clone())).collect();
    let out = f(&mut tape, &vars)?;
    tape.backward(out)?;

    let eval = |inputs: &[Tensor]| -> Result<f64> {
        let mut t = Tape::new();
        let vs: Vec<Var> = inputs.iter().map(|x| t.constant(x.clone())).collect();
        let o = f(&mut t, &vs)?;
        t.value(o)
            .item()
            .ok_or_else(|| Error::contract("grad_check function must return a 1x1 tensor"))
    };

    let mut worst: f64 = 0.0;
    let mut probe: Vec<Tensor> = point.to_vec();
    for (p, var) in vars.iter().enumerate() {
        let zeros = Tensor::zeros(point[p].rows, point[p].cols);
        let analytic = tape.grad(*var).unwrap_or(&zeros).clone();
        for j in 0..point[p].len() {
            let x0 = point[p].data[j];
            probe[p].data[j] = x0 + eps;
            let up = eval(&probe)?;
            probe[p].data[j] = x0 - eps;
            let down = eval(&probe)?;
            probe[p].data[j] = x0;
            let numeric = (up - down) / (2.0 * eps);
            let a = analytic.data[j];
            let err = libm::fabs(a - numeric) / f64::max(1.0, libm::fabs(a) + libm::fabs(numeric));
            worst = worst.max(err);
        }
    }
    Ok(worst)
}
