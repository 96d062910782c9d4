//! Operation tape and reverse sweep.
//!
//! Every op appends one node whose inputs already live on the tape, so node
//! order is a topological order and `backward` is a single reverse scan.

use std::cell::RefCell;
use std::fmt;

use super::matrix::{gemm, Matrix};
use crate::error::{Error, Result};

/// Reduction direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    /// Reduce everything to a `1 x 1` scalar.
    All,
    /// One value per row: `r x c -> r x 1`.
    PerRow,
    /// One value per column: `r x c -> 1 x c`.
    PerCol,
}

#[derive(Clone, Debug)]
enum Op {
    Leaf,
    MatMul(usize, usize),
    Transpose(usize),
    Add(usize, usize),
    Sub(usize, usize),
    Mul(usize, usize),
    Scale(usize, f64),
    AddScalar(usize),
    Relu(usize),
    LeakyRelu(usize, f64),
    MaxConst(usize, f64),
    MinConst(usize, f64),
    Abs(usize),
    Sum(usize, Axis),
    Mean(usize, Axis),
    RowMax(usize, Vec<usize>),
    Pick(usize, Vec<usize>),
    GatherRows(usize, Vec<usize>),
    L2Norm(usize),
}

struct Node {
    value: Matrix,
    grad: Option<Matrix>,
    op: Op,
    requires_grad: bool,
}

/// Records operations for one forward pass.
#[derive(Default)]
pub struct Tape {
    nodes: RefCell<Vec<Node>>,
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn leaf(&self, value: Matrix, requires_grad: bool) -> Tensor<'_> {
        self.push(value, Op::Leaf, requires_grad)
    }

    /// Trainable leaf.
    pub fn param(&self, value: Matrix) -> Tensor<'_> {
        self.leaf(value, true)
    }

    pub fn constant(&self, value: Matrix) -> Tensor<'_> {
        self.leaf(value, false)
    }

    fn push(&self, value: Matrix, op: Op, requires_grad: bool) -> Tensor<'_> {
        let mut nodes = self.nodes.borrow_mut();
        nodes.push(Node {
            value,
            grad: None,
            op,
            requires_grad,
        });
        Tensor {
            tape: self,
            id: nodes.len() - 1,
        }
    }
}

/// Handle to a node on a [`Tape`].
#[derive(Clone, Copy)]
pub struct Tensor<'t> {
    tape: &'t Tape,
    id: usize,
}

impl fmt::Debug for Tensor<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let nodes = self.tape.nodes.borrow();
        let node = &nodes[self.id];
        f.debug_struct("Tensor")
            .field("id", &self.id)
            .field("value", &node.value)
            .field("requires_grad", &node.requires_grad)
            .finish()
    }
}

fn broadcast_shape(a: (usize, usize), b: (usize, usize)) -> Option<(usize, usize)> {
    fn dim(x: usize, y: usize) -> Option<usize> {
        if x == y || y == 1 {
            Some(x)
        } else if x == 1 {
            Some(y)
        } else {
            None
        }
    }
    Some((dim(a.0, b.0)?, dim(a.1, b.1)?))
}

fn broadcast_binary(a: &Matrix, b: &Matrix, shape: (usize, usize), f: impl Fn(f64, f64) -> f64) -> Matrix {
    let (rows, cols) = shape;
    let mut out = Matrix::zeros(rows, cols);
    let data = out.data_mut();
    for r in 0..rows {
        let ar = if a.rows() == 1 { 0 } else { r };
        let br = if b.rows() == 1 { 0 } else { r };
        for c in 0..cols {
            let ac = if a.cols() == 1 { 0 } else { c };
            let bc = if b.cols() == 1 { 0 } else { c };
            data[r * cols + c] = f(a.get(ar, ac), b.get(br, bc));
        }
    }
    out
}

/// Sums `grad` down to `shape` over the broadcast dimensions.
fn unbroadcast(grad: Matrix, shape: (usize, usize)) -> Matrix {
    if grad.shape() == shape {
        return grad;
    }
    let mut out = Matrix::zeros(shape.0, shape.1);
    for r in 0..grad.rows() {
        let orow = if shape.0 == 1 { 0 } else { r };
        for c in 0..grad.cols() {
            let ocol = if shape.1 == 1 { 0 } else { c };
            let v = out.get(orow, ocol) + grad.get(r, c);
            out.set(orow, ocol, v);
        }
    }
    out
}

fn accumulate(slot: &mut Option<Matrix>, g: Matrix) {
    match slot {
        Some(acc) => acc.add_assign(&g),
        None => *slot = Some(g),
    }
}

fn argmax_lowest(row: &[f64]) -> usize {
    let mut best = 0;
    for (k, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = k;
        }
    }
    best
}

impl<'t> Tensor<'t> {
    pub fn id(&self) -> usize {
        self.id
    }

    pub fn tape(&self) -> &'t Tape {
        self.tape
    }

    pub fn shape(&self) -> (usize, usize) {
        self.tape.nodes.borrow()[self.id].value.shape()
    }

    pub fn requires_grad(&self) -> bool {
        self.tape.nodes.borrow()[self.id].requires_grad
    }

    pub fn value(&self) -> Matrix {
        self.tape.nodes.borrow()[self.id].value.clone()
    }

    pub fn with_value<R>(&self, f: impl FnOnce(&Matrix) -> R) -> R {
        f(&self.tape.nodes.borrow()[self.id].value)
    }

    /// Value of a `1 x 1` tensor.
    pub fn item(&self) -> f64 {
        self.with_value(|m| {
            assert_eq!(m.shape(), (1, 1), "item() on non-scalar tensor");
            m.get(0, 0)
        })
    }

    /// Gradient from the last `backward`, if this node received one.
    pub fn grad(&self) -> Option<Matrix> {
        self.tape.nodes.borrow()[self.id].grad.clone()
    }

    /// Copy of the value with no tape history.
    pub fn detach(&self) -> Tensor<'t> {
        self.tape.constant(self.value())
    }

    fn unary(&self, op: Op, f: impl Fn(&Matrix) -> Matrix) -> Tensor<'t> {
        let (value, rg) = {
            let nodes = self.tape.nodes.borrow();
            let n = &nodes[self.id];
            (f(&n.value), n.requires_grad)
        };
        self.tape.push(value, op, rg)
    }

    fn binary_broadcast(
        &self,
        other: Tensor<'t>,
        name: &'static str,
        op: Op,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Tensor<'t>> {
        let (value, rg) = {
            let nodes = self.tape.nodes.borrow();
            let (a, b) = (&nodes[self.id], &nodes[other.id]);
            let shape = broadcast_shape(a.value.shape(), b.value.shape()).ok_or_else(|| {
                Error::shape(
                    name,
                    format!("{:?} vs {:?}", a.value.shape(), b.value.shape()),
                )
            })?;
            (
                broadcast_binary(&a.value, &b.value, shape, f),
                a.requires_grad || b.requires_grad,
            )
        };
        Ok(self.tape.push(value, op, rg))
    }

    pub fn matmul(&self, other: Tensor<'t>) -> Result<Tensor<'t>> {
        let (value, rg) = {
            let nodes = self.tape.nodes.borrow();
            let (a, b) = (&nodes[self.id], &nodes[other.id]);
            (a.value.matmul(&b.value)?, a.requires_grad || b.requires_grad)
        };
        Ok(self.tape.push(value, Op::MatMul(self.id, other.id), rg))
    }

    pub fn transpose(&self) -> Tensor<'t> {
        self.unary(Op::Transpose(self.id), Matrix::transpose)
    }

    pub fn add(&self, other: Tensor<'t>) -> Result<Tensor<'t>> {
        self.binary_broadcast(other, "add", Op::Add(self.id, other.id), |a, b| a + b)
    }

    pub fn sub(&self, other: Tensor<'t>) -> Result<Tensor<'t>> {
        self.binary_broadcast(other, "sub", Op::Sub(self.id, other.id), |a, b| a - b)
    }

    pub fn mul(&self, other: Tensor<'t>) -> Result<Tensor<'t>> {
        self.binary_broadcast(other, "mul", Op::Mul(self.id, other.id), |a, b| a * b)
    }

    pub fn scale(&self, c: f64) -> Tensor<'t> {
        self.unary(Op::Scale(self.id, c), |m| m.map(|v| v * c))
    }

    pub fn add_scalar(&self, c: f64) -> Tensor<'t> {
        self.unary(Op::AddScalar(self.id), |m| m.map(|v| v + c))
    }

    pub fn relu(&self) -> Tensor<'t> {
        self.unary(Op::Relu(self.id), |m| m.map(|v| v.max(0.0)))
    }

    pub fn leaky_relu(&self, alpha: f64) -> Tensor<'t> {
        self.unary(Op::LeakyRelu(self.id, alpha), |m| {
            m.map(|v| if v > 0.0 { v } else { alpha * v })
        })
    }

    /// `max(x, c)` elementwise.
    pub fn max_const(&self, c: f64) -> Tensor<'t> {
        self.unary(Op::MaxConst(self.id, c), |m| {
            m.map(|v| if v > c { v } else { c })
        })
    }

    /// `min(x, c)` elementwise.
    pub fn min_const(&self, c: f64) -> Tensor<'t> {
        self.unary(Op::MinConst(self.id, c), |m| {
            m.map(|v| if v < c { v } else { c })
        })
    }

    pub fn abs(&self) -> Tensor<'t> {
        self.unary(Op::Abs(self.id), |m| m.map(f64::abs))
    }

    fn reduced_len(&self, axis: Axis) -> usize {
        let (r, c) = self.shape();
        match axis {
            Axis::All => r * c,
            Axis::PerRow => c,
            Axis::PerCol => r,
        }
    }

    /// Sum along `axis`. Summing over an empty axis gives zeros.
    pub fn sum(&self, axis: Axis) -> Tensor<'t> {
        self.unary(Op::Sum(self.id, axis), |m| reduce_sum(m, axis))
    }

    pub fn mean(&self, axis: Axis) -> Result<Tensor<'t>> {
        let n = self.reduced_len(axis);
        if n == 0 {
            return Err(Error::Domain("mean over an empty axis".into()));
        }
        Ok(self.unary(Op::Mean(self.id, axis), |m| {
            reduce_sum(m, axis).map(|v| v / n as f64)
        }))
    }

    /// Per-row maximum (`r x 1`). The subgradient goes to the lowest
    /// maximizing column.
    pub fn row_max(&self) -> Result<Tensor<'t>> {
        let idx = self.row_argmax()?;
        let value = self.with_value(|m| {
            let vals: Vec<f64> = idx.iter().enumerate().map(|(r, &k)| m.get(r, k)).collect();
            Matrix::from_vec(vals.len(), 1, vals).expect("row_max shape")
        });
        let rg = self.requires_grad();
        Ok(self.tape.push(value, Op::RowMax(self.id, idx), rg))
    }

    /// Per-row index of the maximum, lowest index on ties. Not recorded.
    pub fn row_argmax(&self) -> Result<Vec<usize>> {
        self.with_value(|m| {
            if m.cols() == 0 {
                return Err(Error::Domain("row_argmax over zero columns".into()));
            }
            Ok(m.iter_rows().map(argmax_lowest).collect())
        })
    }

    /// Per-row element `x[r, cols[r]]` as an `r x 1` tensor.
    pub fn pick(&self, cols: &[usize]) -> Result<Tensor<'t>> {
        let (r, c) = self.shape();
        if cols.len() != r {
            return Err(Error::shape("pick", format!("{} indices for {r} rows", cols.len())));
        }
        if let Some(&bad) = cols.iter().find(|&&k| k >= c) {
            return Err(Error::Domain(format!("column index {bad} out of range for width {c}")));
        }
        let value = self.with_value(|m| {
            let vals: Vec<f64> = cols.iter().enumerate().map(|(i, &k)| m.get(i, k)).collect();
            Matrix::from_vec(r, 1, vals).expect("pick shape")
        });
        let rg = self.requires_grad();
        Ok(self.tape.push(value, Op::Pick(self.id, cols.to_vec()), rg))
    }

    /// Rows `indices` in order; repeated indices accumulate gradient.
    pub fn gather_rows(&self, indices: &[usize]) -> Result<Tensor<'t>> {
        let r = self.shape().0;
        if let Some(&bad) = indices.iter().find(|&&i| i >= r) {
            return Err(Error::shape("gather_rows", format!("row {bad} of {r}")));
        }
        let value = self.with_value(|m| m.select_rows(indices));
        let rg = self.requires_grad();
        Ok(self.tape.push(value, Op::GatherRows(self.id, indices.to_vec()), rg))
    }

    /// Euclidean norm of the flattened values. The gradient at the zero
    /// vector is zero.
    pub fn l2_norm(&self) -> Tensor<'t> {
        self.unary(Op::L2Norm(self.id), |m| Matrix::scalar(m.frobenius_norm()))
    }

    /// Reverse sweep from this scalar. Populates `grad` on every node that
    /// requires it; earlier gradients on the tape are cleared.
    pub fn backward(&self) -> Result<()> {
        let shape = self.shape();
        if shape != (1, 1) {
            return Err(Error::shape("backward", format!("loss must be 1x1, got {shape:?}")));
        }
        let mut grads: Vec<Option<Matrix>> = {
            let nodes = self.tape.nodes.borrow();
            let mut grads = vec![None; self.id + 1];
            if nodes[self.id].requires_grad {
                grads[self.id] = Some(Matrix::scalar(1.0));
            }
            for i in (0..=self.id).rev() {
                let Some(g) = grads[i].take() else { continue };
                propagate(&nodes, i, &g, &mut grads);
                grads[i] = Some(g);
            }
            grads
        };
        let mut nodes = self.tape.nodes.borrow_mut();
        for node in nodes.iter_mut() {
            node.grad = None;
        }
        for (node, g) in nodes.iter_mut().zip(grads.iter_mut()) {
            node.grad = g.take();
        }
        Ok(())
    }
}

fn reduce_sum(m: &Matrix, axis: Axis) -> Matrix {
    match axis {
        Axis::All => Matrix::scalar(m.sum()),
        Axis::PerRow => {
            let vals: Vec<f64> = m.iter_rows().map(|r| r.iter().sum()).collect();
            Matrix::from_vec(m.rows(), 1, vals).expect("sum shape")
        }
        Axis::PerCol => {
            let mut out = Matrix::zeros(1, m.cols());
            for row in m.iter_rows() {
                for (o, v) in out.data_mut().iter_mut().zip(row) {
                    *o += v;
                }
            }
            out
        }
    }
}

/// Spreads an upstream gradient of a reduction back over the input shape.
fn expand_reduced(g: &Matrix, shape: (usize, usize), axis: Axis, factor: f64) -> Matrix {
    let mut out = Matrix::zeros(shape.0, shape.1);
    for r in 0..shape.0 {
        for c in 0..shape.1 {
            let v = match axis {
                Axis::All => g.get(0, 0),
                Axis::PerRow => g.get(r, 0),
                Axis::PerCol => g.get(0, c),
            };
            out.set(r, c, v * factor);
        }
    }
    out
}

fn masked(g: &Matrix, x: &Matrix, deriv: impl Fn(f64) -> f64) -> Matrix {
    let mut out = g.clone();
    for (o, &v) in out.data_mut().iter_mut().zip(x.data()) {
        *o *= deriv(v);
    }
    out
}

fn propagate(nodes: &[Node], i: usize, g: &Matrix, grads: &mut [Option<Matrix>]) {
    let wants = |j: usize| nodes[j].requires_grad;
    match &nodes[i].op {
        Op::Leaf => {}
        &Op::MatMul(a, b) => {
            let (av, bv) = (&nodes[a].value, &nodes[b].value);
            if wants(a) {
                let mut da = Matrix::zeros(av.rows(), av.cols());
                gemm(1.0, g, false, bv, true, 0.0, &mut da);
                accumulate(&mut grads[a], da);
            }
            if wants(b) {
                let mut db = Matrix::zeros(bv.rows(), bv.cols());
                gemm(1.0, av, true, g, false, 0.0, &mut db);
                accumulate(&mut grads[b], db);
            }
        }
        &Op::Transpose(a) => accumulate(&mut grads[a], g.transpose()),
        &Op::Add(a, b) | &Op::Sub(a, b) => {
            let sign = if matches!(nodes[i].op, Op::Sub(..)) { -1.0 } else { 1.0 };
            if wants(a) {
                accumulate(&mut grads[a], unbroadcast(g.clone(), nodes[a].value.shape()));
            }
            if wants(b) {
                let gb = if sign < 0.0 { g.map(|v| -v) } else { g.clone() };
                accumulate(&mut grads[b], unbroadcast(gb, nodes[b].value.shape()));
            }
        }
        &Op::Mul(a, b) => {
            let (av, bv) = (&nodes[a].value, &nodes[b].value);
            if wants(a) {
                let ga = broadcast_binary(g, bv, g.shape(), |x, y| x * y);
                accumulate(&mut grads[a], unbroadcast(ga, av.shape()));
            }
            if wants(b) {
                let gb = broadcast_binary(g, av, g.shape(), |x, y| x * y);
                accumulate(&mut grads[b], unbroadcast(gb, bv.shape()));
            }
        }
        &Op::Scale(a, c) => accumulate(&mut grads[a], g.map(|v| v * c)),
        &Op::AddScalar(a) => accumulate(&mut grads[a], g.clone()),
        &Op::Relu(a) => {
            let d = masked(g, &nodes[a].value, |x| if x > 0.0 { 1.0 } else { 0.0 });
            accumulate(&mut grads[a], d);
        }
        &Op::LeakyRelu(a, alpha) => {
            let d = masked(g, &nodes[a].value, |x| if x > 0.0 { 1.0 } else { alpha });
            accumulate(&mut grads[a], d);
        }
        &Op::MaxConst(a, c) => {
            let d = masked(g, &nodes[a].value, |x| if x > c { 1.0 } else { 0.0 });
            accumulate(&mut grads[a], d);
        }
        &Op::MinConst(a, c) => {
            let d = masked(g, &nodes[a].value, |x| if x < c { 1.0 } else { 0.0 });
            accumulate(&mut grads[a], d);
        }
        &Op::Abs(a) => {
            let d = masked(g, &nodes[a].value, |x| {
                if x > 0.0 {
                    1.0
                } else if x < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            });
            accumulate(&mut grads[a], d);
        }
        &Op::Sum(a, axis) => {
            let d = expand_reduced(g, nodes[a].value.shape(), axis, 1.0);
            accumulate(&mut grads[a], d);
        }
        &Op::Mean(a, axis) => {
            let shape = nodes[a].value.shape();
            let n = match axis {
                Axis::All => shape.0 * shape.1,
                Axis::PerRow => shape.1,
                Axis::PerCol => shape.0,
            };
            let d = expand_reduced(g, shape, axis, 1.0 / n as f64);
            accumulate(&mut grads[a], d);
        }
        Op::RowMax(a, cols) | Op::Pick(a, cols) => {
            let a = *a;
            let (r, c) = nodes[a].value.shape();
            let mut d = Matrix::zeros(r, c);
            for (row, &k) in cols.iter().enumerate() {
                d.set(row, k, g.get(row, 0));
            }
            accumulate(&mut grads[a], d);
        }
        Op::GatherRows(a, rows) => {
            let a = *a;
            let (r, c) = nodes[a].value.shape();
            let mut d = Matrix::zeros(r, c);
            for (k, &src) in rows.iter().enumerate() {
                for (o, v) in d.row_mut(src).iter_mut().zip(g.row(k)) {
                    *o += v;
                }
            }
            accumulate(&mut grads[a], d);
        }
        &Op::L2Norm(a) => {
            let norm = nodes[i].value.get(0, 0);
            let av = &nodes[a].value;
            let d = if norm == 0.0 {
                Matrix::zeros(av.rows(), av.cols())
            } else {
                let s = g.get(0, 0) / norm;
                av.map(|v| v * s)
            };
            accumulate(&mut grads[a], d);
        }
    }
}
