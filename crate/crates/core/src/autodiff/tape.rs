use crate::graph::SparseAdjacency;
use crate::rng::CounterRng;
use crate::{Error, Matrix, Result};
use std::sync::Arc;

/// Floating-point storage mode for forward values.
///
/// `F32` rounds every forward result to single precision; gradients are
/// still accumulated in 64-bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Precision {
    #[default]
    F64,
    F32,
}

/// Handle to a tensor recorded on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var {
    id: usize,
    rows: usize,
    cols: usize,
}

impl Var {
    pub fn id(&self) -> usize {
        self.id
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_scalar(&self) -> bool {
        self.rows == 1 && self.cols == 1
    }
}

#[derive(Debug)]
enum Op {
    Leaf,
    MatMul(Var, Var),
    Spmm(Arc<SparseAdjacency>, Var),
    Relu(Var),
    Sigmoid(Var),
    Clamp01(Var),
    Scale(Var, f64),
    /// `s[idx] · x`, with `s` a row vector.
    ScaleByEntry { x: Var, s: Var, idx: usize },
    Add(Var, Var),
    /// `μ·a + (1 − μ)·b`.
    AffineCombine { mu: Var, a: Var, b: Var },
    ConcatCols(Var, Var),
    Sum(Var),
    Dropout { x: Var, mask: Vec<f64> },
    SoftmaxCrossEntropy { logits: Var, probs: Matrix, labels: Vec<usize>, rows: Vec<usize> },
    L2 { params: Vec<Var>, lambda: f64 },
}

impl Op {
    fn inputs(&self) -> Vec<Var> {
        match self {
            Op::Leaf => Vec::new(),
            Op::MatMul(a, b) | Op::Add(a, b) | Op::ConcatCols(a, b) => vec![*a, *b],
            Op::Spmm(_, x)
            | Op::Relu(x)
            | Op::Sigmoid(x)
            | Op::Clamp01(x)
            | Op::Scale(x, _)
            | Op::Sum(x)
            | Op::Dropout { x, .. } => vec![*x],
            Op::ScaleByEntry { x, s, .. } => vec![*x, *s],
            Op::AffineCombine { mu, a, b } => vec![*mu, *a, *b],
            Op::SoftmaxCrossEntropy { logits, .. } => vec![*logits],
            Op::L2 { params, .. } => params.clone(),
        }
    }
}

#[derive(Debug)]
struct Node {
    value: Matrix,
    op: Op,
    requires_grad: bool,
}

/// Append-only record of a forward computation. Node order is a topological
/// order; [`Tape::backward`] walks it in reverse.
#[derive(Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
    precision: Precision,
}

/// Gradients of one backward pass, indexed by [`Var`].
#[derive(Debug, Clone)]
pub struct Gradients {
    grads: Vec<Option<Matrix>>,
}

impl Gradients {
    /// Gradient of `v`; `None` only for tensors that do not require one.
    pub fn get(&self, v: Var) -> Option<&Matrix> {
        self.grads.get(v.id).and_then(Option::as_ref)
    }

    /// Gradient of `v`, or zeros of its shape.
    pub fn get_or_zeros(&self, v: Var) -> Matrix {
        self.get(v).cloned().unwrap_or_else(|| Matrix::zeros(v.rows, v.cols))
    }
}

fn shape_err(op: &str, a: Var, b: Var) -> Error {
    Error::Shape(format!(
        "{op}: {}x{} vs {}x{}",
        a.rows, a.cols, b.rows, b.cols
    ))
}

impl Tape {
    pub fn new() -> Self {
        Tape::default()
    }

    pub fn with_precision(precision: Precision) -> Self {
        Tape {
            nodes: Vec::new(),
            precision,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &Matrix {
        &self.nodes[v.id].value
    }

    pub fn requires_grad(&self, v: Var) -> bool {
        self.nodes[v.id].requires_grad
    }

    fn push(&mut self, mut value: Matrix, op: Op) -> Result<Var> {
        if self.precision == Precision::F32 {
            value.data_mut().iter_mut().for_each(|x| *x = *x as f32 as f64);
        }
        if !value.is_finite() {
            return Err(Error::Numeric(format!(
                "non-finite value produced by {}",
                op_name(&op)
            )));
        }
        let requires_grad = op.inputs().iter().any(|v| self.nodes[v.id].requires_grad);
        let (rows, cols) = value.shape();
        let id = self.nodes.len();
        self.nodes.push(Node {
            value,
            op,
            requires_grad,
        });
        Ok(Var { id, rows, cols })
    }

    /// Records an input tensor.
    pub fn leaf(&mut self, value: Matrix, requires_grad: bool) -> Result<Var> {
        let v = self.push(value, Op::Leaf)?;
        self.nodes[v.id].requires_grad = requires_grad;
        Ok(v)
    }

    pub fn constant(&mut self, value: Matrix) -> Result<Var> {
        self.leaf(value, false)
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        if a.cols != b.rows {
            return Err(shape_err("matmul", a, b));
        }
        let out = self.value(a).matmul(self.value(b))?;
        self.push(out, Op::MatMul(a, b))
    }

    /// `S · x` for a constant sparse `S`; only `x` receives gradient.
    pub fn spmm(&mut self, s: &Arc<SparseAdjacency>, x: Var) -> Result<Var> {
        let out = s.spmm(self.value(x))?;
        self.push(out, Op::Spmm(Arc::clone(s), x))
    }

    pub fn relu(&mut self, x: Var) -> Result<Var> {
        let out = self.value(x).map(|v| if v > 0.0 { v } else { 0.0 });
        self.push(out, Op::Relu(x))
    }

    pub fn sigmoid(&mut self, x: Var) -> Result<Var> {
        let out = self.value(x).map(|v| 1.0 / (1.0 + (-v).exp()));
        self.push(out, Op::Sigmoid(x))
    }

    /// Elementwise clamp to `[0, 1]`; gradient passes only strictly inside.
    pub fn clamp01(&mut self, x: Var) -> Result<Var> {
        let out = self.value(x).map(|v| v.clamp(0.0, 1.0));
        self.push(out, Op::Clamp01(x))
    }

    pub fn scale(&mut self, x: Var, c: f64) -> Result<Var> {
        let out = self.value(x).scale(c);
        self.push(out, Op::Scale(x, c))
    }

    /// `s[0, idx] · x` where `s` is a row vector of coefficients.
    pub fn scale_by_entry(&mut self, x: Var, s: Var, idx: usize) -> Result<Var> {
        if s.rows != 1 || idx >= s.cols {
            return Err(Error::Shape(format!(
                "coefficient index {idx} into a {}x{} tensor",
                s.rows, s.cols
            )));
        }
        let c = self.value(s).get(0, idx);
        let out = self.value(x).scale(c);
        self.push(out, Op::ScaleByEntry { x, s, idx })
    }

    /// `c · x` for a 1×1 tensor `c`.
    pub fn scale_by(&mut self, x: Var, c: Var) -> Result<Var> {
        if !c.is_scalar() {
            return Err(shape_err("scale_by", x, c));
        }
        self.scale_by_entry(x, c, 0)
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        if a.shape() != b.shape() {
            return Err(shape_err("add", a, b));
        }
        let out = self.value(a).zip_map(self.value(b), |x, y| x + y)?;
        self.push(out, Op::Add(a, b))
    }

    /// `μ·a + (1 − μ)·b` with a 1×1 `μ`.
    pub fn affine_combine(&mut self, mu: Var, a: Var, b: Var) -> Result<Var> {
        if !mu.is_scalar() {
            return Err(Error::Shape("affine_combine needs a 1x1 mixing weight".into()));
        }
        if a.shape() != b.shape() {
            return Err(shape_err("affine_combine", a, b));
        }
        let m = self.value(mu).get(0, 0);
        let out = self
            .value(a)
            .zip_map(self.value(b), |x, y| m * x + (1.0 - m) * y)?;
        self.push(out, Op::AffineCombine { mu, a, b })
    }

    pub fn concat_cols(&mut self, a: Var, b: Var) -> Result<Var> {
        if a.rows != b.rows {
            return Err(shape_err("concat_cols", a, b));
        }
        let (va, vb) = (self.value(a), self.value(b));
        let out = Matrix::from_fn(a.rows, a.cols + b.cols, |i, j| {
            if j < a.cols {
                va.get(i, j)
            } else {
                vb.get(i, j - a.cols)
            }
        });
        self.push(out, Op::ConcatCols(a, b))
    }

    pub fn sum(&mut self, x: Var) -> Result<Var> {
        let out = Matrix::scalar(self.value(x).sum());
        self.push(out, Op::Sum(x))
    }

    /// Inverted dropout. Identity (no node recorded) when not training or `p == 0`.
    pub fn dropout(&mut self, x: Var, p: f64, rng: &mut CounterRng, training: bool) -> Result<Var> {
        if !(0.0..1.0).contains(&p) {
            return Err(Error::Config(format!("dropout rate {p} outside [0, 1)")));
        }
        if !training || p == 0.0 {
            return Ok(x);
        }
        let keep = 1.0 / (1.0 - p);
        let mask: Vec<f64> = (0..x.rows * x.cols)
            .map(|_| if rng.next_f64() < p { 0.0 } else { keep })
            .collect();
        let mut out = self.value(x).clone();
        for (o, m) in out.data_mut().iter_mut().zip(&mask) {
            *o *= m;
        }
        self.push(out, Op::Dropout { x, mask })
    }

    /// Mean over `rows` of `−log softmax(logits)[row, label]`.
    pub fn softmax_cross_entropy(&mut self, logits: Var, labels: &[usize], rows: &[usize]) -> Result<Var> {
        if rows.is_empty() {
            return Err(Error::Data("cross-entropy over an empty mask".into()));
        }
        if labels.len() != logits.rows {
            return Err(Error::Shape(format!(
                "{} labels for {} logit rows",
                labels.len(),
                logits.rows
            )));
        }
        let z = self.value(logits);
        let c = logits.cols;
        let mut probs = Matrix::zeros(rows.len(), c);
        let mut loss = 0.0;
        for (r, &i) in rows.iter().enumerate() {
            let y = labels[i];
            if y >= c {
                return Err(Error::OutOfRange { index: y, bound: c });
            }
            let row = z.row(i);
            let max = row.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
            let sum_exp: f64 = row.iter().map(|&v| (v - max).exp()).sum();
            let log_z = max + sum_exp.ln();
            loss += log_z - row[y];
            for (p, &v) in probs.row_mut(r).iter_mut().zip(row) {
                *p = (v - log_z).exp();
            }
        }
        let out = Matrix::scalar(loss / rows.len() as f64);
        self.push(
            out,
            Op::SoftmaxCrossEntropy {
                logits,
                probs,
                labels: rows.iter().map(|&i| labels[i]).collect(),
                rows: rows.to_vec(),
            },
        )
    }

    /// `λ · Σ ‖P‖²_F`.
    pub fn l2_penalty(&mut self, params: &[Var], lambda: f64) -> Result<Var> {
        if lambda < 0.0 || !lambda.is_finite() {
            return Err(Error::Config(format!("l2 coefficient {lambda} must be >= 0")));
        }
        let total: f64 = params
            .iter()
            .map(|&p| self.value(p).data().iter().map(|v| v * v).sum::<f64>())
            .sum();
        self.push(
            Matrix::scalar(lambda * total),
            Op::L2 {
                params: params.to_vec(),
                lambda,
            },
        )
    }

    /// Reverse-mode sweep from a 1×1 `loss`. Every tensor that requires a
    /// gradient receives one, zero when it does not influence the loss.
    pub fn backward(&self, loss: Var) -> Result<Gradients> {
        if !loss.is_scalar() {
            return Err(Error::Shape(format!(
                "backward needs a 1x1 root, got {}x{}",
                loss.rows, loss.cols
            )));
        }
        let mut grads: Vec<Option<Matrix>> = vec![None; self.nodes.len()];
        grads[loss.id] = Some(Matrix::scalar(1.0));
        for id in (0..=loss.id).rev() {
            let node = &self.nodes[id];
            if !node.requires_grad {
                continue;
            }
            let Some(g) = grads[id].take() else {
                continue;
            };
            self.propagate(node, &g, &mut grads)?;
            grads[id] = Some(g);
        }
        for (id, node) in self.nodes.iter().enumerate() {
            if node.requires_grad && grads[id].is_none() {
                let (r, c) = node.value.shape();
                grads[id] = Some(Matrix::zeros(r, c));
            }
            if !node.requires_grad {
                grads[id] = None;
            }
        }
        Ok(Gradients { grads })
    }

    fn propagate(&self, node: &Node, g: &Matrix, grads: &mut [Option<Matrix>]) -> Result<()> {
        let mut acc = |v: Var, contrib: Matrix| -> Result<()> {
            if !self.nodes[v.id].requires_grad {
                return Ok(());
            }
            match &mut grads[v.id] {
                Some(existing) => existing.add_assign(&contrib),
                slot @ None => {
                    *slot = Some(contrib);
                    Ok(())
                }
            }
        };
        let needs = |v: Var| self.nodes[v.id].requires_grad;
        match &node.op {
            Op::Leaf => {}
            Op::MatMul(a, b) => {
                if needs(*a) {
                    acc(*a, g.matmul_nt(self.value(*b))?)?;
                }
                if needs(*b) {
                    acc(*b, self.value(*a).matmul_tn(g)?)?;
                }
            }
            Op::Spmm(s, x) => acc(*x, s.spmm_transpose(g)?)?,
            Op::Relu(x) => {
                let mask = self.value(*x);
                acc(*x, g.zip_map(mask, |gi, xi| if xi > 0.0 { gi } else { 0.0 })?)?;
            }
            Op::Sigmoid(x) => {
                acc(*x, g.zip_map(&node.value, |gi, s| gi * s * (1.0 - s))?)?;
            }
            Op::Clamp01(x) => {
                let input = self.value(*x);
                acc(*x, g.zip_map(input, |gi, v| if v > 0.0 && v < 1.0 { gi } else { 0.0 })?)?;
            }
            Op::Scale(x, c) => acc(*x, g.scale(*c))?,
            Op::ScaleByEntry { x, s, idx } => {
                let c = self.value(*s).get(0, *idx);
                if needs(*x) {
                    acc(*x, g.scale(c))?;
                }
                if needs(*s) {
                    let mut ds = Matrix::zeros(1, s.cols);
                    ds.set(0, *idx, g.dot(self.value(*x)));
                    acc(*s, ds)?;
                }
            }
            Op::Add(a, b) => {
                acc(*a, g.clone())?;
                acc(*b, g.clone())?;
            }
            Op::AffineCombine { mu, a, b } => {
                let m = self.value(*mu).get(0, 0);
                if needs(*mu) {
                    let diff = self.value(*a).zip_map(self.value(*b), |x, y| x - y)?;
                    acc(*mu, Matrix::scalar(g.dot(&diff)))?;
                }
                acc(*a, g.scale(m))?;
                acc(*b, g.scale(1.0 - m))?;
            }
            Op::ConcatCols(a, b) => {
                if needs(*a) {
                    acc(*a, Matrix::from_fn(a.rows, a.cols, |i, j| g.get(i, j)))?;
                }
                if needs(*b) {
                    acc(*b, Matrix::from_fn(b.rows, b.cols, |i, j| g.get(i, j + a.cols)))?;
                }
            }
            Op::Sum(x) => acc(*x, Matrix::filled(x.rows, x.cols, g.get(0, 0)))?,
            Op::Dropout { x, mask } => {
                let mut d = g.clone();
                for (di, m) in d.data_mut().iter_mut().zip(mask) {
                    *di *= m;
                }
                acc(*x, d)?;
            }
            Op::SoftmaxCrossEntropy {
                logits,
                probs,
                labels,
                rows,
            } => {
                let scale = g.get(0, 0) / rows.len() as f64;
                let mut d = Matrix::zeros(logits.rows, logits.cols);
                for (r, (&i, &y)) in rows.iter().zip(labels).enumerate() {
                    let out = d.row_mut(i);
                    for (o, &p) in out.iter_mut().zip(probs.row(r)) {
                        *o += scale * p;
                    }
                    out[y] -= scale;
                }
                acc(*logits, d)?;
            }
            Op::L2 { params, lambda } => {
                let c = 2.0 * lambda * g.get(0, 0);
                for &p in params {
                    if needs(p) {
                        acc(p, self.value(p).scale(c))?;
                    }
                }
            }
        }
        Ok(())
    }
}

fn op_name(op: &Op) -> &'static str {
    match op {
        Op::Leaf => "leaf",
        Op::MatMul(..) => "matmul",
        Op::Spmm(..) => "spmm",
        Op::Relu(_) => "relu",
        Op::Sigmoid(_) => "sigmoid",
        Op::Clamp01(_) => "clamp",
        Op::Scale(..) => "scale",
        Op::ScaleByEntry { .. } => "scale_by_entry",
        Op::Add(..) => "add",
        Op::AffineCombine { .. } => "affine_combine",
        Op::ConcatCols(..) => "concat",
        Op::Sum(_) => "sum",
        Op::Dropout { .. } => "dropout",
        Op::SoftmaxCrossEntropy { .. } => "softmax_cross_entropy",
        Op::L2 { .. } => "l2_penalty",
    }
}
