//! Tape-based reverse-mode automatic differentiation over [`Tensor`]s.
//!
//! Every operation appends a node holding its forward value and the ids of
//! its inputs. Nodes are only ever appended, so creation order is a
//! topological order and [`Tape::backward`] is a single reverse sweep.
//!
//! ```
//! use probreg_core::autodiff::{Tape, Tensor};
//!
//! let mut tape = Tape::<f64>::new();
//! let w = tape.param(Tensor::from_vec(1, 3, vec![1.0, -2.0, 0.5]).unwrap());
//! let sq = tape.square(w);
//! let loss = tape.mean(sq);
//! let grads = tape.backward(loss).unwrap();
//! // d/dw mean(w²) = 2w / n
//! assert_eq!(grads.get(w).unwrap().data(), &[2.0 / 3.0, -4.0 / 3.0, 1.0 / 3.0]);
//! ```

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::tensor::Tensor;

/// Handle to a node recorded on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone)]
enum Op<T> {
    Leaf,
    Affine { x: Var, w: Var, b: Var },
    Tanh(Var),
    Exp(Var),
    Log(Var),
    Softplus(Var),
    Square(Var),
    Neg(Var),
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    Div(Var, Var),
    MulScalar(Var, T),
    AddScalar(Var, T),
    ClampMin(Var, T),
    Sum(Var),
    Mean(Var),
    LogSumExp(Var),
    LogSoftmax(Var),
}

#[derive(Debug, Clone)]
struct Node<T> {
    value: Tensor<T>,
    op: Op<T>,
    requires_grad: bool,
}

/// Records a computation for later differentiation.
#[derive(Debug, Clone, Default)]
pub struct Tape<T> {
    nodes: Vec<Node<T>>,
}

/// Gradients of a scalar loss with respect to every node that depends on a
/// parameter. Entries are allocated only when some gradient reaches them.
#[derive(Debug, Clone)]
pub struct Gradients<T> {
    grads: Vec<Option<Tensor<T>>>,
}

impl<T: Scalar> Gradients<T> {
    pub fn get(&self, v: Var) -> Option<&Tensor<T>> {
        self.grads.get(v.0).and_then(Option::as_ref)
    }

    /// Gradient for `v`, or zeros shaped like `like` when nothing reached it.
    pub fn get_or_zeros(&self, v: Var, like: &Tensor<T>) -> Tensor<T> {
        self.get(v).cloned().unwrap_or_else(|| Tensor::zeros(like.rows(), like.cols()))
    }

    fn accumulate(&mut self, v: Var, contribution: Tensor<T>) {
        match &mut self.grads[v.0] {
            Some(g) => g.add_assign(&contribution),
            slot @ None => *slot = Some(contribution),
        }
    }
}

impl<T: Scalar> Tape<T> {
    pub fn new() -> Self {
        Self { nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Trainable leaf.
    pub fn param(&mut self, value: Tensor<T>) -> Var {
        self.push(value, Op::Leaf, true)
    }

    /// Leaf that receives no gradient.
    pub fn constant(&mut self, value: Tensor<T>) -> Var {
        self.push(value, Op::Leaf, false)
    }

    pub fn value(&self, v: Var) -> &Tensor<T> {
        &self.nodes[v.0].value
    }

    fn push(&mut self, value: Tensor<T>, op: Op<T>, requires_grad: bool) -> Var {
        self.nodes.push(Node { value, op, requires_grad });
        Var(self.nodes.len() - 1)
    }

    fn unary(&mut self, a: Var, value: Tensor<T>, op: Op<T>) -> Var {
        let rg = self.nodes[a.0].requires_grad;
        self.push(value, op, rg)
    }

    fn binary(&mut self, a: Var, b: Var, value: Tensor<T>, op: Op<T>) -> Var {
        let rg = self.nodes[a.0].requires_grad || self.nodes[b.0].requires_grad;
        self.push(value, op, rg)
    }

    /// `x·w + b`, with the 1xO bias broadcast over rows.
    pub fn affine(&mut self, x: Var, w: Var, b: Var) -> Result<Var> {
        let value = Tensor::affine(self.value(x), self.value(w), self.value(b))?;
        let rg = [x, w, b].iter().any(|v| self.nodes[v.0].requires_grad);
        Ok(self.push(value, Op::Affine { x, w, b }, rg))
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        let value = self.value(a).map(T::tanh);
        self.unary(a, value, Op::Tanh(a))
    }

    pub fn exp(&mut self, a: Var) -> Var {
        let value = self.value(a).map(T::exp);
        self.unary(a, value, Op::Exp(a))
    }

    /// Natural log; every input entry must be strictly positive.
    pub fn log(&mut self, a: Var) -> Result<Var> {
        let input = self.value(a);
        if let Some(bad) = input.data().iter().find(|v| !(**v > T::zero())) {
            return Err(Error::domain("log", format!("non-positive input {bad}")));
        }
        let value = input.map(T::ln);
        Ok(self.unary(a, value, Op::Log(a)))
    }

    pub fn softplus(&mut self, a: Var) -> Var {
        let value = self.value(a).map(T::softplus);
        self.unary(a, value, Op::Softplus(a))
    }

    pub fn square(&mut self, a: Var) -> Var {
        let value = self.value(a).map(|v| v * v);
        self.unary(a, value, Op::Square(a))
    }

    pub fn neg(&mut self, a: Var) -> Var {
        let value = self.value(a).map(|v| -v);
        self.unary(a, value, Op::Neg(a))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let value = self.value(a).zip_map(self.value(b), "add", |x, y| x + y)?;
        Ok(self.binary(a, b, value, Op::Add(a, b)))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        let value = self.value(a).zip_map(self.value(b), "sub", |x, y| x - y)?;
        Ok(self.binary(a, b, value, Op::Sub(a, b)))
    }

    /// Elementwise product.
    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        let value = self.value(a).zip_map(self.value(b), "mul", |x, y| x * y)?;
        Ok(self.binary(a, b, value, Op::Mul(a, b)))
    }

    /// Elementwise quotient.
    pub fn div(&mut self, a: Var, b: Var) -> Result<Var> {
        let value = self.value(a).zip_map(self.value(b), "div", |x, y| x / y)?;
        Ok(self.binary(a, b, value, Op::Div(a, b)))
    }

    pub fn mul_scalar(&mut self, a: Var, s: T) -> Var {
        let value = self.value(a).map(|v| v * s);
        self.unary(a, value, Op::MulScalar(a, s))
    }

    pub fn add_scalar(&mut self, a: Var, s: T) -> Var {
        let value = self.value(a).map(|v| v + s);
        self.unary(a, value, Op::AddScalar(a, s))
    }

    /// `max(a, floor)`; entries held at the floor pass no gradient.
    pub fn clamp_min(&mut self, a: Var, floor: T) -> Var {
        let value = self.value(a).map(|v| v.max(floor));
        self.unary(a, value, Op::ClampMin(a, floor))
    }

    pub fn sum(&mut self, a: Var) -> Var {
        let value = Tensor::scalar(self.value(a).sum());
        self.unary(a, value, Op::Sum(a))
    }

    pub fn mean(&mut self, a: Var) -> Var {
        let input = self.value(a);
        let value = Tensor::scalar(input.sum() / T::lit(input.len() as f64));
        self.unary(a, value, Op::Mean(a))
    }

    /// Row-wise `ln Σ_k exp(a_rk)` with max subtraction: (BxK) -> (Bx1).
    pub fn log_sum_exp(&mut self, a: Var) -> Var {
        let input = self.value(a);
        let value = Tensor::from_fn(input.rows(), 1, |r, _| crate::scalar::log_sum_exp(input.row(r)));
        self.unary(a, value, Op::LogSumExp(a))
    }

    /// Row-wise `a_rk - ln Σ_j exp(a_rj)`.
    pub fn log_softmax(&mut self, a: Var) -> Var {
        let input = self.value(a);
        let mut value = input.clone();
        for r in 0..input.rows() {
            let lse = crate::scalar::log_sum_exp(input.row(r));
            for c in 0..input.cols() {
                value.set(r, c, input.get(r, c) - lse);
            }
        }
        self.unary(a, value, Op::LogSoftmax(a))
    }

    /// Reverse sweep from a 1x1 `loss`. Gradients accumulate across every
    /// consumer of a node.
    pub fn backward(&self, loss: Var) -> Result<Gradients<T>> {
        let shape = self.value(loss).shape();
        if shape != (1, 1) {
            return Err(Error::Contract(format!("backward needs a 1x1 loss, got {shape:?}")));
        }
        let mut grads = Gradients { grads: vec![None; loss.0 + 1] };
        grads.grads[loss.0] = Some(Tensor::ones(1, 1));

        for id in (0..=loss.0).rev() {
            let node = &self.nodes[id];
            if !node.requires_grad {
                continue;
            }
            let Some(g) = grads.grads[id].take() else { continue };
            self.propagate(&node.op, &node.value, &g, &mut grads)?;
            grads.grads[id] = Some(g);
        }
        Ok(grads)
    }

    fn needs(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }

    fn propagate(&self, op: &Op<T>, out: &Tensor<T>, g: &Tensor<T>, grads: &mut Gradients<T>) -> Result<()> {
        let one = T::one();
        match *op {
            Op::Leaf => {}
            Op::Affine { x, w, b } => {
                if self.needs(x) {
                    grads.accumulate(x, g.matmul(&self.value(w).transpose())?);
                }
                if self.needs(w) {
                    grads.accumulate(w, self.value(x).transpose().matmul(g)?);
                }
                if self.needs(b) {
                    grads.accumulate(b, g.sum_rows());
                }
            }
            Op::Tanh(a) => grads.accumulate(a, g.zip_map(out, "tanh'", |gi, t| gi * (one - t * t))?),
            Op::Exp(a) => grads.accumulate(a, g.zip_map(out, "exp'", |gi, e| gi * e)?),
            Op::Log(a) => grads.accumulate(a, g.zip_map(self.value(a), "log'", |gi, x| gi / x)?),
            Op::Softplus(a) => {
                grads.accumulate(a, g.zip_map(self.value(a), "softplus'", |gi, x| gi * x.sigmoid())?)
            }
            Op::Square(a) => {
                grads.accumulate(a, g.zip_map(self.value(a), "square'", |gi, x| gi * (x + x))?)
            }
            Op::Neg(a) => grads.accumulate(a, g.map(|gi| -gi)),
            Op::Add(a, b) => {
                if self.needs(a) {
                    grads.accumulate(a, g.clone());
                }
                if self.needs(b) {
                    grads.accumulate(b, g.clone());
                }
            }
            Op::Sub(a, b) => {
                if self.needs(a) {
                    grads.accumulate(a, g.clone());
                }
                if self.needs(b) {
                    grads.accumulate(b, g.map(|gi| -gi));
                }
            }
            Op::Mul(a, b) => {
                if self.needs(a) {
                    grads.accumulate(a, g.zip_map(self.value(b), "mul'", |gi, y| gi * y)?);
                }
                if self.needs(b) {
                    grads.accumulate(b, g.zip_map(self.value(a), "mul'", |gi, x| gi * x)?);
                }
            }
            Op::Div(a, b) => {
                let denom = self.value(b);
                if self.needs(a) {
                    grads.accumulate(a, g.zip_map(denom, "div'", |gi, y| gi / y)?);
                }
                if self.needs(b) {
                    // d(a/b)/db = -(a/b)/b
                    let q = out.zip_map(denom, "div'", |o, y| -o / y)?;
                    grads.accumulate(b, g.zip_map(&q, "div'", |gi, qi| gi * qi)?);
                }
            }
            Op::MulScalar(a, s) => grads.accumulate(a, g.map(|gi| gi * s)),
            Op::AddScalar(a, _) => grads.accumulate(a, g.clone()),
            Op::ClampMin(a, floor) => {
                let pass = g.zip_map(self.value(a), "clamp_min'", |gi, x| {
                    if x >= floor {
                        gi
                    } else {
                        T::zero()
                    }
                })?;
                grads.accumulate(a, pass);
            }
            Op::Sum(a) => {
                let (r, c) = self.value(a).shape();
                grads.accumulate(a, Tensor::full(r, c, g.item()?));
            }
            Op::Mean(a) => {
                let (r, c) = self.value(a).shape();
                let n = T::lit((r * c) as f64);
                grads.accumulate(a, Tensor::full(r, c, g.item()? / n));
            }
            Op::LogSumExp(a) => {
                // softmax of each row, scaled by that row's upstream gradient
                let input = self.value(a);
                let contrib = Tensor::from_fn(input.rows(), input.cols(), |r, c| {
                    g.get(r, 0) * (input.get(r, c) - out.get(r, 0)).exp()
                });
                grads.accumulate(a, contrib);
            }
            Op::LogSoftmax(a) => {
                let (rows, cols) = out.shape();
                let mut contrib = Tensor::zeros(rows, cols);
                for r in 0..rows {
                    let gsum: T = g.row(r).iter().copied().sum();
                    for c in 0..cols {
                        contrib.set(r, c, g.get(r, c) - out.get(r, c).exp() * gsum);
                    }
                }
                grads.accumulate(a, contrib);
            }
        }
        Ok(())
    }
}
