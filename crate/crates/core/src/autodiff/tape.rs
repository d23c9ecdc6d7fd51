//! Vector-valued reverse-mode tape.
//!
//! Nodes are appended after their inputs, so a single reverse pass over the
//! node list visits every node once in reverse topological order. Parameters
//! are read straight from the borrowed [`ParamSet`]; their gradients land in
//! a [`Gradients`] buffer.

use super::params::{Gradients, ParamId, ParamSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(usize);

#[derive(Debug, Clone)]
enum Op {
    Input,
    /// A parameter vector (or a flattened matrix) used directly.
    Param(ParamId),
    /// One row of a parameter matrix.
    Row(ParamId, usize),
    /// `W x + b`, with `b` optional.
    Affine {
        w: ParamId,
        b: Option<ParamId>,
        x: NodeId,
    },
    Add(NodeId, NodeId),
    Sub(NodeId, NodeId),
    Mul(NodeId, NodeId),
    Sigmoid(NodeId),
    Tanh(NodeId),
    /// `1 - a`
    OneMinus(NodeId),
    Scale(NodeId, f64),
    Dot(NodeId, NodeId),
    /// Sum of same-shaped nodes.
    Sum(Vec<NodeId>),
    /// Scalars gathered into a vector.
    Stack(Vec<NodeId>),
    /// `log_softmax(logits)[index]` over the unmasked entries.
    LogSoftmaxPick {
        logits: NodeId,
        index: usize,
        mask: Option<Vec<bool>>,
    },
}

#[derive(Debug, Clone)]
struct Node {
    value: Vec<f64>,
    op: Op,
}

pub struct Tape<'p> {
    params: &'p ParamSet,
    nodes: Vec<Node>,
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Numerically stable `log(sum(exp(x_i)))` over the unmasked entries.
pub fn log_sum_exp(values: &[f64], mask: Option<&[bool]>) -> f64 {
    let allowed = |i: usize| mask.is_none_or(|m| m[i]);
    let max = values
        .iter()
        .enumerate()
        .filter(|(i, _)| allowed(*i))
        .fold(f64::NEG_INFINITY, |m, (_, v)| m.max(*v));
    if max == f64::NEG_INFINITY {
        return max;
    }
    let sum: f64 = values
        .iter()
        .enumerate()
        .filter(|(i, _)| allowed(*i))
        .map(|(_, v)| (v - max).exp())
        .sum();
    max + sum.ln()
}

/// Softmax over the unmasked entries; masked entries get probability 0.
pub fn softmax(values: &[f64], mask: Option<&[bool]>) -> Vec<f64> {
    let lse = log_sum_exp(values, mask);
    values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            if mask.is_none_or(|m| m[i]) {
                (v - lse).exp()
            } else {
                0.0
            }
        })
        .collect()
}

impl<'p> Tape<'p> {
    pub fn new(params: &'p ParamSet) -> Tape<'p> {
        Tape {
            params,
            nodes: Vec::new(),
        }
    }

    pub fn params(&self) -> &'p ParamSet {
        self.params
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, id: NodeId) -> &[f64] {
        &self.nodes[id.0].value
    }

    pub fn scalar(&self, id: NodeId) -> f64 {
        let v = self.value(id);
        debug_assert_eq!(v.len(), 1, "scalar() on a non-scalar node");
        v[0]
    }

    fn push(&mut self, value: Vec<f64>, op: Op) -> NodeId {
        self.nodes.push(Node { value, op });
        NodeId(self.nodes.len() - 1)
    }

    pub fn input(&mut self, value: Vec<f64>) -> NodeId {
        self.push(value, Op::Input)
    }

    pub fn constant(&mut self, value: f64) -> NodeId {
        self.push(vec![value], Op::Input)
    }

    pub fn param(&mut self, id: ParamId) -> NodeId {
        let value = self.params.get(id).data.clone();
        self.push(value, Op::Param(id))
    }

    pub fn row(&mut self, id: ParamId, row: usize) -> NodeId {
        let value = self.params.get(id).row(row).to_vec();
        self.push(value, Op::Row(id, row))
    }

    /// `W x + b`. Panics on a shape mismatch.
    pub fn affine(&mut self, w: ParamId, b: Option<ParamId>, x: NodeId) -> NodeId {
        let wt = self.params.get(w);
        let xv = &self.nodes[x.0].value;
        assert_eq!(wt.cols, xv.len(), "affine: {} has {} columns, input has {}", self.params.name(w), wt.cols, xv.len());
        let mut out = match b {
            Some(b) => {
                let bt = self.params.get(b);
                assert_eq!(bt.len(), wt.rows, "affine: bias length mismatch");
                bt.data.clone()
            }
            None => vec![0.0; wt.rows],
        };
        for (r, o) in out.iter_mut().enumerate() {
            *o += wt.row(r).iter().zip(xv).map(|(a, b)| a * b).sum::<f64>();
        }
        self.push(out, Op::Affine { w, b, x })
    }

    fn zip(&mut self, a: NodeId, b: NodeId, f: impl Fn(f64, f64) -> f64, op: Op) -> NodeId {
        let (av, bv) = (&self.nodes[a.0].value, &self.nodes[b.0].value);
        assert_eq!(av.len(), bv.len(), "elementwise op on mismatched shapes");
        let out = av.iter().zip(bv).map(|(x, y)| f(*x, *y)).collect();
        self.push(out, op)
    }

    fn map(&mut self, a: NodeId, f: impl Fn(f64) -> f64, op: Op) -> NodeId {
        let out = self.nodes[a.0].value.iter().map(|x| f(*x)).collect();
        self.push(out, op)
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.zip(a, b, |x, y| x + y, Op::Add(a, b))
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.zip(a, b, |x, y| x - y, Op::Sub(a, b))
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.zip(a, b, |x, y| x * y, Op::Mul(a, b))
    }

    pub fn sigmoid(&mut self, a: NodeId) -> NodeId {
        self.map(a, sigmoid, Op::Sigmoid(a))
    }

    pub fn tanh(&mut self, a: NodeId) -> NodeId {
        self.map(a, f64::tanh, Op::Tanh(a))
    }

    pub fn one_minus(&mut self, a: NodeId) -> NodeId {
        self.map(a, |x| 1.0 - x, Op::OneMinus(a))
    }

    pub fn scale(&mut self, a: NodeId, factor: f64) -> NodeId {
        self.map(a, |x| x * factor, Op::Scale(a, factor))
    }

    pub fn dot(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let (av, bv) = (&self.nodes[a.0].value, &self.nodes[b.0].value);
        assert_eq!(av.len(), bv.len(), "dot on mismatched shapes");
        let v = av.iter().zip(bv).map(|(x, y)| x * y).sum();
        self.push(vec![v], Op::Dot(a, b))
    }

    /// Sum of same-shaped nodes. An empty sum is the scalar 0.
    pub fn sum(&mut self, items: &[NodeId]) -> NodeId {
        let Some(first) = items.first() else {
            return self.constant(0.0);
        };
        let mut out = self.nodes[first.0].value.clone();
        for id in &items[1..] {
            let v = &self.nodes[id.0].value;
            assert_eq!(v.len(), out.len(), "sum of mismatched shapes");
            for (o, x) in out.iter_mut().zip(v) {
                *o += x;
            }
        }
        self.push(out, Op::Sum(items.to_vec()))
    }

    pub fn stack(&mut self, scalars: &[NodeId]) -> NodeId {
        let out = scalars.iter().map(|id| self.scalar(*id)).collect();
        self.push(out, Op::Stack(scalars.to_vec()))
    }

    /// `log_softmax(logits)[index]`, restricted to unmasked entries.
    pub fn log_softmax_pick(&mut self, logits: NodeId, index: usize, mask: Option<Vec<bool>>) -> NodeId {
        let values = &self.nodes[logits.0].value;
        assert!(index < values.len(), "log_softmax_pick index out of range");
        if let Some(m) = &mask {
            assert!(m[index], "picked a masked entry");
        }
        let lse = log_sum_exp(values, mask.as_deref());
        let v = values[index] - lse;
        self.push(vec![v], Op::LogSoftmaxPick { logits, index, mask })
    }

    /// Reverse sweep seeded with `d(loss)/d(node) = coefficient` for every
    /// seed; parameter gradients are added into `grads`.
    pub fn backward_into(&self, seeds: &[(NodeId, f64)], grads: &mut Gradients) {
        let mut adj: Vec<Option<Vec<f64>>> = vec![None; self.nodes.len()];
        for (id, coeff) in seeds {
            let slot = adj[id.0].get_or_insert_with(|| vec![0.0; self.nodes[id.0].value.len()]);
            for x in slot.iter_mut() {
                *x += coeff;
            }
        }
        for i in (0..self.nodes.len()).rev() {
            let Some(g) = adj[i].take() else { continue };
            let node = &self.nodes[i];
            let acc = |adj: &mut Vec<Option<Vec<f64>>>, target: NodeId, f: &dyn Fn(usize) -> f64| {
                let len = self.nodes[target.0].value.len();
                let slot = adj[target.0].get_or_insert_with(|| vec![0.0; len]);
                for (k, s) in slot.iter_mut().enumerate() {
                    *s += f(k);
                }
            };
            match &node.op {
                Op::Input => {}
                Op::Param(p) => {
                    for (d, x) in grads.get_mut(*p).data.iter_mut().zip(&g) {
                        *d += x;
                    }
                }
                Op::Row(p, r) => {
                    let t = grads.get_mut(*p);
                    let cols = t.cols;
                    for (d, x) in t.data[r * cols..(r + 1) * cols].iter_mut().zip(&g) {
                        *d += x;
                    }
                }
                Op::Affine { w, b, x } => {
                    let wt = self.params.get(*w);
                    let xv = &self.nodes[x.0].value;
                    {
                        let gw = grads.get_mut(*w);
                        for (r, gr) in g.iter().enumerate() {
                            if *gr != 0.0 {
                                for (d, xc) in gw.data[r * wt.cols..(r + 1) * wt.cols].iter_mut().zip(xv) {
                                    *d += gr * xc;
                                }
                            }
                        }
                    }
                    if let Some(b) = b {
                        for (d, x) in grads.get_mut(*b).data.iter_mut().zip(&g) {
                            *d += x;
                        }
                    }
                    let len = xv.len();
                    let slot = adj[x.0].get_or_insert_with(|| vec![0.0; len]);
                    for (r, gr) in g.iter().enumerate() {
                        if *gr != 0.0 {
                            for (s, wv) in slot.iter_mut().zip(wt.row(r)) {
                                *s += gr * wv;
                            }
                        }
                    }
                }
                Op::Add(a, b) => {
                    acc(&mut adj, *a, &|k| g[k]);
                    acc(&mut adj, *b, &|k| g[k]);
                }
                Op::Sub(a, b) => {
                    acc(&mut adj, *a, &|k| g[k]);
                    acc(&mut adj, *b, &|k| -g[k]);
                }
                Op::Mul(a, b) => {
                    let (av, bv) = (&self.nodes[a.0].value, &self.nodes[b.0].value);
                    acc(&mut adj, *a, &|k| g[k] * bv[k]);
                    acc(&mut adj, *b, &|k| g[k] * av[k]);
                }
                Op::Sigmoid(a) => {
                    let y = &node.value;
                    acc(&mut adj, *a, &|k| g[k] * y[k] * (1.0 - y[k]));
                }
                Op::Tanh(a) => {
                    let y = &node.value;
                    acc(&mut adj, *a, &|k| g[k] * (1.0 - y[k] * y[k]));
                }
                Op::OneMinus(a) => acc(&mut adj, *a, &|k| -g[k]),
                Op::Scale(a, f) => acc(&mut adj, *a, &|k| g[k] * f),
                Op::Dot(a, b) => {
                    let (av, bv) = (&self.nodes[a.0].value, &self.nodes[b.0].value);
                    acc(&mut adj, *a, &|k| g[0] * bv[k]);
                    acc(&mut adj, *b, &|k| g[0] * av[k]);
                }
                Op::Sum(items) => {
                    for id in items {
                        acc(&mut adj, *id, &|k| g[k]);
                    }
                }
                Op::Stack(items) => {
                    for (k, id) in items.iter().enumerate() {
                        acc(&mut adj, *id, &|_| g[k]);
                    }
                }
                Op::LogSoftmaxPick { logits, index, mask } => {
                    let probs = softmax(&self.nodes[logits.0].value, mask.as_deref());
                    let idx = *index;
                    acc(&mut adj, *logits, &|k| {
                        let onehot = if k == idx { 1.0 } else { 0.0 };
                        g[0] * (onehot - probs[k])
                    });
                }
            }
        }
    }

    pub fn backward(&self, seeds: &[(NodeId, f64)]) -> Gradients {
        let mut grads = self.params.zeros_like();
        self.backward_into(seeds, &mut grads);
        grads
    }
}
