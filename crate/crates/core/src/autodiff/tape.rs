//! Reverse-mode tape over whole tensors.
//!
//! Every complex quantity is differentiated as a pair of real channels. The
//! adjoint stored for a complex node `z` is `dL/dRe(z) + j dL/dIm(z)`, so the
//! chain rule for a holomorphic map `w = f(z)` reads `adj(z) += adj(w) * conj(f'(z))`.
//! Adjoints flowing into real nodes are projected onto their real part.

use std::collections::BTreeMap;

use num_complex::Complex64;

use super::tensor::{DType, Tensor};
use crate::error::{Error, Result};

type C = Complex64;

const ZERO: C = C::new(0.0, 0.0);
const ONE: C = C::new(1.0, 0.0);

/// Handle to a node recorded on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnaryKind {
    Neg,
    Exp,
    Log1p,
    Sigmoid,
    Sqrt,
    Real,
    Imag,
    Conj,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinaryKind {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Clone, Debug)]
enum Op {
    Leaf,
    Unary(UnaryKind, NodeId),
    Binary(BinaryKind, NodeId, NodeId),
    Scale(NodeId, f64),
    Complex(NodeId, NodeId),
    Cis(NodeId),
    Abs2(NodeId),
    MatMul(NodeId, NodeId),
    ReduceSum { input: NodeId, map: Vec<usize> },
    Reshape(NodeId),
    Diag(NodeId),
    DiagPart(NodeId),
}

#[derive(Clone, Debug)]
struct Node {
    op: Op,
    value: Tensor,
    trainable: bool,
    requires_grad: bool,
}

/// Append-only record of one forward pass.
#[derive(Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
    leaves: Vec<NodeId>,
    spent: bool,
}

/// Gradients of a scalar loss with respect to each trainable leaf.
#[derive(Clone, Debug, Default)]
pub struct Gradients {
    by_leaf: BTreeMap<NodeId, Tensor>,
}

impl Gradients {
    pub fn get(&self, leaf: NodeId) -> Option<&Tensor> {
        self.by_leaf.get(&leaf)
    }

    pub fn len(&self) -> usize {
        self.by_leaf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_leaf.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, &Tensor)> {
        self.by_leaf.iter().map(|(k, v)| (*k, v))
    }

    /// Consumes the map, returning gradients in the order of `leaves`.
    pub fn into_ordered(mut self, leaves: &[NodeId]) -> Vec<Tensor> {
        leaves
            .iter()
            .map(|id| self.by_leaf.remove(id).expect("leaf registered on tape"))
            .collect()
    }
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    /// Clears every node so the tape can record a new pass.
    pub fn reset(&mut self) {
        self.nodes.clear();
        self.leaves.clear();
        self.spent = false;
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Trainable leaves in registration order.
    pub fn trainable_leaves(&self) -> &[NodeId] {
        &self.leaves
    }

    pub fn value(&self, id: NodeId) -> Result<&Tensor> {
        Ok(&self.node(id)?.value)
    }

    fn node(&self, id: NodeId) -> Result<&Node> {
        self.nodes.get(id.0).ok_or(Error::UnknownNode(id.0))
    }

    fn push(&mut self, op: Op, value: Tensor, inputs: &[NodeId]) -> NodeId {
        let requires_grad = inputs.iter().any(|i| self.nodes[i.0].requires_grad);
        self.nodes.push(Node {
            op,
            value,
            trainable: false,
            requires_grad,
        });
        NodeId(self.nodes.len() - 1)
    }

    pub fn leaf(&mut self, values: Tensor, trainable: bool) -> Result<NodeId> {
        if trainable && !values.is_real() {
            return Err(Error::ComplexTrainable);
        }
        self.nodes.push(Node {
            op: Op::Leaf,
            value: values,
            trainable,
            requires_grad: trainable,
        });
        let id = NodeId(self.nodes.len() - 1);
        if trainable {
            self.leaves.push(id);
        }
        Ok(id)
    }

    pub fn constant(&mut self, values: Tensor) -> NodeId {
        self.leaf(values, false).expect("constants are never rejected")
    }

    pub fn scalar(&mut self, value: f64) -> NodeId {
        self.constant(Tensor::scalar(value))
    }

    pub fn unary(&mut self, kind: UnaryKind, x: NodeId) -> Result<NodeId> {
        let input = &self.node(x)?.value;
        let name = unary_name(kind);
        let real_only = matches!(kind, UnaryKind::Log1p | UnaryKind::Sigmoid | UnaryKind::Sqrt);
        if real_only && !input.is_real() {
            return Err(Error::NotReal { op: name });
        }
        let data = input.data();
        let out: Vec<C> = match kind {
            UnaryKind::Neg => data.iter().map(|z| -z).collect(),
            UnaryKind::Exp => data.iter().map(|z| z.exp()).collect(),
            UnaryKind::Log1p => {
                if let Some(x) = data.iter().find(|z| z.re <= -1.0) {
                    return Err(Error::Domain {
                        op: name,
                        detail: format!("log1p undefined at {}", x.re),
                    });
                }
                data.iter().map(|z| C::new(z.re.ln_1p(), 0.0)).collect()
            }
            UnaryKind::Sigmoid => data.iter().map(|z| C::new(sigmoid(z.re), 0.0)).collect(),
            UnaryKind::Sqrt => {
                if let Some(x) = data.iter().find(|z| z.re < 0.0) {
                    return Err(Error::Domain {
                        op: name,
                        detail: format!("sqrt of negative {}", x.re),
                    });
                }
                data.iter().map(|z| C::new(z.re.sqrt(), 0.0)).collect()
            }
            UnaryKind::Real => data.iter().map(|z| C::new(z.re, 0.0)).collect(),
            UnaryKind::Imag => data.iter().map(|z| C::new(z.im, 0.0)).collect(),
            UnaryKind::Conj => data.iter().map(|z| z.conj()).collect(),
        };
        let dtype = match kind {
            UnaryKind::Real | UnaryKind::Imag => DType::Real,
            _ => input.dtype(),
        };
        let value = Tensor::from_parts(input.shape().to_vec(), dtype, out);
        Ok(self.push(Op::Unary(kind, x), value, &[x]))
    }

    pub fn binary(&mut self, kind: BinaryKind, a: NodeId, b: NodeId) -> Result<NodeId> {
        let name = binary_name(kind);
        let (va, vb) = (&self.node(a)?.value, &self.node(b)?.value);
        let shape = broadcast_shape(name, va, vb)?;
        let n: usize = shape.iter().product();
        if kind == BinaryKind::Div && vb.data().contains(&ZERO) {
            return Err(Error::DivisionByZero { op: name });
        }
        let out: Vec<C> = (0..n)
            .map(|i| {
                let (x, y) = (bcast(va, i), bcast(vb, i));
                match kind {
                    BinaryKind::Add => x + y,
                    BinaryKind::Sub => x - y,
                    BinaryKind::Mul => x * y,
                    BinaryKind::Div => x / y,
                }
            })
            .collect();
        let value = Tensor::from_parts(shape, va.dtype().promote(vb.dtype()), out);
        Ok(self.push(Op::Binary(kind, a, b), value, &[a, b]))
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        self.binary(BinaryKind::Add, a, b)
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        self.binary(BinaryKind::Sub, a, b)
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        self.binary(BinaryKind::Mul, a, b)
    }

    pub fn div(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        self.binary(BinaryKind::Div, a, b)
    }

    pub fn neg(&mut self, x: NodeId) -> Result<NodeId> {
        self.unary(UnaryKind::Neg, x)
    }

    pub fn exp(&mut self, x: NodeId) -> Result<NodeId> {
        self.unary(UnaryKind::Exp, x)
    }

    pub fn log1p(&mut self, x: NodeId) -> Result<NodeId> {
        self.unary(UnaryKind::Log1p, x)
    }

    pub fn sigmoid(&mut self, x: NodeId) -> Result<NodeId> {
        self.unary(UnaryKind::Sigmoid, x)
    }

    pub fn sqrt(&mut self, x: NodeId) -> Result<NodeId> {
        self.unary(UnaryKind::Sqrt, x)
    }

    pub fn real(&mut self, x: NodeId) -> Result<NodeId> {
        self.unary(UnaryKind::Real, x)
    }

    pub fn imag(&mut self, x: NodeId) -> Result<NodeId> {
        self.unary(UnaryKind::Imag, x)
    }

    pub fn conj(&mut self, x: NodeId) -> Result<NodeId> {
        self.unary(UnaryKind::Conj, x)
    }

    /// Multiplies every element by a real constant.
    pub fn scale(&mut self, x: NodeId, factor: f64) -> Result<NodeId> {
        let input = &self.node(x)?.value;
        let out = input.data().iter().map(|z| z * factor).collect();
        let value = Tensor::from_parts(input.shape().to_vec(), input.dtype(), out);
        Ok(self.push(Op::Scale(x, factor), value, &[x]))
    }

    /// Builds `re + j im` from two real tensors of equal shape.
    pub fn complex(&mut self, re: NodeId, im: NodeId) -> Result<NodeId> {
        let (vr, vi) = (&self.node(re)?.value, &self.node(im)?.value);
        if !vr.is_real() || !vi.is_real() {
            return Err(Error::NotReal { op: "complex" });
        }
        if vr.shape() != vi.shape() {
            return Err(Error::ShapeMismatch {
                op: "complex",
                lhs: vr.shape().to_vec(),
                rhs: vi.shape().to_vec(),
            });
        }
        let out = vr
            .data()
            .iter()
            .zip(vi.data())
            .map(|(r, i)| C::new(r.re, i.re))
            .collect();
        let value = Tensor::from_parts(vr.shape().to_vec(), DType::Complex, out);
        Ok(self.push(Op::Complex(re, im), value, &[re, im]))
    }

    /// Elementwise `e^{j phi}` of a real tensor.
    pub fn cis(&mut self, phi: NodeId) -> Result<NodeId> {
        let input = &self.node(phi)?.value;
        if !input.is_real() {
            return Err(Error::NotReal { op: "cis" });
        }
        let out = input.data().iter().map(|z| C::cis(z.re)).collect();
        let value = Tensor::from_parts(input.shape().to_vec(), DType::Complex, out);
        Ok(self.push(Op::Cis(phi), value, &[phi]))
    }

    /// Elementwise squared magnitude `Re(z)^2 + Im(z)^2`.
    pub fn abs2(&mut self, z: NodeId) -> Result<NodeId> {
        let input = &self.node(z)?.value;
        let out = input.data().iter().map(|z| C::new(z.norm_sqr(), 0.0)).collect();
        let value = Tensor::from_parts(input.shape().to_vec(), DType::Real, out);
        Ok(self.push(Op::Abs2(z), value, &[z]))
    }

    /// Matrix product of two rank-2 tensors.
    pub fn matmul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let (va, vb) = (&self.node(a)?.value, &self.node(b)?.value);
        if va.rank() != 2 || vb.rank() != 2 || va.shape()[1] != vb.shape()[0] {
            return Err(Error::ShapeMismatch {
                op: "matmul",
                lhs: va.shape().to_vec(),
                rhs: vb.shape().to_vec(),
            });
        }
        let (m, k, n) = (va.shape()[0], va.shape()[1], vb.shape()[1]);
        let out = matmul_raw(va.data(), vb.data(), m, k, n);
        let value = Tensor::from_parts(vec![m, n], va.dtype().promote(vb.dtype()), out);
        Ok(self.push(Op::MatMul(a, b), value, &[a, b]))
    }

    /// Sums over `axes`; `None` reduces to a scalar.
    pub fn reduce_sum(&mut self, x: NodeId, axes: Option<&[usize]>) -> Result<NodeId> {
        let input = &self.node(x)?.value;
        let shape = input.shape();
        let all: Vec<usize> = (0..shape.len()).collect();
        let axes = axes.unwrap_or(&all);
        if let Some(&axis) = axes.iter().find(|&&a| a >= shape.len()) {
            return Err(Error::InvalidAxis {
                axis,
                rank: shape.len(),
            });
        }
        let (out_shape, map) = reduction_map(shape, axes);
        let mut out = vec![ZERO; out_shape.iter().product()];
        for (z, &j) in input.data().iter().zip(&map) {
            out[j] += z;
        }
        let value = Tensor::from_parts(out_shape, input.dtype(), out);
        Ok(self.push(Op::ReduceSum { input: x, map }, value, &[x]))
    }

    pub fn sum(&mut self, x: NodeId) -> Result<NodeId> {
        self.reduce_sum(x, None)
    }

    pub fn reshape(&mut self, x: NodeId, shape: &[usize]) -> Result<NodeId> {
        let value = self.node(x)?.value.reshaped(shape.to_vec())?;
        Ok(self.push(Op::Reshape(x), value, &[x]))
    }

    /// Vector of length `n` to an `n x n` diagonal matrix.
    pub fn diag(&mut self, v: NodeId) -> Result<NodeId> {
        let input = &self.node(v)?.value;
        if input.rank() != 1 {
            return Err(Error::ShapeMismatch {
                op: "diag",
                lhs: input.shape().to_vec(),
                rhs: vec![],
            });
        }
        let n = input.numel();
        let mut out = vec![ZERO; n * n];
        for (i, z) in input.data().iter().enumerate() {
            out[i * n + i] = *z;
        }
        let value = Tensor::from_parts(vec![n, n], input.dtype(), out);
        Ok(self.push(Op::Diag(v), value, &[v]))
    }

    /// Main diagonal of a rank-2 tensor.
    pub fn diag_part(&mut self, a: NodeId) -> Result<NodeId> {
        let input = &self.node(a)?.value;
        if input.rank() != 2 {
            return Err(Error::ShapeMismatch {
                op: "diag_part",
                lhs: input.shape().to_vec(),
                rhs: vec![],
            });
        }
        let (r, c) = (input.shape()[0], input.shape()[1]);
        let out = (0..r.min(c)).map(|i| input.data()[i * c + i]).collect();
        let value = Tensor::from_parts(vec![r.min(c)], input.dtype(), out);
        Ok(self.push(Op::DiagPart(a), value, &[a]))
    }

    /// Reverse pass from a real scalar `loss`.
    ///
    /// Returns one gradient per trainable leaf; leaves the loss does not
    /// depend on get zeros. A tape supports a single backward pass.
    pub fn backward(&mut self, loss: NodeId) -> Result<Gradients> {
        if self.spent {
            return Err(Error::TapeSpent);
        }
        let lv = &self.node(loss)?.value;
        if lv.numel() != 1 {
            return Err(Error::NotScalar(lv.shape().to_vec()));
        }
        if !lv.is_real() {
            return Err(Error::NotReal { op: "backward" });
        }
        self.spent = true;

        let nodes = &self.nodes;
        let mut adj: Vec<Option<Vec<C>>> = vec![None; loss.0 + 1];
        adj[loss.0] = Some(vec![ONE]);
        let mut by_leaf = BTreeMap::new();

        for idx in (0..=loss.0).rev() {
            let Some(g) = adj[idx].take() else { continue };
            let node = &nodes[idx];
            if !node.requires_grad {
                continue;
            }
            let out = &node.value;
            match &node.op {
                Op::Leaf => {
                    if node.trainable {
                        by_leaf.insert(NodeId(idx), Tensor::from_parts(out.shape().to_vec(), DType::Real, g));
                    }
                }
                Op::Unary(kind, x) => {
                    let xv = nodes[x.0].value.data();
                    let contrib: Vec<C> = match kind {
                        UnaryKind::Neg => g.iter().map(|g| -g).collect(),
                        UnaryKind::Exp => zip_map(&g, out.data(), |g, w| g * w.conj()),
                        UnaryKind::Log1p => zip_map(&g, xv, |g, x| g / (1.0 + x.re)),
                        UnaryKind::Sigmoid => zip_map(&g, out.data(), |g, s| g * (s.re * (1.0 - s.re))),
                        UnaryKind::Sqrt => zip_map(&g, out.data(), |g, r| g / (2.0 * r.re)),
                        UnaryKind::Real => g.iter().map(|g| C::new(g.re, 0.0)).collect(),
                        UnaryKind::Imag => g.iter().map(|g| C::new(0.0, g.re)).collect(),
                        UnaryKind::Conj => g.iter().map(|g| g.conj()).collect(),
                    };
                    accumulate(nodes, &mut adj, *x, contrib);
                }
                Op::Binary(kind, a, b) => {
                    let (va, vb) = (&nodes[a.0].value, &nodes[b.0].value);
                    let n = g.len();
                    let (ca, cb): (Vec<C>, Vec<C>) = match kind {
                        BinaryKind::Add => (g.clone(), g),
                        BinaryKind::Sub => (g.clone(), g.iter().map(|g| -g).collect()),
                        BinaryKind::Mul => (0..n)
                            .map(|i| (g[i] * bcast(vb, i).conj(), g[i] * bcast(va, i).conj()))
                            .unzip(),
                        BinaryKind::Div => (0..n)
                            .map(|i| {
                                let y = bcast(vb, i);
                                let w = out.data()[i];
                                (g[i] * (ONE / y).conj(), -g[i] * (w / y).conj())
                            })
                            .unzip(),
                    };
                    accumulate(nodes, &mut adj, *a, ca);
                    accumulate(nodes, &mut adj, *b, cb);
                }
                Op::Scale(x, factor) => {
                    let contrib = g.iter().map(|g| g * *factor).collect();
                    accumulate(nodes, &mut adj, *x, contrib);
                }
                Op::Complex(re, im) => {
                    let cr = g.iter().map(|g| C::new(g.re, 0.0)).collect();
                    let ci = g.iter().map(|g| C::new(g.im, 0.0)).collect();
                    accumulate(nodes, &mut adj, *re, cr);
                    accumulate(nodes, &mut adj, *im, ci);
                }
                Op::Cis(phi) => {
                    // d/dphi e^{j phi} = j z
                    let contrib = zip_map(&g, out.data(), |g, z| C::new((g.conj() * C::new(-z.im, z.re)).re, 0.0));
                    accumulate(nodes, &mut adj, *phi, contrib);
                }
                Op::Abs2(z) => {
                    let contrib = zip_map(&g, nodes[z.0].value.data(), |g, z| z * (2.0 * g.re));
                    accumulate(nodes, &mut adj, *z, contrib);
                }
                Op::MatMul(a, b) => {
                    let (va, vb) = (&nodes[a.0].value, &nodes[b.0].value);
                    let (m, k, n) = (va.shape()[0], va.shape()[1], vb.shape()[1]);
                    // dA = G B^H, dB = A^H G
                    let mut ga = vec![ZERO; m * k];
                    let mut gb = vec![ZERO; k * n];
                    for i in 0..m {
                        for j in 0..n {
                            let gij = g[i * n + j];
                            if gij == ZERO {
                                continue;
                            }
                            for p in 0..k {
                                ga[i * k + p] += gij * vb.data()[p * n + j].conj();
                                gb[p * n + j] += va.data()[i * k + p].conj() * gij;
                            }
                        }
                    }
                    accumulate(nodes, &mut adj, *a, ga);
                    accumulate(nodes, &mut adj, *b, gb);
                }
                Op::ReduceSum { input, map } => {
                    let contrib = map.iter().map(|&j| g[j]).collect();
                    accumulate(nodes, &mut adj, *input, contrib);
                }
                Op::Reshape(x) => accumulate(nodes, &mut adj, *x, g),
                Op::Diag(v) => {
                    let n = nodes[v.0].value.numel();
                    let contrib = (0..n).map(|i| g[i * n + i]).collect();
                    accumulate(nodes, &mut adj, *v, contrib);
                }
                Op::DiagPart(a) => {
                    let shape = nodes[a.0].value.shape();
                    let c = shape[1];
                    let mut contrib = vec![ZERO; shape[0] * c];
                    for (i, gi) in g.iter().enumerate() {
                        contrib[i * c + i] = *gi;
                    }
                    accumulate(nodes, &mut adj, *a, contrib);
                }
            }
        }

        for &leaf in &self.leaves {
            by_leaf
                .entry(leaf)
                .or_insert_with(|| Tensor::zeros(nodes[leaf.0].value.shape().to_vec(), DType::Real));
        }
        Ok(Gradients { by_leaf })
    }
}

fn accumulate(nodes: &[Node], adj: &mut [Option<Vec<C>>], target: NodeId, mut contrib: Vec<C>) {
    let node = &nodes[target.0];
    if !node.requires_grad {
        return;
    }
    let n = node.value.numel();
    if contrib.len() != n {
        // scalar broadcast: the input fed every output element
        debug_assert_eq!(n, 1);
        contrib = vec![contrib.iter().sum()];
    }
    if node.value.is_real() {
        for z in &mut contrib {
            z.im = 0.0;
        }
    }
    match &mut adj[target.0] {
        Some(acc) => {
            for (a, c) in acc.iter_mut().zip(contrib) {
                *a += c;
            }
        }
        slot @ None => *slot = Some(contrib),
    }
}

fn zip_map(g: &[C], v: &[C], f: impl Fn(C, C) -> C) -> Vec<C> {
    g.iter().zip(v).map(|(g, v)| f(*g, *v)).collect()
}

fn bcast(t: &Tensor, i: usize) -> C {
    if t.numel() == 1 {
        t.data()[0]
    } else {
        t.data()[i]
    }
}

fn broadcast_shape(op: &'static str, a: &Tensor, b: &Tensor) -> Result<Vec<usize>> {
    if a.shape() == b.shape() || b.numel() == 1 {
        Ok(a.shape().to_vec())
    } else if a.numel() == 1 {
        Ok(b.shape().to_vec())
    } else {
        Err(Error::ShapeMismatch {
            op,
            lhs: a.shape().to_vec(),
            rhs: b.shape().to_vec(),
        })
    }
}

/// Output shape and, for each input element, its flat output index.
fn reduction_map(shape: &[usize], axes: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let keep: Vec<usize> = (0..shape.len()).filter(|d| !axes.contains(d)).collect();
    let out_shape: Vec<usize> = keep.iter().map(|&d| shape[d]).collect();
    let total: usize = shape.iter().product();
    let mut map = Vec::with_capacity(total);
    let mut coords = vec![0usize; shape.len()];
    for _ in 0..total {
        let mut j = 0;
        for &d in &keep {
            j = j * shape[d] + coords[d];
        }
        map.push(j);
        for d in (0..shape.len()).rev() {
            coords[d] += 1;
            if coords[d] < shape[d] {
                break;
            }
            coords[d] = 0;
        }
    }
    (out_shape, map)
}

pub(crate) fn matmul_raw(a: &[C], b: &[C], m: usize, k: usize, n: usize) -> Vec<C> {
    let mut out = vec![ZERO; m * n];
    for i in 0..m {
        for p in 0..k {
            let aip = a[i * k + p];
            if aip == ZERO {
                continue;
            }
            let row = &b[p * n..(p + 1) * n];
            for (o, bpj) in out[i * n..(i + 1) * n].iter_mut().zip(row) {
                *o += aip * bpj;
            }
        }
    }
    out
}

/// Branch-stable logistic function.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn unary_name(kind: UnaryKind) -> &'static str {
    match kind {
        UnaryKind::Neg => "neg",
        UnaryKind::Exp => "exp",
        UnaryKind::Log1p => "log1p",
        UnaryKind::Sigmoid => "sigmoid",
        UnaryKind::Sqrt => "sqrt",
        UnaryKind::Real => "real",
        UnaryKind::Imag => "imag",
        UnaryKind::Conj => "conj",
    }
}

fn binary_name(kind: BinaryKind) -> &'static str {
    match kind {
        BinaryKind::Add => "add",
        BinaryKind::Sub => "sub",
        BinaryKind::Mul => "mul",
        BinaryKind::Div => "div",
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_2, PI};

    use super::*;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    #[test]
    fn leaf_stores_value() {
        let mut tape = Tape::new();
        let h = tape.leaf(Tensor::vector(vec![1.0, 2.0]), true).unwrap();
        assert_eq!(tape.value(h).unwrap().re(), vec![1.0, 2.0]);
        assert_eq!(tape.trainable_leaves(), &[h]);
    }

    #[test]
    fn complex_constant_is_excluded_from_gradients() {
        let mut tape = Tape::new();
        let x = tape.leaf(Tensor::vector(vec![1.0]), true).unwrap();
        let k = tape
            .leaf(Tensor::complex(vec![3, 2], vec![c(1.0, 1.0); 6]).unwrap(), false)
            .unwrap();
        let s = tape.sum(k).unwrap();
        let a = tape.abs2(s).unwrap();
        let loss = tape.mul(a, x).unwrap();
        let grads = tape.backward(loss).unwrap();
        assert_eq!(grads.len(), 1);
        assert!(grads.get(k).is_none());
    }

    #[test]
    fn complex_trainable_leaf_is_rejected() {
        let mut tape = Tape::new();
        let t = Tensor::complex(vec![1], vec![c(0.0, 1.0)]).unwrap();
        assert!(matches!(tape.leaf(t, true), Err(Error::ComplexTrainable)));
    }

    #[test]
    fn cis_values() {
        let mut tape = Tape::new();
        let p = tape.constant(Tensor::vector(vec![0.0, PI]));
        let z = tape.cis(p).unwrap();
        let v = tape.value(z).unwrap().data().to_vec();
        assert_eq!(v[0], c(1.0, 0.0));
        assert!((v[1] - c(-1.0, 0.0)).norm() < f64::EPSILON);
    }

    #[test]
    fn cis_gradient_matches_analytic() {
        // |e^{j phi} + 1|^2 = 2 + 2 cos(phi)
        let mut tape = Tape::new();
        let p = tape.leaf(Tensor::vector(vec![FRAC_PI_2]), true).unwrap();
        let z = tape.cis(p).unwrap();
        let one = tape.scalar(1.0);
        let s = tape.add(z, one).unwrap();
        let a = tape.abs2(s).unwrap();
        let loss = tape.sum(a).unwrap();
        let g = tape.backward(loss).unwrap();
        assert!((g.get(p).unwrap().re()[0] + 2.0).abs() < 1e-15);
    }

    #[test]
    fn matmul_identity_and_scalar() {
        let mut tape = Tape::new();
        let i2 = tape.constant(Tensor::matrix(2, 2, vec![1.0, 0.0, 0.0, 1.0]).unwrap());
        let x = tape
            .constant(Tensor::complex(vec![2, 2], vec![c(1.0, 2.0), c(3.0, 0.0), c(0.0, -1.0), c(5.0, 5.0)]).unwrap());
        let y = tape.matmul(i2, x).unwrap();
        assert_eq!(tape.value(y).unwrap().data(), tape.value(x).unwrap().data());

        let a = tape.constant(Tensor::complex(vec![1, 1], vec![c(2.0, 1.0)]).unwrap());
        let b = tape.constant(Tensor::matrix(1, 1, vec![3.0]).unwrap());
        let p = tape.matmul(a, b).unwrap();
        assert_eq!(tape.value(p).unwrap().data()[0], c(6.0, 3.0));
    }

    #[test]
    fn matmul_rejects_inner_mismatch() {
        let mut tape = Tape::new();
        let a = tape.constant(Tensor::zeros(vec![2, 3], DType::Real));
        let b = tape.constant(Tensor::zeros(vec![2, 3], DType::Real));
        assert!(matches!(tape.matmul(a, b), Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn abs2_values_and_gradient() {
        let mut tape = Tape::new();
        let x = tape.leaf(Tensor::vector(vec![1.0]), true).unwrap();
        let y = tape.leaf(Tensor::vector(vec![2.0]), true).unwrap();
        let z = tape.complex(x, y).unwrap();
        let a = tape.abs2(z).unwrap();
        assert_eq!(tape.value(a).unwrap().re(), vec![5.0]);
        let loss = tape.sum(a).unwrap();
        let g = tape.backward(loss).unwrap();
        assert_eq!(g.get(x).unwrap().re(), vec![2.0]);
        assert_eq!(g.get(y).unwrap().re(), vec![4.0]);

        let mut tape = Tape::new();
        let z = tape.constant(Tensor::complex(vec![2], vec![c(3.0, 4.0), c(0.0, 0.0)]).unwrap());
        let a = tape.abs2(z).unwrap();
        assert_eq!(tape.value(a).unwrap().re(), vec![25.0, 0.0]);
    }

    #[test]
    fn elementwise_values() {
        let mut tape = Tape::new();
        let zero = tape.scalar(0.0);
        let s = tape.sigmoid(zero).unwrap();
        let l = tape.log1p(zero).unwrap();
        assert_eq!(tape.value(s).unwrap().re(), vec![0.5]);
        assert_eq!(tape.value(l).unwrap().re(), vec![0.0]);
    }

    #[test]
    fn sigmoid_is_stable_at_extremes() {
        assert_eq!(sigmoid(-1000.0), 0.0);
        assert_eq!(sigmoid(1000.0), 1.0);
        assert!((sigmoid(-30.0) - 9.357622968839299e-14).abs() < 1e-26);
    }

    #[test]
    fn sigmoid_gradient_at_zero() {
        let mut tape = Tape::new();
        let x = tape.leaf(Tensor::scalar(0.0), true).unwrap();
        let s = tape.sigmoid(x).unwrap();
        let g = tape.backward(s).unwrap();
        assert_eq!(g.get(x).unwrap().re(), vec![0.25]);
    }

    #[test]
    fn division_by_zero_is_an_error() {
        let mut tape = Tape::new();
        let a = tape.scalar(1.0);
        let b = tape.scalar(0.0);
        assert!(matches!(tape.div(a, b), Err(Error::DivisionByZero { .. })));
    }

    #[test]
    fn log1p_domain() {
        let mut tape = Tape::new();
        let a = tape.scalar(-1.0);
        assert!(matches!(tape.log1p(a), Err(Error::Domain { .. })));
    }

    #[test]
    fn real_only_ops_reject_complex() {
        let mut tape = Tape::new();
        let z = tape.constant(Tensor::complex(vec![1], vec![c(0.0, 1.0)]).unwrap());
        assert!(tape.sigmoid(z).is_err());
        assert!(tape.sqrt(z).is_err());
        assert!(tape.cis(z).is_err());
    }

    #[test]
    fn reduce_sum_values_and_gradient() {
        let mut tape = Tape::new();
        let x = tape.leaf(Tensor::vector(vec![1.0, 2.0, 3.0]), true).unwrap();
        let s = tape.sum(x).unwrap();
        assert_eq!(tape.value(s).unwrap().re(), vec![6.0]);
        let g = tape.backward(s).unwrap();
        assert_eq!(g.get(x).unwrap().re(), vec![1.0, 1.0, 1.0]);

        let mut tape = Tape::new();
        let z = tape.constant(Tensor::zeros(vec![4], DType::Real));
        let s = tape.sum(z).unwrap();
        assert_eq!(tape.value(s).unwrap().re(), vec![0.0]);
    }

    #[test]
    fn reduce_sum_over_axes() {
        let mut tape = Tape::new();
        let m = tape.constant(Tensor::matrix(2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap());
        let rows = tape.reduce_sum(m, Some(&[1])).unwrap();
        let cols = tape.reduce_sum(m, Some(&[0])).unwrap();
        assert_eq!(tape.value(rows).unwrap().re(), vec![6.0, 15.0]);
        assert_eq!(tape.value(cols).unwrap().re(), vec![5.0, 7.0, 9.0]);
        assert!(matches!(
            tape.reduce_sum(m, Some(&[2])),
            Err(Error::InvalidAxis { axis: 2, rank: 2 })
        ));
    }

    #[test]
    fn square_gradient() {
        let mut tape = Tape::new();
        let x = tape.leaf(Tensor::scalar(3.0), true).unwrap();
        let sq = tape.mul(x, x).unwrap();
        let g = tape.backward(sq).unwrap();
        assert_eq!(g.get(x).unwrap().re(), vec![6.0]);
    }

    #[test]
    fn constant_loss_gives_zero_gradients() {
        let mut tape = Tape::new();
        let x = tape.leaf(Tensor::vector(vec![1.0, 2.0]), true).unwrap();
        let _ = tape.scale(x, 2.0).unwrap();
        let c = tape.scalar(4.0);
        let g = tape.backward(c).unwrap();
        assert_eq!(g.get(x).unwrap().re(), vec![0.0, 0.0]);
    }

    #[test]
    fn backward_rejects_bad_losses() {
        let mut tape = Tape::new();
        let x = tape.leaf(Tensor::vector(vec![1.0, 2.0]), true).unwrap();
        assert!(matches!(tape.backward(x), Err(Error::NotScalar(_))));
        let z = tape.constant(Tensor::complex(vec![], vec![c(1.0, 1.0)]).unwrap());
        assert!(matches!(tape.backward(z), Err(Error::NotReal { .. })));
    }

    #[test]
    fn tape_serves_one_backward_pass() {
        let mut tape = Tape::new();
        let x = tape.leaf(Tensor::scalar(1.0), true).unwrap();
        tape.backward(x).unwrap();
        assert!(matches!(tape.backward(x), Err(Error::TapeSpent)));
        tape.reset();
        assert!(tape.is_empty());
        let x = tape.leaf(Tensor::scalar(1.0), true).unwrap();
        assert!(tape.backward(x).is_ok());
    }

    #[test]
    fn imag_and_conj_gradients() {
        // L = Im(conj(x + j y)) = -y
        let mut tape = Tape::new();
        let x = tape.leaf(Tensor::scalar(0.3), true).unwrap();
        let y = tape.leaf(Tensor::scalar(0.7), true).unwrap();
        let z = tape.complex(x, y).unwrap();
        let zc = tape.conj(z).unwrap();
        let l = tape.imag(zc).unwrap();
        let g = tape.backward(l).unwrap();
        assert_eq!(g.get(x).unwrap().re(), vec![0.0]);
        assert_eq!(g.get(y).unwrap().re(), vec![-1.0]);
    }

    #[test]
    fn diag_roundtrip() {
        let mut tape = Tape::new();
        let v = tape.leaf(Tensor::vector(vec![1.0, 2.0, 3.0]), true).unwrap();
        let d = tape.diag(v).unwrap();
        assert_eq!(tape.value(d).unwrap().shape(), &[3, 3]);
        let back = tape.diag_part(d).unwrap();
        let w = tape.constant(Tensor::vector(vec![1.0, 10.0, 100.0]));
        let p = tape.mul(back, w).unwrap();
        let l = tape.sum(p).unwrap();
        let g = tape.backward(l).unwrap();
        assert_eq!(g.get(v).unwrap().re(), vec![1.0, 10.0, 100.0]);
    }
}
