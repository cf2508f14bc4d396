use super::kernels::{self, AttnShape};
use super::params::{ParamId, ParamStore};
use super::tensor::Tensor;
use crate::error::{contract, Error, Result};

/// Handle to a value recorded on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(usize);

#[derive(Debug)]
enum Op {
    Leaf,
    MatMul {
        a: Var,
        b: Var,
        batch: usize,
        i: usize,
        k: usize,
        j: usize,
        shared: bool,
    },
    AddBias {
        x: Var,
        b: Var,
    },
    Add {
        a: Var,
        b: Var,
    },
    Scale {
        x: Var,
        c: f64,
    },
    LayerNorm {
        x: Var,
        g: Var,
        b: Var,
        xhat: Vec<f64>,
        inv: Vec<f64>,
    },
    Relu {
        x: Var,
    },
    Sigmoid {
        x: Var,
    },
    Softmax {
        x: Var,
    },
    Attention {
        q: Var,
        k: Var,
        v: Var,
        shape: AttnShape,
        probs: Vec<f64>,
    },
    MaskedMse {
        pred: Var,
        target: Vec<f64>,
        mask: Vec<bool>,
        count: usize,
    },
    Sum {
        x: Var,
    },
    Mean {
        x: Var,
    },
}

#[derive(Debug)]
struct Node {
    value: Tensor,
    op: Op,
    needs_grad: bool,
}

/// Reverse-mode record of one forward computation.
///
/// Nodes are appended in evaluation order, so the record is topologically
/// sorted by construction. [`Tape::backward`] consumes the tape.
#[derive(Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
    n_params: usize,
    degenerate_rows: usize,
}

/// Gradients of leaf values after a backward pass.
#[derive(Debug, Clone)]
pub struct Gradients {
    grads: Vec<Option<Tensor>>,
    n_params: usize,
}

impl Gradients {
    pub fn get(&self, v: Var) -> Option<&Tensor> {
        self.grads.get(v.0).and_then(Option::as_ref)
    }

    /// Gradient of a parameter loaded by [`Tape::with_params`]; `None` when
    /// the loss does not depend on it.
    pub fn param(&self, id: ParamId) -> Option<&Tensor> {
        if id.0 < self.n_params {
            self.get(Var(id.0))
        } else {
            None
        }
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    /// Adds `other` into `self` (gradient accumulation across tapes).
    pub fn accumulate(&mut self, other: &Gradients) -> Result<()> {
        if self.n_params != other.n_params {
            return Err(contract("accumulating gradients of different parameter sets"));
        }
        for i in 0..self.n_params {
            match (&mut self.grads[i], &other.grads[i]) {
                (Some(a), Some(b)) => {
                    for (x, y) in a.data_mut().iter_mut().zip(b.data()) {
                        *x += y;
                    }
                }
                (slot @ None, Some(b)) => *slot = Some(b.clone()),
                _ => {}
            }
        }
        Ok(())
    }

    pub fn scale(&mut self, c: f64) {
        for g in self.grads.iter_mut().flatten() {
            g.data_mut().iter_mut().for_each(|v| *v *= c);
        }
    }
}

fn shape_err(what: &str, a: &[usize], b: &[usize]) -> Error {
    Error::Shape(format!("{what}: incompatible shapes {a:?} and {b:?}"))
}

fn add_into(dst: &mut [f64], src: &[f64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d += s;
    }
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    /// A tape whose first nodes are copies of every parameter in `store`,
    /// so that `ParamId(i)` corresponds to [`Tape::param`]`(ParamId(i))`.
    pub fn with_params(store: &ParamStore) -> Self {
        let mut tape = Self::new();
        for t in store.tensors() {
            tape.push(t.clone(), Op::Leaf, true);
        }
        tape.n_params = store.len();
        tape
    }

    pub fn param(&self, id: ParamId) -> Var {
        assert!(id.0 < self.n_params, "parameter {} not on this tape", id.0);
        Var(id.0)
    }

    /// A differentiable input.
    pub fn leaf(&mut self, t: Tensor) -> Var {
        self.push(t, Op::Leaf, true)
    }

    /// A non-differentiable input.
    pub fn constant(&mut self, t: Tensor) -> Var {
        self.push(t, Op::Leaf, false)
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Softmax rows that had every entry masked (returned as zeros).
    pub fn degenerate_rows(&self) -> usize {
        self.degenerate_rows
    }

    fn push(&mut self, value: Tensor, op: Op, needs_grad: bool) -> Var {
        self.nodes.push(Node { value, op, needs_grad });
        Var(self.nodes.len() - 1)
    }

    fn ng(&self, v: Var) -> bool {
        self.nodes[v.0].needs_grad
    }

    /// Matrix product `[.., i, k] × [k, j]` (shared right operand) or
    /// `[.., i, k] × [.., k, j]` with equal leading extents.
    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (sa, sb) = (self.value(a).shape(), self.value(b).shape());
        if sa.len() < 2 || sb.len() < 2 {
            return Err(shape_err("matmul needs matrices", sa, sb));
        }
        let (i, k) = (sa[sa.len() - 2], sa[sa.len() - 1]);
        let (kb, j) = (sb[sb.len() - 2], sb[sb.len() - 1]);
        let lead_a = &sa[..sa.len() - 2];
        let lead_b = &sb[..sb.len() - 2];
        let shared = lead_b.is_empty();
        if k != kb || !(shared || lead_a == lead_b) {
            return Err(shape_err("matmul", sa, sb));
        }
        let batch: usize = lead_a.iter().product();
        let mut shape = lead_a.to_vec();
        shape.extend([i, j]);
        let mut out = vec![0.0; batch * i * j];
        let (da, db) = (self.value(a).data(), self.value(b).data());
        for t in 0..batch {
            let bb = if shared { db } else { &db[t * k * j..(t + 1) * k * j] };
            kernels::matmul(
                &da[t * i * k..(t + 1) * i * k],
                bb,
                i,
                k,
                j,
                &mut out[t * i * j..(t + 1) * i * j],
            );
        }
        let ng = self.ng(a) || self.ng(b);
        Ok(self.push(
            Tensor::new(shape, out)?,
            Op::MatMul {
                a,
                b,
                batch,
                i,
                k,
                j,
                shared,
            },
            ng,
        ))
    }

    /// Adds a `[j]` bias to every row of `x: [.., j]`.
    pub fn add_bias(&mut self, x: Var, b: Var) -> Result<Var> {
        let (sx, sb) = (self.value(x).shape(), self.value(b).shape());
        let j = *sx.last().unwrap();
        if sb != [j] {
            return Err(shape_err("add_bias", sx, sb));
        }
        let bias = self.value(b).data();
        let mut out = self.value(x).data().to_vec();
        for row in out.chunks_exact_mut(j) {
            add_into(row, bias);
        }
        let t = Tensor::new(sx.to_vec(), out)?;
        let ng = self.ng(x) || self.ng(b);
        Ok(self.push(t, Op::AddBias { x, b }, ng))
    }

    /// `x · w (+ b)`.
    pub fn linear(&mut self, x: Var, w: Var, b: Option<Var>) -> Result<Var> {
        let y = self.matmul(x, w)?;
        match b {
            Some(b) => self.add_bias(y, b),
            None => Ok(y),
        }
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let (ta, tb) = (self.value(a), self.value(b));
        if ta.shape() != tb.shape() {
            return Err(shape_err("add", ta.shape(), tb.shape()));
        }
        let out = ta.data().iter().zip(tb.data()).map(|(x, y)| x + y).collect();
        let t = Tensor::new(ta.shape().to_vec(), out)?;
        let ng = self.ng(a) || self.ng(b);
        Ok(self.push(t, Op::Add { a, b }, ng))
    }

    pub fn scale(&mut self, x: Var, c: f64) -> Var {
        let tx = self.value(x);
        let t = Tensor::new(tx.shape().to_vec(), tx.data().iter().map(|v| v * c).collect()).unwrap();
        let ng = self.ng(x);
        self.push(t, Op::Scale { x, c }, ng)
    }

    /// Row-wise layer normalization over the last extent, then `gain ∘ x̂ + bias`.
    pub fn layer_norm(&mut self, x: Var, g: Var, b: Var) -> Result<Var> {
        let sx = self.value(x).shape();
        let d = *sx.last().unwrap();
        if self.value(g).shape() != [d] || self.value(b).shape() != [d] {
            return Err(shape_err("layer_norm", sx, self.value(g).shape()));
        }
        let tx = self.value(x);
        let rows = tx.rows();
        let mut out = vec![0.0; tx.len()];
        let mut xhat = vec![0.0; tx.len()];
        let mut inv = vec![0.0; rows];
        kernels::layer_norm(
            tx.data(),
            self.value(g).data(),
            self.value(b).data(),
            d,
            &mut out,
            Some((&mut xhat, &mut inv)),
        );
        let t = Tensor::new(tx.shape().to_vec(), out)?;
        let ng = self.ng(x) || self.ng(g) || self.ng(b);
        Ok(self.push(t, Op::LayerNorm { x, g, b, xhat, inv }, ng))
    }

    pub fn relu(&mut self, x: Var) -> Var {
        let tx = self.value(x);
        let t = Tensor::new(tx.shape().to_vec(), tx.data().iter().map(|v| v.max(0.0)).collect()).unwrap();
        let ng = self.ng(x);
        self.push(t, Op::Relu { x }, ng)
    }

    pub fn sigmoid(&mut self, x: Var) -> Var {
        let tx = self.value(x);
        let t = Tensor::new(
            tx.shape().to_vec(),
            tx.data().iter().map(|&v| kernels::sigmoid(v)).collect(),
        )
        .unwrap();
        let ng = self.ng(x);
        self.push(t, Op::Sigmoid { x }, ng)
    }

    /// Softmax over the last extent. `mask` (true = visible) is either one
    /// flag per element or one row of flags broadcast to every row. Fully
    /// masked rows become zeros and are counted in [`Tape::degenerate_rows`].
    pub fn softmax(&mut self, x: Var, mask: Option<&[bool]>) -> Result<Var> {
        let tx = self.value(x);
        let n = tx.cols();
        if let Some(m) = mask {
            if m.len() != n && m.len() != tx.len() {
                return Err(shape_err("softmax mask", tx.shape(), &[m.len()]));
            }
        }
        let mut out = tx.data().to_vec();
        let mut degenerate = 0;
        for (r, row) in out.chunks_exact_mut(n).enumerate() {
            let ok = match mask {
                None => kernels::softmax_masked(row, |_| true),
                Some(m) if m.len() == n => kernels::softmax_masked(row, |j| m[j]),
                Some(m) => kernels::softmax_masked(row, |j| m[r * n + j]),
            };
            if !ok {
                degenerate += 1;
            }
        }
        let t = Tensor::new(tx.shape().to_vec(), out)?;
        self.degenerate_rows += degenerate;
        let ng = self.ng(x);
        Ok(self.push(t, Op::Softmax { x }, ng))
    }

    /// Fused multi-head scaled dot-product attention on projected inputs
    /// `q: [batch·q_len, width]`, `k, v: [batch·kv_len, width]`.
    pub fn attention(&mut self, q: Var, k: Var, v: Var, shape: AttnShape) -> Result<Var> {
        if shape.heads == 0 || shape.width % shape.heads != 0 {
            return Err(Error::Config(format!(
                "width {} is not divisible by {} heads",
                shape.width, shape.heads
            )));
        }
        if shape.causal && shape.kv_len < shape.q_len {
            return Err(contract("causal attention needs at least as many keys as queries"));
        }
        let want_q = [shape.batch * shape.q_len, shape.width];
        let want_kv = [shape.batch * shape.kv_len, shape.width];
        for (var, want) in [(q, want_q), (k, want_kv), (v, want_kv)] {
            if self.value(var).shape() != want {
                return Err(shape_err("attention", self.value(var).shape(), &want));
            }
        }
        let mut out = vec![0.0; want_q[0] * want_q[1]];
        let mut probs = vec![0.0; shape.probs_len()];
        kernels::attention(
            self.value(q).data(),
            self.value(k).data(),
            self.value(v).data(),
            shape,
            &mut out,
            Some(&mut probs),
        );
        let t = Tensor::new(want_q.to_vec(), out)?;
        let ng = self.ng(q) || self.ng(k) || self.ng(v);
        Ok(self.push(t, Op::Attention { q, k, v, shape, probs }, ng))
    }

    /// Mean of `(pred − target)²` over the entries where `mask` holds.
    pub fn masked_mse(&mut self, pred: Var, target: &Tensor, mask: &[bool]) -> Result<Var> {
        let tp = self.value(pred);
        if tp.shape() != target.shape() || mask.len() != tp.len() {
            return Err(shape_err("masked_mse", tp.shape(), target.shape()));
        }
        let count = mask.iter().filter(|m| **m).count();
        if count == 0 {
            return Err(contract("masked_mse needs at least one unmasked entry"));
        }
        let sse: f64 = tp
            .data()
            .iter()
            .zip(target.data())
            .zip(mask)
            .filter(|(_, m)| **m)
            .map(|((p, t), _)| (p - t) * (p - t))
            .sum();
        let ng = self.ng(pred);
        let op = Op::MaskedMse {
            pred,
            target: target.data().to_vec(),
            mask: mask.to_vec(),
            count,
        };
        Ok(self.push(Tensor::scalar(sse / count as f64), op, ng))
    }

    pub fn sum(&mut self, x: Var) -> Var {
        let s = self.value(x).data().iter().sum();
        let ng = self.ng(x);
        self.push(Tensor::scalar(s), Op::Sum { x }, ng)
    }

    pub fn mean(&mut self, x: Var) -> Var {
        let tx = self.value(x);
        let s = tx.data().iter().sum::<f64>() / tx.len() as f64;
        let ng = self.ng(x);
        self.push(Tensor::scalar(s), Op::Mean { x }, ng)
    }

    /// Back-propagates from the scalar `loss` and returns leaf gradients.
    pub fn backward(self, loss: Var) -> Result<Gradients> {
        if self.value(loss).len() != 1 {
            return Err(Error::Shape(format!(
                "backward needs a scalar loss, got shape {:?}",
                self.value(loss).shape()
            )));
        }
        let nodes = self.nodes;
        let mut grads: Vec<Option<Vec<f64>>> = vec![None; nodes.len()];
        grads[loss.0] = Some(vec![1.0]);

        for idx in (0..=loss.0).rev() {
            let node = &nodes[idx];
            if matches!(node.op, Op::Leaf) || !node.needs_grad {
                continue;
            }
            let Some(g) = grads[idx].take() else { continue };
            let y = node.value.data();
            match &node.op {
                Op::Leaf => unreachable!(),
                Op::MatMul {
                    a,
                    b,
                    batch,
                    i,
                    k,
                    j,
                    shared,
                } => {
                    let (i, k, j) = (*i, *k, *j);
                    let da = nodes[a.0].value.data();
                    let db = nodes[b.0].value.data();
                    if let Some(ga) = slot(&mut grads, &nodes, *a) {
                        for t in 0..*batch {
                            let bb = if *shared { db } else { &db[t * k * j..(t + 1) * k * j] };
                            kernels::matmul_bt_acc(
                                &g[t * i * j..(t + 1) * i * j],
                                bb,
                                i,
                                k,
                                j,
                                &mut ga[t * i * k..(t + 1) * i * k],
                            );
                        }
                    }
                    if let Some(gb) = slot(&mut grads, &nodes, *b) {
                        if *shared {
                            kernels::matmul_at_acc(da, &g, batch * i, k, j, gb);
                        } else {
                            for t in 0..*batch {
                                kernels::matmul_at_acc(
                                    &da[t * i * k..(t + 1) * i * k],
                                    &g[t * i * j..(t + 1) * i * j],
                                    i,
                                    k,
                                    j,
                                    &mut gb[t * k * j..(t + 1) * k * j],
                                );
                            }
                        }
                    }
                }
                Op::AddBias { x, b } => {
                    if let Some(gx) = slot(&mut grads, &nodes, *x) {
                        add_into(gx, &g);
                    }
                    if let Some(gb) = slot(&mut grads, &nodes, *b) {
                        let j = gb.len();
                        for row in g.chunks_exact(j) {
                            add_into(gb, row);
                        }
                    }
                }
                Op::Add { a, b } => {
                    if let Some(ga) = slot(&mut grads, &nodes, *a) {
                        add_into(ga, &g);
                    }
                    if let Some(gb) = slot(&mut grads, &nodes, *b) {
                        add_into(gb, &g);
                    }
                }
                Op::Scale { x, c } => {
                    if let Some(gx) = slot(&mut grads, &nodes, *x) {
                        for (d, s) in gx.iter_mut().zip(&g) {
                            *d += c * s;
                        }
                    }
                }
                Op::LayerNorm {
                    x,
                    g: gain,
                    b,
                    xhat,
                    inv,
                } => {
                    let d = nodes[gain.0].value.len();
                    let gv = nodes[gain.0].value.data().to_vec();
                    if let Some(gg) = slot(&mut grads, &nodes, *gain) {
                        for (gr, xr) in g.chunks_exact(d).zip(xhat.chunks_exact(d)) {
                            for c in 0..d {
                                gg[c] += gr[c] * xr[c];
                            }
                        }
                    }
                    if let Some(gb) = slot(&mut grads, &nodes, *b) {
                        for gr in g.chunks_exact(d) {
                            add_into(gb, gr);
                        }
                    }
                    if let Some(gx) = slot(&mut grads, &nodes, *x) {
                        let mut dxh = vec![0.0; d];
                        for (r, (gr, xr)) in g.chunks_exact(d).zip(xhat.chunks_exact(d)).enumerate() {
                            for c in 0..d {
                                dxh[c] = gr[c] * gv[c];
                            }
                            let s1: f64 = dxh.iter().sum();
                            let s2: f64 = dxh.iter().zip(xr).map(|(a, b)| a * b).sum();
                            let f = inv[r] / d as f64;
                            let out = &mut gx[r * d..(r + 1) * d];
                            for c in 0..d {
                                out[c] += f * (d as f64 * dxh[c] - s1 - xr[c] * s2);
                            }
                        }
                    }
                }
                Op::Relu { x } => {
                    if let Some(gx) = slot(&mut grads, &nodes, *x) {
                        for ((d, s), yv) in gx.iter_mut().zip(&g).zip(y) {
                            if *yv > 0.0 {
                                *d += s;
                            }
                        }
                    }
                }
                Op::Sigmoid { x } => {
                    if let Some(gx) = slot(&mut grads, &nodes, *x) {
                        for ((d, s), yv) in gx.iter_mut().zip(&g).zip(y) {
                            *d += s * yv * (1.0 - yv);
                        }
                    }
                }
                Op::Softmax { x } => {
                    let n = node.value.cols();
                    if let Some(gx) = slot(&mut grads, &nodes, *x) {
                        for ((gxr, gr), yr) in gx.chunks_exact_mut(n).zip(g.chunks_exact(n)).zip(y.chunks_exact(n)) {
                            let t: f64 = gr.iter().zip(yr).map(|(a, b)| a * b).sum();
                            for c in 0..n {
                                gxr[c] += yr[c] * (gr[c] - t);
                            }
                        }
                    }
                }
                Op::Attention { q, k, v, shape, probs } => {
                    let (dq, dk, dv) = attention_backward(
                        nodes[q.0].value.data(),
                        nodes[k.0].value.data(),
                        nodes[v.0].value.data(),
                        probs,
                        &g,
                        *shape,
                    );
                    for (var, d) in [(*q, dq), (*k, dk), (*v, dv)] {
                        if let Some(gx) = slot(&mut grads, &nodes, var) {
                            add_into(gx, &d);
                        }
                    }
                }
                Op::MaskedMse {
                    pred,
                    target,
                    mask,
                    count,
                } => {
                    let p = nodes[pred.0].value.data();
                    let f = 2.0 * g[0] / *count as f64;
                    if let Some(gp) = slot(&mut grads, &nodes, *pred) {
                        for i in 0..p.len() {
                            if mask[i] {
                                gp[i] += f * (p[i] - target[i]);
                            }
                        }
                    }
                }
                Op::Sum { x } => {
                    if let Some(gx) = slot(&mut grads, &nodes, *x) {
                        gx.iter_mut().for_each(|v| *v += g[0]);
                    }
                }
                Op::Mean { x } => {
                    if let Some(gx) = slot(&mut grads, &nodes, *x) {
                        let f = g[0] / gx.len() as f64;
                        gx.iter_mut().for_each(|v| *v += f);
                    }
                }
            }
        }

        let grads = nodes
            .iter()
            .zip(grads)
            .map(|(n, g)| match (&n.op, g) {
                (Op::Leaf, Some(g)) if n.needs_grad => Some(Tensor::new(n.value.shape().to_vec(), g).unwrap()),
                _ => None,
            })
            .collect();
        Ok(Gradients {
            grads,
            n_params: self.n_params,
        })
    }
}

fn slot<'a>(grads: &'a mut [Option<Vec<f64>>], nodes: &[Node], v: Var) -> Option<&'a mut Vec<f64>> {
    let node = &nodes[v.0];
    if !node.needs_grad {
        return None;
    }
    let len = node.value.len();
    Some(grads[v.0].get_or_insert_with(|| vec![0.0; len]))
}

fn attention_backward(
    q: &[f64],
    k: &[f64],
    v: &[f64],
    probs: &[f64],
    g: &[f64],
    s: AttnShape,
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let (w, dh, scale) = (s.width, s.head_dim(), s.scale());
    let mut dq = vec![0.0; q.len()];
    let mut dk = vec![0.0; k.len()];
    let mut dv = vec![0.0; v.len()];
    let mut dp = vec![0.0; s.kv_len];
    for b in 0..s.batch {
        for h in 0..s.heads {
            let off = h * dh;
            for i in 0..s.q_len {
                let qrow = (b * s.q_len + i) * w + off;
                let gi = &g[qrow..qrow + dh];
                let p = &probs[((b * s.heads + h) * s.q_len + i) * s.kv_len..][..s.kv_len];
                let vis = s.visible(i);
                let mut t = 0.0;
                for j in 0..vis {
                    let krow = (b * s.kv_len + j) * w + off;
                    dp[j] = kernels::dot(gi, &v[krow..krow + dh]);
                    t += p[j] * dp[j];
                    for (o, gv) in dv[krow..krow + dh].iter_mut().zip(gi) {
                        *o += p[j] * gv;
                    }
                }
                for j in 0..vis {
                    let ds = p[j] * (dp[j] - t) * scale;
                    if ds == 0.0 {
                        continue;
                    }
                    let krow = (b * s.kv_len + j) * w + off;
                    for c in 0..dh {
                        dq[qrow + c] += ds * k[krow + c];
                        dk[krow + c] += ds * q[qrow + c];
                    }
                }
            }
        }
    }
    (dq, dk, dv)
}
