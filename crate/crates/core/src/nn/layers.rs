use rand::Rng;
use serde::{Deserialize, Serialize};

use super::kernels::{self, AttnShape};
use super::params::{uniform_init, ParamId, ParamStore};
use super::tape::{Tape, Var};
use super::tensor::Tensor;
use crate::error::{Error, Result};

/// `y = x · W + b` with `W: [fan_in, fan_out]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Linear {
    pub w: usize,
    pub b: Option<usize>,
    pub fan_in: usize,
    pub fan_out: usize,
}

impl Linear {
    pub fn new<R: Rng + ?Sized>(
        store: &mut ParamStore,
        name: &str,
        fan_in: usize,
        fan_out: usize,
        bias: bool,
        rng: &mut R,
    ) -> Result<Self> {
        let w = store.add(format!("{name}.w"), uniform_init(rng, fan_in, vec![fan_in, fan_out])?);
        let b = if bias {
            Some(store.add(format!("{name}.b"), Tensor::zeros(vec![fan_out])?).0)
        } else {
            None
        };
        Ok(Self {
            w: w.0,
            b,
            fan_in,
            fan_out,
        })
    }

    pub fn forward(&self, tape: &mut Tape, x: Var) -> Result<Var> {
        let w = tape.param(ParamId(self.w));
        let b = self.b.map(|b| tape.param(ParamId(b)));
        tape.linear(x, w, b)
    }

    /// Inference on `n` stacked rows.
    pub fn apply(&self, store: &ParamStore, x: &[f64], n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n * self.fan_out];
        kernels::matmul(
            x,
            store.get(ParamId(self.w)).data(),
            n,
            self.fan_in,
            self.fan_out,
            &mut out,
        );
        if let Some(b) = self.b {
            let bias = store.get(ParamId(b)).data();
            for row in out.chunks_exact_mut(self.fan_out) {
                for (o, bv) in row.iter_mut().zip(bias) {
                    *o += bv;
                }
            }
        }
        out
    }
}

/// Layer-norm gain and bias.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerNorm {
    pub gain: usize,
    pub bias: usize,
    pub dim: usize,
}

impl LayerNorm {
    pub fn new(store: &mut ParamStore, name: &str, dim: usize) -> Result<Self> {
        let gain = store.add(format!("{name}.gain"), Tensor::full(vec![dim], 1.0)?).0;
        let bias = store.add(format!("{name}.bias"), Tensor::zeros(vec![dim])?).0;
        Ok(Self { gain, bias, dim })
    }

    pub fn forward(&self, tape: &mut Tape, x: Var) -> Result<Var> {
        let g = tape.param(ParamId(self.gain));
        let b = tape.param(ParamId(self.bias));
        tape.layer_norm(x, g, b)
    }

    pub fn apply(&self, store: &ParamStore, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        kernels::layer_norm(
            x,
            store.get(ParamId(self.gain)).data(),
            store.get(ParamId(self.bias)).data(),
            self.dim,
            &mut out,
            None,
        );
        out
    }
}

/// Multi-head attention with separate query/key/value/output projections.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiHeadAttention {
    pub q: Linear,
    pub k: Linear,
    pub v: Linear,
    pub o: Linear,
    pub heads: usize,
    pub width: usize,
}

impl MultiHeadAttention {
    pub fn new<R: Rng + ?Sized>(
        store: &mut ParamStore,
        name: &str,
        width: usize,
        heads: usize,
        rng: &mut R,
    ) -> Result<Self> {
        if heads == 0 || width % heads != 0 {
            return Err(Error::Config(format!(
                "width {width} is not divisible by {heads} heads"
            )));
        }
        Ok(Self {
            q: Linear::new(store, &format!("{name}.q"), width, width, true, rng)?,
            k: Linear::new(store, &format!("{name}.k"), width, width, true, rng)?,
            v: Linear::new(store, &format!("{name}.v"), width, width, true, rng)?,
            o: Linear::new(store, &format!("{name}.o"), width, width, true, rng)?,
            heads,
            width,
        })
    }

    fn shape(&self, batch: usize, q_len: usize, kv_len: usize, causal: bool) -> AttnShape {
        AttnShape {
            batch,
            q_len,
            kv_len,
            width: self.width,
            heads: self.heads,
            causal,
        }
    }

    /// Attention of `xq: [batch·q_len, D]` over `xkv: [batch·kv_len, D]`.
    pub fn forward(&self, tape: &mut Tape, xq: Var, xkv: Var, batch: usize, causal: bool) -> Result<Var> {
        let q_len = tape.value(xq).rows() / batch;
        let kv_len = tape.value(xkv).rows() / batch;
        let q = self.q.forward(tape, xq)?;
        let k = self.k.forward(tape, xkv)?;
        let v = self.v.forward(tape, xkv)?;
        let a = tape.attention(q, k, v, self.shape(batch, q_len, kv_len, causal))?;
        self.o.forward(tape, a)
    }

    /// Inference on already projected keys and values of one sequence.
    pub fn apply_projected(&self, store: &ParamStore, xq: &[f64], k: &[f64], v: &[f64], causal: bool) -> Vec<f64> {
        let q_len = xq.len() / self.width;
        let kv_len = k.len() / self.width;
        let q = self.q.apply(store, xq, q_len);
        let mut a = vec![0.0; q.len()];
        kernels::attention(&q, k, v, self.shape(1, q_len, kv_len, causal), &mut a, None);
        self.o.apply(store, &a, q_len)
    }
}

/// `linear(D → hidden) → ReLU → linear(hidden → D)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mlp {
    pub up: Linear,
    pub down: Linear,
}

impl Mlp {
    pub fn new<R: Rng + ?Sized>(
        store: &mut ParamStore,
        name: &str,
        width: usize,
        hidden: usize,
        rng: &mut R,
    ) -> Result<Self> {
        Ok(Self {
            up: Linear::new(store, &format!("{name}.up"), width, hidden, true, rng)?,
            down: Linear::new(store, &format!("{name}.down"), hidden, width, true, rng)?,
        })
    }

    pub fn forward(&self, tape: &mut Tape, x: Var) -> Result<Var> {
        let h = self.up.forward(tape, x)?;
        let h = tape.relu(h);
        self.down.forward(tape, h)
    }

    pub fn apply(&self, store: &ParamStore, x: &[f64], n: usize) -> Vec<f64> {
        let mut h = self.up.apply(store, x, n);
        h.iter_mut().for_each(|v| *v = v.max(0.0));
        self.down.apply(store, &h, n)
    }
}
