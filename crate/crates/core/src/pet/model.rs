use rand::Rng;

use super::config::{OutputHead, PetConfig};
use super::data::Example;
use crate::error::{Error, Result};
use crate::nn::{uniform_init, LayerNorm, Linear, Mlp, MultiHeadAttention, ParamId, ParamStore, Tape, Tensor, Var};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct EncoderBlock {
    pub ln1: LayerNorm,
    pub attn: MultiHeadAttention,
    pub ln2: LayerNorm,
    pub mlp: Mlp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct DecoderBlock {
    pub ln1: LayerNorm,
    pub self_attn: MultiHeadAttention,
    pub cross_attn: MultiHeadAttention,
    pub ln2: LayerNorm,
    pub mlp: Mlp,
}

/// Parameter layout; fully determined by the configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Layout {
    pub e_dim: ParamId,
    pub e_obj: ParamId,
    pub encoder: Vec<EncoderBlock>,
    pub decoder: Vec<DecoderBlock>,
    pub head: Linear,
}

/// The population-to-population transformer.
#[derive(Debug, Clone, PartialEq)]
pub struct PetModel {
    config: PetConfig,
    params: ParamStore,
    pub(crate) layout: Layout,
}

/// Zero-pads every row to `width`, stacking rows into `[rows, width]`.
pub(crate) fn padded<'a>(rows: impl IntoIterator<Item = &'a [f64]>, width: usize) -> Result<Tensor> {
    let mut data = Vec::new();
    let mut n = 0;
    for r in rows {
        if r.len() > width {
            return Err(Error::Capacity(format!(
                "row of length {} exceeds padding width {width}",
                r.len()
            )));
        }
        data.extend_from_slice(r);
        data.resize((n + 1) * width, 0.0);
        n += 1;
    }
    Tensor::new(vec![n, width], data)
}

impl PetModel {
    /// A freshly initialized model.
    pub fn new<R: Rng + ?Sized>(config: PetConfig, rng: &mut R) -> Result<Self> {
        config.validate()?;
        let (w, h) = (config.width, config.hidden());
        let mut p = ParamStore::new();
        let e_dim = p.add("e_dim", uniform_init(rng, config.d_hat, vec![config.d_hat, w])?);
        let e_obj = p.add("e_obj", uniform_init(rng, config.m_hat, vec![config.m_hat, w])?);
        let mut encoder = Vec::with_capacity(config.layers);
        for l in 0..config.layers {
            let name = format!("enc{l}");
            encoder.push(EncoderBlock {
                ln1: LayerNorm::new(&mut p, &format!("{name}.ln1"), w)?,
                attn: MultiHeadAttention::new(&mut p, &format!("{name}.attn"), w, config.heads, rng)?,
                ln2: LayerNorm::new(&mut p, &format!("{name}.ln2"), w)?,
                mlp: Mlp::new(&mut p, &format!("{name}.mlp"), w, h, rng)?,
            });
        }
        let mut decoder = Vec::with_capacity(config.layers);
        for l in 0..config.layers {
            let name = format!("dec{l}");
            decoder.push(DecoderBlock {
                ln1: LayerNorm::new(&mut p, &format!("{name}.ln1"), w)?,
                self_attn: MultiHeadAttention::new(&mut p, &format!("{name}.self"), w, config.heads, rng)?,
                cross_attn: MultiHeadAttention::new(&mut p, &format!("{name}.cross"), w, config.heads, rng)?,
                ln2: LayerNorm::new(&mut p, &format!("{name}.ln2"), w)?,
                mlp: Mlp::new(&mut p, &format!("{name}.mlp"), w, h, rng)?,
            });
        }
        let head = Linear::new(&mut p, "head", w, config.d_hat, true, rng)?;
        Ok(Self {
            config,
            params: p,
            layout: Layout {
                e_dim,
                e_obj,
                encoder,
                decoder,
                head,
            },
        })
    }

    /// Rebuilds a model from a configuration and parameter tensors in
    /// layout order, checking every shape.
    pub fn from_parts(config: PetConfig, tensors: Vec<Tensor>) -> Result<Self> {
        let mut rng = crate::rng::rng_from_seed(0);
        let mut model = Self::new(config, &mut rng)?;
        if tensors.len() != model.params.len() {
            return Err(Error::Shape(format!(
                "expected {} parameter tensors, got {}",
                model.params.len(),
                tensors.len()
            )));
        }
        for (i, (slot, t)) in model.params.tensors_mut().iter_mut().zip(tensors).enumerate() {
            if slot.shape() != t.shape() {
                return Err(Error::Shape(format!(
                    "parameter {i} has shape {:?}, expected {:?}",
                    t.shape(),
                    slot.shape()
                )));
            }
            *slot = t;
        }
        Ok(model)
    }

    pub fn config(&self) -> &PetConfig {
        &self.config
    }

    pub fn params(&self) -> &ParamStore {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParamStore {
        &mut self.params
    }

    pub fn parameter_count(&self) -> usize {
        self.params.num_scalars()
    }

    /// `D_0`: zero-padded normalized decision rows times `E_dim`.
    pub fn embed_dimension(&self, tape: &mut Tape, xs: &Tensor) -> Result<Var> {
        let x = tape.constant(xs.clone());
        let e = tape.param(self.layout.e_dim);
        tape.matmul(x, e)
    }

    /// `O_0`: zero-padded normalized objective rows times `E_obj`.
    pub fn encode_objective(&self, tape: &mut Tape, fs: &Tensor) -> Result<Var> {
        let f = tape.constant(fs.clone());
        let e = tape.param(self.layout.e_obj);
        tape.matmul(f, e)
    }

    /// `Z_0 = D_0 + O_0` for stacked sequences.
    pub fn embed<'a>(
        &self,
        tape: &mut Tape,
        xs: impl IntoIterator<Item = &'a [f64]>,
        fs: impl IntoIterator<Item = &'a [f64]>,
    ) -> Result<Var> {
        let d0 = self.embed_dimension(tape, &padded(xs, self.config.d_hat)?)?;
        let o0 = self.encode_objective(tape, &padded(fs, self.config.m_hat)?)?;
        tape.add(d0, o0)
    }

    /// Encoder stack; returns the output of every layer.
    pub fn encode(&self, tape: &mut Tape, z0: Var, batch: usize) -> Result<Vec<Var>> {
        let mut z = z0;
        let mut outs = Vec::with_capacity(self.config.layers);
        for b in &self.layout.encoder {
            let h = b.ln1.forward(tape, z)?;
            let a = b.attn.forward(tape, h, h, batch, false)?;
            let z1 = tape.add(a, z)?;
            let h = b.ln2.forward(tape, z1)?;
            let f = b.mlp.forward(tape, h)?;
            z = tape.add(f, z1)?;
            outs.push(z);
        }
        Ok(outs)
    }

    /// Decoder stack over `z0` with causal self-attention; layer `l` attends
    /// to encoder output `memory[l]`.
    pub fn decode(&self, tape: &mut Tape, z0: Var, memory: &[Var], batch: usize) -> Result<Var> {
        let mut z = z0;
        for (b, &mem) in self.layout.decoder.iter().zip(memory) {
            let h = b.ln1.forward(tape, z)?;
            let a = b.self_attn.forward(tape, h, h, batch, true)?;
            let z1 = tape.add(a, z)?;
            let c = b.cross_attn.forward(tape, z1, mem, batch, false)?;
            let s = tape.add(c, z1)?;
            let h = b.ln2.forward(tape, s)?;
            let f = b.mlp.forward(tape, h)?;
            z = tape.add(f, c)?;
        }
        Ok(z)
    }

    /// Output head: normalized decision rows of width `d_hat`, of which the
    /// first `d` are meaningful.
    pub fn head(&self, tape: &mut Tape, z: Var, d: usize) -> Result<Var> {
        let y = self.layout.head.forward(tape, z)?;
        match self.config.head {
            OutputHead::Logistic => Ok(tape.sigmoid(y)),
            OutputHead::Softmax => {
                let mask: Vec<bool> = (0..self.config.d_hat).map(|c| c < d).collect();
                tape.softmax(y, Some(&mask))
            }
        }
    }

    fn check_batch(&self, batch: &[&Example]) -> Result<(usize, usize, usize, usize)> {
        let first = batch.first().ok_or_else(|| Error::Data("empty batch".into()))?;
        let key = first.shape_key();
        for ex in batch {
            ex.validate()?;
            if ex.shape_key() != key {
                return Err(Error::Data("batch mixes (d, m, N) shapes".into()));
            }
        }
        let (d, m, n_par, n_tgt) = key;
        self.config.check_capacity(d, m, n_par.max(n_tgt))?;
        Ok(key)
    }

    /// Teacher-forced predictions for a batch of equally shaped examples.
    ///
    /// The decoder reads targets `t_0 … t_{N−2}` and position `i` predicts
    /// `t_{i+1}`. Returns the prediction (`[batch·(N−1), d_hat]`), the
    /// padded target and the loss mask selecting the first `d` columns.
    pub fn teacher_forced(&self, tape: &mut Tape, batch: &[&Example]) -> Result<(Var, Tensor, Vec<bool>)> {
        let (d, _, _, n_tgt) = self.check_batch(batch)?;
        let b = batch.len();
        let z0 = self.embed(
            tape,
            batch.iter().flat_map(|e| e.parents_x.iter().map(Vec::as_slice)),
            batch.iter().flat_map(|e| e.parents_f.iter().map(Vec::as_slice)),
        )?;
        let memory = self.encode(tape, z0, b)?;
        let zd = self.embed(
            tape,
            batch
                .iter()
                .flat_map(|e| e.target_x[..n_tgt - 1].iter().map(Vec::as_slice)),
            batch
                .iter()
                .flat_map(|e| e.target_f[..n_tgt - 1].iter().map(Vec::as_slice)),
        )?;
        let z = self.decode(tape, zd, &memory, b)?;
        let pred = self.head(tape, z, d)?;
        let target = padded(
            batch.iter().flat_map(|e| e.target_x[1..].iter().map(Vec::as_slice)),
            self.config.d_hat,
        )?;
        let rows = target.rows();
        let mask = (0..rows * self.config.d_hat)
            .map(|i| i % self.config.d_hat < d)
            .collect();
        Ok((pred, target, mask))
    }

    /// Mean squared error of teacher-forced predictions over the first `d`
    /// components of every predicted position.
    pub fn teacher_forced_loss(&self, tape: &mut Tape, batch: &[&Example]) -> Result<Var> {
        let (pred, target, mask) = self.teacher_forced(tape, batch)?;
        tape.masked_mse(pred, &target, &mask)
    }

    /// Loss and gradients of one batch.
    pub fn loss_and_gradients(&self, batch: &[&Example]) -> Result<(f64, crate::nn::Gradients)> {
        let mut tape = Tape::with_params(&self.params);
        let loss = self.teacher_forced_loss(&mut tape, batch)?;
        let value = tape.value(loss).data()[0];
        Ok((value, tape.backward(loss)?))
    }

    /// Loss of one batch without gradients.
    pub fn loss(&self, batch: &[&Example]) -> Result<f64> {
        let mut tape = Tape::with_params(&self.params);
        let loss = self.teacher_forced_loss(&mut tape, batch)?;
        Ok(tape.value(loss).data()[0])
    }

    /// Reference decoding step by full recomputation: the normalized
    /// decision vector (length `d`) the model emits after reading `context`.
    pub fn decode_step(
        &self,
        parents_x: &[Vec<f64>],
        parents_f: &[Vec<f64>],
        context_x: &[Vec<f64>],
        context_f: &[Vec<f64>],
        d: usize,
    ) -> Result<Vec<f64>> {
        if context_x.is_empty() || context_x.len() != context_f.len() {
            return Err(crate::error::contract("decoding needs a non-empty, evaluated context"));
        }
        let m = parents_f.first().map_or(0, Vec::len);
        self.config.check_capacity(d, m, parents_x.len().max(context_x.len()))?;
        let mut tape = Tape::with_params(&self.params);
        let z0 = self.embed(
            &mut tape,
            parents_x.iter().map(Vec::as_slice),
            parents_f.iter().map(Vec::as_slice),
        )?;
        let memory = self.encode(&mut tape, z0, 1)?;
        let zd = self.embed(
            &mut tape,
            context_x.iter().map(Vec::as_slice),
            context_f.iter().map(Vec::as_slice),
        )?;
        let z = self.decode(&mut tape, zd, &memory, 1)?;
        let out = self.head(&mut tape, z, d)?;
        let t = tape.value(out);
        Ok(t.row(t.rows() - 1)[..d].to_vec())
    }
}
