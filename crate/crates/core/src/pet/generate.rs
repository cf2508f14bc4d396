use rand::Rng;

use super::config::OutputHead;
use super::data::ObjectiveScaler;
use super::model::PetModel;
use crate::error::{contract, Error, Result};
use crate::mop::{
    denormalize_decision, evaluate_solution, normalize_decision, EvaluationBudget, Population, Problem, Solution,
};
use crate::nn::kernels::{self, sigmoid};
use crate::rng::RunRng;

/// Incremental decoder with cached keys and values. Produces the same
/// outputs as [`PetModel::decode_step`] without recomputing the prefix.
pub struct IncrementalDecoder<'m> {
    model: &'m PetModel,
    d: usize,
    /// Projected cross-attention keys and values per layer.
    cross: Vec<(Vec<f64>, Vec<f64>)>,
    /// Projected self-attention keys and values per layer, grown per token.
    cache: Vec<(Vec<f64>, Vec<f64>)>,
    len: usize,
}

impl<'m> IncrementalDecoder<'m> {
    /// Encodes the (normalized) parents once.
    pub fn new(model: &'m PetModel, parents_x: &[Vec<f64>], parents_f: &[Vec<f64>], d: usize) -> Result<Self> {
        let cfg = model.config();
        let m = parents_f.first().map_or(0, Vec::len);
        cfg.check_capacity(d, m, parents_x.len())?;
        let p = model.params();
        let n = parents_x.len();
        let mut z = embed_rows(model, parents_x, parents_f)?;
        let mut cross = Vec::with_capacity(cfg.layers);
        for (enc, dec) in model.layout.encoder.iter().zip(&model.layout.decoder) {
            let h = enc.ln1.apply(p, &z);
            let k = enc.attn.k.apply(p, &h, n);
            let v = enc.attn.v.apply(p, &h, n);
            let a = enc.attn.apply_projected(p, &h, &k, &v, false);
            let z1: Vec<f64> = a.iter().zip(&z).map(|(x, y)| x + y).collect();
            let h = enc.ln2.apply(p, &z1);
            let f = enc.mlp.apply(p, &h, n);
            z = f.iter().zip(&z1).map(|(x, y)| x + y).collect();
            cross.push((dec.cross_attn.k.apply(p, &z, n), dec.cross_attn.v.apply(p, &z, n)));
        }
        Ok(Self {
            model,
            d,
            cross,
            cache: vec![(Vec::new(), Vec::new()); cfg.layers],
            len: 0,
        })
    }

    /// Tokens consumed so far.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Feeds one evaluated, normalized token and returns the prediction for
    /// the next position (normalized, length `d`).
    pub fn push(&mut self, x: &[f64], f: &[f64]) -> Result<Vec<f64>> {
        let cfg = *self.model.config();
        if self.len + 1 > cfg.max_seq {
            return Err(Error::Capacity(format!(
                "decoder context exceeds max_seq {}",
                cfg.max_seq
            )));
        }
        let p = self.model.params();
        let mut z = embed_rows(self.model, &[x.to_vec()], &[f.to_vec()])?;
        for ((blk, (ck, cv)), (sk, sv)) in self.model.layout.decoder.iter().zip(&self.cross).zip(&mut self.cache) {
            let h = blk.ln1.apply(p, &z);
            sk.extend(blk.self_attn.k.apply(p, &h, 1));
            sv.extend(blk.self_attn.v.apply(p, &h, 1));
            let a = blk.self_attn.apply_projected(p, &h, sk, sv, false);
            let z1: Vec<f64> = a.iter().zip(&z).map(|(x, y)| x + y).collect();
            let c = blk.cross_attn.apply_projected(p, &z1, ck, cv, false);
            let s: Vec<f64> = c.iter().zip(&z1).map(|(x, y)| x + y).collect();
            let h = blk.ln2.apply(p, &s);
            let f = blk.mlp.apply(p, &h, 1);
            z = f.iter().zip(&c).map(|(x, y)| x + y).collect();
        }
        self.len += 1;
        let y = self.model.layout.head.apply(p, &z, 1);
        Ok(squash(&y, self.d, cfg.head))
    }
}

fn embed_rows(model: &PetModel, xs: &[Vec<f64>], fs: &[Vec<f64>]) -> Result<Vec<f64>> {
    let cfg = model.config();
    let p = model.params();
    let n = xs.len();
    let x = super::model::padded(xs.iter().map(Vec::as_slice), cfg.d_hat)?;
    let f = super::model::padded(fs.iter().map(Vec::as_slice), cfg.m_hat)?;
    let mut d0 = vec![0.0; n * cfg.width];
    let mut o0 = vec![0.0; n * cfg.width];
    kernels::matmul(
        x.data(),
        p.get(model.layout.e_dim).data(),
        n,
        cfg.d_hat,
        cfg.width,
        &mut d0,
    );
    kernels::matmul(
        f.data(),
        p.get(model.layout.e_obj).data(),
        n,
        cfg.m_hat,
        cfg.width,
        &mut o0,
    );
    Ok(d0.iter().zip(&o0).map(|(a, b)| a + b).collect())
}

fn squash(y: &[f64], d: usize, head: OutputHead) -> Vec<f64> {
    match head {
        OutputHead::Logistic => y[..d].iter().map(|&v| sigmoid(v)).collect(),
        OutputHead::Softmax => {
            let mut row = y.to_vec();
            kernels::softmax_masked(&mut row, |c| c < d);
            row.truncate(d);
            row
        }
    }
}

/// Offspring of one PET generation.
#[derive(Debug, Clone)]
pub struct Generated {
    pub population: Population,
    /// The budget ran out before `n` offspring existed.
    pub exhausted: bool,
}

fn evaluate_one(problem: &dyn Problem, budget: &EvaluationBudget, x: Vec<f64>) -> Result<Option<Solution>> {
    let r = budget.reserve(1);
    if r.granted() == 0 {
        return Ok(None);
    }
    let s = evaluate_solution(problem, x)?;
    r.commit(1);
    Ok(Some(s))
}

/// Autoregressively generates up to `n` offspring of `parents`.
///
/// The first offspring is a uniform random solution (the initialization
/// token); each decoded solution is evaluated as soon as it is produced and
/// fed back to the decoder. Every evaluation is charged to `budget`.
pub fn generate_population(
    parents: &Population,
    model: &PetModel,
    problem: &dyn Problem,
    budget: &EvaluationBudget,
    n: usize,
    rng: &mut RunRng,
) -> Result<Generated> {
    parents.require_evaluated()?;
    if parents.is_empty() {
        return Err(contract("cannot generate from an empty population"));
    }
    let spec = problem.spec();
    model
        .config()
        .check_capacity(spec.d(), spec.m(), parents.len().max(n))?;
    let generation = parents.generation() + 1;
    let scaler = ObjectiveScaler::fit_population(parents)?;
    let px: Vec<Vec<f64>> = parents.iter().map(|s| normalize_decision(s.x(), spec)).collect();
    let pf: Vec<Vec<f64>> = parents.iter().map(|s| scaler.normalize(s.f().unwrap())).collect();

    let mut out = Vec::with_capacity(n);
    let init: Vec<f64> = spec
        .lower()
        .iter()
        .zip(spec.upper())
        .map(|(lo, hi)| lo + rng.gen::<f64>() * (hi - lo))
        .collect();
    let Some(first) = evaluate_one(problem, budget, init)? else {
        return Ok(Generated {
            population: Population::new(out, generation),
            exhausted: true,
        });
    };
    out.push(first);

    let mut decoder = IncrementalDecoder::new(model, &px, &pf, spec.d())?;
    while out.len() < n {
        let last = out.last().unwrap();
        let u = decoder.push(
            &normalize_decision(last.x(), spec),
            &scaler.normalize(last.f().unwrap()),
        )?;
        match evaluate_one(problem, budget, denormalize_decision(&u, spec))? {
            Some(s) => out.push(s),
            None => break,
        }
    }
    let exhausted = out.len() < n;
    Ok(Generated {
        population: Population::new(out, generation),
        exhausted,
    })
}
