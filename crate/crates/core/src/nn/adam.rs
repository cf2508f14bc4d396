use serde::{Deserialize, Serialize};

use super::params::ParamStore;
use super::tape::Gradients;
use crate::error::{contract, Result};

/// Hyper-parameters of Adam with decoupled weight decay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay: 0.1,
        }
    }
}

/// Optimizer state: first and second moments per parameter tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub cfg: AdamConfig,
    pub step: u64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl AdamState {
    pub fn new(params: &ParamStore, cfg: AdamConfig) -> Self {
        let zeros: Vec<Vec<f64>> = params.tensors().iter().map(|t| vec![0.0; t.len()]).collect();
        Self {
            cfg,
            step: 0,
            m: zeros.clone(),
            v: zeros,
        }
    }

    /// One update. Parameters without a gradient are treated as having a
    /// zero gradient (they still decay).
    pub fn step(&mut self, params: &mut ParamStore, grads: &Gradients) -> Result<()> {
        if params.len() != self.m.len() || grads.n_params() != params.len() {
            return Err(contract("optimizer state does not match the parameter set"));
        }
        self.step += 1;
        let AdamConfig {
            lr,
            beta1,
            beta2,
            eps,
            weight_decay,
        } = self.cfg;
        let bc1 = 1.0 - beta1.powi(self.step as i32);
        let bc2 = 1.0 - beta2.powi(self.step as i32);
        for (i, p) in params.tensors_mut().iter_mut().enumerate() {
            let g = grads.param(super::params::ParamId(i)).map(|t| t.data());
            let (m, v) = (&mut self.m[i], &mut self.v[i]);
            for (j, w) in p.data_mut().iter_mut().enumerate() {
                let gj = g.map_or(0.0, |g| g[j]);
                *w -= lr * weight_decay * *w;
                m[j] = beta1 * m[j] + (1.0 - beta1) * gj;
                v[j] = beta2 * v[j] + (1.0 - beta2) * gj * gj;
                let mhat = m[j] / bc1;
                let vhat = v[j] / bc2;
                *w -= lr * mhat / (vhat.sqrt() + eps);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{Tape, Tensor};

    fn store(w: Vec<f64>) -> ParamStore {
        let mut s = ParamStore::new();
        s.add("w", Tensor::new(vec![w.len()], w).unwrap());
        s
    }

    fn grads_of(s: &ParamStore, f: impl Fn(&mut Tape, crate::nn::Var) -> crate::nn::Var) -> Gradients {
        let mut t = Tape::with_params(s);
        let w = t.param(crate::nn::ParamId(0));
        let loss = f(&mut t, w);
        t.backward(loss).unwrap()
    }

    #[test]
    fn zero_gradient_without_decay_is_identity() {
        let mut s = store(vec![0.3, -1.2]);
        let before = s.clone();
        let cfg = AdamConfig {
            weight_decay: 0.0,
            ..Default::default()
        };
        let mut adam = AdamState::new(&s, cfg);
        let g = grads_of(&s, |t, w| {
            let z = t.scale(w, 0.0);
            t.sum(z)
        });
        for _ in 0..5 {
            adam.step(&mut s, &g).unwrap();
        }
        assert_eq!(s, before);
    }

    #[test]
    fn first_step_moves_by_lr_against_gradient_sign() {
        let mut s = store(vec![0.5, -2.0, 1.0]);
        let cfg = AdamConfig {
            weight_decay: 0.0,
            lr: 0.01,
            ..Default::default()
        };
        let mut adam = AdamState::new(&s, cfg);
        // Loss Σ c_i w_i, built as (0 + w)·c, so the gradient is c.
        let g = grads_of(&s, |t, w| {
            let c = t.constant(Tensor::new(vec![3, 1], vec![3.0, -0.5, 0.0]).unwrap());
            let row = zero_row(t);
            let wr = t.add_bias(row, w).unwrap();
            let p = t.matmul(wr, c).unwrap();
            t.sum(p)
        });
        adam.step(&mut s, &g).unwrap();
        let d = s.tensors()[0].data();
        // m̂ = g, v̂ = g², update = lr·g/(|g|+ε).
        let expect = [0.5 - 0.01 * 3.0 / (3.0 + 1e-8), -2.0 + 0.01 * 0.5 / (0.5 + 1e-8), 1.0];
        for (a, b) in d.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15, "{a} vs {b}");
        }
    }

    fn zero_row(t: &mut Tape) -> crate::nn::Var {
        t.constant(Tensor::zeros(vec![1, 3]).unwrap())
    }

    #[test]
    fn decoupled_decay_shrinks_weights() {
        let mut s = store(vec![2.0]);
        let cfg = AdamConfig {
            weight_decay: 0.1,
            lr: 0.5,
            ..Default::default()
        };
        let mut adam = AdamState::new(&s, cfg);
        let g = grads_of(&s, |t, w| {
            let z = t.scale(w, 0.0);
            t.sum(z)
        });
        adam.step(&mut s, &g).unwrap();
        assert!((s.tensors()[0].data()[0] - 2.0 * (1.0 - 0.05)).abs() < 1e-15);
    }

    #[test]
    fn quadratic_bowl_converges() {
        let w0 = vec![0.6, -0.48, 0.64];
        let mut s = store(w0);
        let cfg = AdamConfig {
            weight_decay: 0.0,
            lr: 0.01,
            ..Default::default()
        };
        let mut adam = AdamState::new(&s, cfg);
        for _ in 0..500 {
            let g = grads_of(&s, |t, w| {
                // ‖w‖² = 3 · mean((w − 0)²).
                let row = zero_row(t);
                let row = t.add_bias(row, w).unwrap();
                let loss = t
                    .masked_mse(row, &Tensor::zeros(vec![1, 3]).unwrap(), &[true; 3])
                    .unwrap();
                t.scale(loss, 3.0)
            });
            adam.step(&mut s, &g).unwrap();
        }
        let norm: f64 = s.tensors()[0].data().iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(norm < 1e-2, "‖w‖ = {norm}");
    }
}
