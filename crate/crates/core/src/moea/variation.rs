use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{contract, Result};
use crate::mop::{clamp_to_bounds, ProblemSpec};

/// Parameters of simulated binary crossover and polynomial mutation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariationConfig {
    pub sbx_eta: f64,
    pub sbx_prob: f64,
    pub pm_eta: f64,
    /// Per-variable mutation probability; `None` means `1/d`.
    pub pm_prob: Option<f64>,
}

impl Default for VariationConfig {
    fn default() -> Self {
        Self {
            sbx_eta: 20.0,
            sbx_prob: 1.0,
            pm_eta: 20.0,
            pm_prob: None,
        }
    }
}

impl VariationConfig {
    pub fn validate(&self) -> Result<()> {
        let prob_ok = |p: f64| (0.0..=1.0).contains(&p);
        if !(self.sbx_eta > 0.0 && self.pm_eta > 0.0) {
            return Err(contract("distribution indices must be positive"));
        }
        if !prob_ok(self.sbx_prob) || !self.pm_prob.map_or(true, prob_ok) {
            return Err(contract("variation probabilities must lie in [0, 1]"));
        }
        Ok(())
    }

    pub fn mutation_prob(&self, d: usize) -> f64 {
        self.pm_prob.unwrap_or(1.0 / d as f64)
    }
}

/// Simulated binary crossover. Each variable crosses with probability 0.5
/// and the children swap with probability 0.5; children are clamped.
pub fn sbx_crossover<R: Rng + ?Sized>(
    a: &[f64],
    b: &[f64],
    spec: &ProblemSpec,
    cfg: &VariationConfig,
    rng: &mut R,
) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(a.len(), b.len(), "SBX parents differ in length");
    let mut c1 = a.to_vec();
    let mut c2 = b.to_vec();
    if rng.gen::<f64>() > cfg.sbx_prob {
        return (c1, c2);
    }
    let expo = 1.0 / (cfg.sbx_eta + 1.0);
    for i in 0..a.len() {
        if rng.gen::<f64>() > 0.5 || (a[i] - b[i]).abs() < 1e-14 {
            continue;
        }
        let u: f64 = rng.gen();
        let beta = if u <= 0.5 {
            (2.0 * u).powf(expo)
        } else {
            (1.0 / (2.0 * (1.0 - u))).powf(expo)
        };
        let mid = 0.5 * (a[i] + b[i]);
        let half = 0.5 * beta * (b[i] - a[i]).abs();
        let (lo, hi) = (mid - half, mid + half);
        if rng.gen::<bool>() {
            c1[i] = lo;
            c2[i] = hi;
        } else {
            c1[i] = hi;
            c2[i] = lo;
        }
    }
    clamp_to_bounds(&mut c1, spec);
    clamp_to_bounds(&mut c2, spec);
    (c1, c2)
}

/// Bounded polynomial mutation with per-variable probability
/// [`VariationConfig::mutation_prob`]; the result is clamped.
pub fn polynomial_mutation<R: Rng + ?Sized>(
    x: &[f64],
    spec: &ProblemSpec,
    cfg: &VariationConfig,
    rng: &mut R,
) -> Vec<f64> {
    let p = cfg.mutation_prob(x.len());
    let expo = 1.0 / (cfg.pm_eta + 1.0);
    let mut y = x.to_vec();
    for (i, v) in y.iter_mut().enumerate() {
        if p <= 0.0 || rng.gen::<f64>() >= p {
            continue;
        }
        let (lo, hi) = (spec.lower()[i], spec.upper()[i]);
        let width = hi - lo;
        let d1 = (*v - lo) / width;
        let d2 = (hi - *v) / width;
        let r: f64 = rng.gen();
        let dq = if r < 0.5 {
            let val = 2.0 * r + (1.0 - 2.0 * r) * (1.0 - d1).powf(cfg.pm_eta + 1.0);
            val.powf(expo) - 1.0
        } else {
            let val = 2.0 * (1.0 - r) + 2.0 * (r - 0.5) * (1.0 - d2).powf(cfg.pm_eta + 1.0);
            1.0 - val.powf(expo)
        };
        *v = (*v + dq * width).clamp(lo, hi);
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use proptest::prelude::*;

    fn spec(d: usize) -> ProblemSpec {
        ProblemSpec::new("t", 2, vec![-1.0; d], vec![2.0; d], 0).unwrap()
    }

    #[test]
    fn identical_parents_give_identical_children() {
        let cfg = VariationConfig::default();
        let a = vec![0.3, -0.2, 1.7];
        let (c1, c2) = sbx_crossover(&a, &a, &spec(3), &cfg, &mut rng_from_seed(1));
        assert_eq!(c1, a);
        assert_eq!(c2, a);
    }

    #[test]
    fn seeded_operators_reproduce() {
        let cfg = VariationConfig {
            pm_prob: Some(0.5),
            ..Default::default()
        };
        let (a, b) = (vec![0.0, 0.5, 1.0], vec![1.0, -0.5, 0.2]);
        let s = spec(3);
        let run = |seed| {
            let mut rng = rng_from_seed(seed);
            let (c1, c2) = sbx_crossover(&a, &b, &s, &cfg, &mut rng);
            (c1.clone(), c2, polynomial_mutation(&c1, &s, &cfg, &mut rng))
        };
        assert_eq!(run(9), run(9));
        assert_ne!(run(9), run(10));
    }

    #[test]
    fn zero_mutation_probability_is_identity() {
        let cfg = VariationConfig {
            pm_prob: Some(0.0),
            ..Default::default()
        };
        let x = vec![0.1, 0.2, 0.3];
        assert_eq!(polynomial_mutation(&x, &spec(3), &cfg, &mut rng_from_seed(0)), x);
    }

    fn mean_and_se(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean, (var / n).sqrt())
    }

    #[test]
    fn sbx_children_centre_on_parent_midpoint() {
        let cfg = VariationConfig::default();
        let s = ProblemSpec::unit("u", 2, 2).unwrap();
        let (a, b) = (vec![0.3, 0.45], vec![0.6, 0.55]);
        let mut rng = rng_from_seed(42);
        // Both children pooled: a variable that does not cross keeps the
        // parent values, so only the pair is centred on the midpoint.
        let children: Vec<Vec<f64>> = (0..5_000)
            .flat_map(|_| {
                let (c1, c2) = sbx_crossover(&a, &b, &s, &cfg, &mut rng);
                [c1, c2]
            })
            .collect();
        for k in 0..2 {
            let col: Vec<f64> = children.iter().map(|c| c[k]).collect();
            let (mean, se) = mean_and_se(&col);
            let mid = 0.5 * (a[k] + b[k]);
            assert!((mean - mid).abs() <= 3.0 * se, "coord {k}: {mean} vs {mid} (se {se})");
        }
    }

    #[test]
    fn mutation_perturbation_is_symmetric_at_midpoint() {
        let cfg = VariationConfig {
            pm_prob: Some(1.0),
            ..Default::default()
        };
        let s = ProblemSpec::unit("u", 3, 2).unwrap();
        let x = vec![0.5; 3];
        let mut rng = rng_from_seed(7);
        let deltas: Vec<Vec<f64>> = (0..10_000)
            .map(|_| {
                polynomial_mutation(&x, &s, &cfg, &mut rng)
                    .iter()
                    .map(|v| v - 0.5)
                    .collect()
            })
            .collect();
        for k in 0..3 {
            let col: Vec<f64> = deltas.iter().map(|d| d[k]).collect();
            let (mean, se) = mean_and_se(&col);
            assert!(mean.abs() <= 3.0 * se, "coord {k}: mean {mean} (se {se})");
            let pos = col.iter().filter(|v| **v > 0.0).count() as f64;
            // Sign balance: binomial(10000, 0.5) within 3σ = 150.
            assert!((pos - 5000.0).abs() <= 150.0, "coord {k}: {pos} positive");
        }
    }

    proptest! {
        #[test]
        fn operators_stay_in_bounds(
            a in proptest::collection::vec(prop_oneof![Just(-1.0), Just(2.0), -1.0f64..2.0], 4),
            b in proptest::collection::vec(prop_oneof![Just(-1.0), Just(2.0), -1.0f64..2.0], 4),
            seed in any::<u64>(),
            eta in 0.5f64..40.0,
        ) {
            let s = spec(4);
            let cfg = VariationConfig { sbx_eta: eta, pm_eta: eta, pm_prob: Some(1.0), sbx_prob: 1.0 };
            let mut rng = rng_from_seed(seed);
            let (c1, c2) = sbx_crossover(&a, &b, &s, &cfg, &mut rng);
            let m1 = polynomial_mutation(&c1, &s, &cfg, &mut rng);
            for v in c1.iter().chain(&c2).chain(&m1) {
                prop_assert!((-1.0..=2.0).contains(v));
            }
        }
    }
}
