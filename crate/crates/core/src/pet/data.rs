use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moea::canonical_order;
use crate::mop::{normalize_decision, Population, ProblemSpec};

/// Normalized objectives are clamped into this range so that offspring far
/// outside the parents' box cannot blow up the embedding.
pub const OBJECTIVE_CLAMP: (f64, f64) = (-1.0, 2.0);

/// Per-objective min-max scaling fitted on one population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveScaler {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl ObjectiveScaler {
    pub fn fit(rows: &[Vec<f64>]) -> Result<Self> {
        let first = rows
            .first()
            .ok_or_else(|| Error::Data("cannot fit a scaler on no rows".into()))?;
        let mut lo = first.clone();
        let mut hi = first.clone();
        for r in rows {
            if r.len() != lo.len() {
                return Err(Error::DimensionMismatch {
                    what: "objective count",
                    expected: lo.len(),
                    found: r.len(),
                });
            }
            for (j, v) in r.iter().enumerate() {
                lo[j] = lo[j].min(*v);
                hi[j] = hi[j].max(*v);
            }
        }
        Ok(Self { lo, hi })
    }

    pub fn fit_population(pop: &Population) -> Result<Self> {
        Self::fit(&pop.objective_vectors())
    }

    /// `(f − min)/(max − min)`, 0.5 on a zero range, clamped to [`OBJECTIVE_CLAMP`].
    pub fn normalize(&self, f: &[f64]) -> Vec<f64> {
        f.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(v, (lo, hi))| {
                if hi > lo {
                    ((v - lo) / (hi - lo)).clamp(OBJECTIVE_CLAMP.0, OBJECTIVE_CLAMP.1)
                } else {
                    0.5
                }
            })
            .collect()
    }
}

/// One training example in normalized space: parents `X^g` and the
/// canonically ordered successor population `X^{g+1}`. Objectives of both
/// sides are scaled with the parents' scaler.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Example {
    pub d: usize,
    pub m: usize,
    pub parents_x: Vec<Vec<f64>>,
    pub parents_f: Vec<Vec<f64>>,
    pub target_x: Vec<Vec<f64>>,
    pub target_f: Vec<Vec<f64>>,
}

impl Example {
    /// Checks row counts and widths.
    pub fn validate(&self) -> Result<()> {
        let rows_ok = |xs: &[Vec<f64>], w: usize| xs.iter().all(|r| r.len() == w);
        if self.parents_x.len() != self.parents_f.len() || self.target_x.len() != self.target_f.len() {
            return Err(Error::Data("decision and objective row counts differ".into()));
        }
        if self.parents_x.is_empty() || self.target_x.len() < 2 {
            return Err(Error::Data("an example needs parents and at least two targets".into()));
        }
        if !rows_ok(&self.parents_x, self.d) || !rows_ok(&self.target_x, self.d) {
            return Err(Error::Data(format!("decision rows must have length {}", self.d)));
        }
        if !rows_ok(&self.parents_f, self.m) || !rows_ok(&self.target_f, self.m) {
            return Err(Error::Data(format!("objective rows must have length {}", self.m)));
        }
        Ok(())
    }

    /// Grouping key for batching.
    pub fn shape_key(&self) -> (usize, usize, usize, usize) {
        (self.d, self.m, self.parents_x.len(), self.target_x.len())
    }
}

/// Normalizes a `(X^g, X^{g+1})` pair and orders the target by
/// (rank, crowding descending, index).
pub fn example_from_populations(parents: &Population, next: &Population, spec: &ProblemSpec) -> Result<Example> {
    parents.require_evaluated()?;
    next.require_evaluated()?;
    let scaler = ObjectiveScaler::fit_population(parents)?;
    let order = canonical_order(next)?;
    let norm_x = |p: &Population, idx: &mut dyn Iterator<Item = usize>| -> Vec<Vec<f64>> {
        idx.map(|i| normalize_decision(p.members()[i].x(), spec)).collect()
    };
    let norm_f = |p: &Population, idx: &mut dyn Iterator<Item = usize>| -> Vec<Vec<f64>> {
        idx.map(|i| scaler.normalize(p.members()[i].f().unwrap())).collect()
    };
    let ex = Example {
        d: spec.d(),
        m: spec.m(),
        parents_x: norm_x(parents, &mut (0..parents.len())),
        parents_f: norm_f(parents, &mut (0..parents.len())),
        target_x: norm_x(next, &mut order.iter().copied()),
        target_f: norm_f(next, &mut order.iter().copied()),
    };
    ex.validate()?;
    Ok(ex)
}
