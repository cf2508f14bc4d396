use crate::error::{Error, Result};

/// Equality constraints with `|h(x)| <= EQUALITY_TOLERANCE` count as satisfied.
pub const EQUALITY_TOLERANCE: f64 = 1e-4;

/// Declared shape of a problem: dimensions, box bounds, and constraint count.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    name: String,
    m: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
    n_constraints: usize,
}

impl ProblemSpec {
    pub fn new(
        name: impl Into<String>,
        m: usize,
        lower: Vec<f64>,
        upper: Vec<f64>,
        n_constraints: usize,
    ) -> Result<Self> {
        let name = name.into();
        if lower.is_empty() {
            return Err(Error::InvalidSpec(format!(
                "{name}: decision dimension must be positive"
            )));
        }
        if lower.len() != upper.len() {
            return Err(Error::InvalidSpec(format!(
                "{name}: {} lower bounds but {} upper bounds",
                lower.len(),
                upper.len()
            )));
        }
        if m < 2 {
            return Err(Error::InvalidSpec(format!(
                "{name}: need at least 2 objectives, got {m}"
            )));
        }
        for (i, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidSpec(format!(
                    "{name}: bound {i} is [{lo}, {hi}], need finite lower < upper"
                )));
            }
        }
        Ok(Self {
            name,
            m,
            lower,
            upper,
            n_constraints,
        })
    }

    /// Unit-box bounds `[0, 1]^d`.
    pub fn unit(name: impl Into<String>, d: usize, m: usize) -> Result<Self> {
        Self::new(name, m, vec![0.0; d], vec![1.0; d], 0)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn d(&self) -> usize {
        self.lower.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn n_constraints(&self) -> usize {
        self.n_constraints
    }

    /// Checks length and bounds of a decision vector.
    pub fn check_decision(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.d() {
            return Err(Error::DimensionMismatch {
                what: "decision vector length",
                expected: self.d(),
                found: x.len(),
            });
        }
        for (i, &v) in x.iter().enumerate() {
            if !(v >= self.lower[i] && v <= self.upper[i]) {
                return Err(Error::OutOfBounds {
                    index: i,
                    value: v,
                    lower: self.lower[i],
                    upper: self.upper[i],
                });
            }
        }
        Ok(())
    }
}

/// Raw constraint values: inequalities `g_j(x) <= 0` and equalities `h_j(x) = 0`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Constraints {
    pub inequality: Vec<f64>,
    pub equality: Vec<f64>,
}

/// `Σ max(0, g_j) + Σ |h_j|`, with equalities inside the tolerance counted as met.
pub fn aggregate_violation(c: &Constraints) -> f64 {
    let ineq: f64 = c.inequality.iter().map(|g| g.max(0.0)).sum();
    let eq: f64 = c
        .equality
        .iter()
        .map(|h| h.abs())
        .filter(|&h| h > EQUALITY_TOLERANCE)
        .sum();
    ineq + eq
}

/// A black-box multi-objective problem. Implementations must be pure.
pub trait Problem: Send + Sync {
    fn spec(&self) -> &ProblemSpec;

    /// Objective vector at an in-bounds `x`.
    fn objectives(&self, x: &[f64]) -> Vec<f64>;

    fn constraints(&self, _x: &[f64]) -> Constraints {
        Constraints::default()
    }
}

impl<P: Problem + ?Sized> Problem for Box<P> {
    fn spec(&self) -> &ProblemSpec {
        (**self).spec()
    }

    fn objectives(&self, x: &[f64]) -> Vec<f64> {
        (**self).objectives(x)
    }

    fn constraints(&self, x: &[f64]) -> Constraints {
        (**self).constraints(x)
    }
}

/// Maps `x` into the unit box using the spec's bounds.
pub fn normalize_decision(x: &[f64], spec: &ProblemSpec) -> Vec<f64> {
    x.iter()
        .zip(spec.lower().iter().zip(spec.upper()))
        .map(|(v, (lo, hi))| (v - lo) / (hi - lo))
        .collect()
}

/// Inverse of [`normalize_decision`]; the result is clamped to bounds.
pub fn denormalize_decision(u: &[f64], spec: &ProblemSpec) -> Vec<f64> {
    u.iter()
        .zip(spec.lower().iter().zip(spec.upper()))
        .map(|(v, (lo, hi))| (lo + v * (hi - lo)).clamp(*lo, *hi))
        .collect()
}

/// Clamps out-of-bound components onto the box.
pub fn clamp_to_bounds(x: &mut [f64], spec: &ProblemSpec) {
    for (v, (lo, hi)) in x.iter_mut().zip(spec.lower().iter().zip(spec.upper())) {
        *v = v.clamp(*lo, *hi);
    }
}
