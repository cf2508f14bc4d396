//! Core data model for multi-objective optimization.
//!
//! Everything is minimized. A [`Solution`] couples a decision vector with its
//! objective vector and aggregated constraint violation once it has been
//! evaluated; a [`Population`] is an ordered sequence of solutions sharing one
//! problem's dimensions.

mod budget;
pub(crate) mod dominance;
mod problem;

pub use budget::{evaluate, evaluate_solution, EvaluationBudget, EvaluationOutcome, Reservation};
pub use dominance::{constrained_dominates, dominates, dominates_slices, Dominance};
pub use problem::{
    aggregate_violation, clamp_to_bounds, denormalize_decision, normalize_decision, Constraints, Problem, ProblemSpec,
    EQUALITY_TOLERANCE,
};

use crate::error::{contract, Error, Result};

/// A candidate solution. Objectives and violation are present iff evaluated.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    x: Vec<f64>,
    eval: Option<(Vec<f64>, f64)>,
}

impl Solution {
    /// An unevaluated solution.
    pub fn new(x: Vec<f64>) -> Self {
        Self { x, eval: None }
    }

    /// An evaluated solution. Rejects negative or non-finite violation and
    /// non-finite objectives.
    pub fn evaluated(x: Vec<f64>, f: Vec<f64>, cv: f64) -> Result<Self> {
        if !(cv >= 0.0) || !cv.is_finite() {
            return Err(contract(format!(
                "constraint violation must be finite and >= 0, got {cv}"
            )));
        }
        if f.iter().any(|v| !v.is_finite()) {
            return Err(contract("objective vector contains non-finite values"));
        }
        Ok(Self { x, eval: Some((f, cv)) })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn f(&self) -> Option<&[f64]> {
        self.eval.as_ref().map(|(f, _)| f.as_slice())
    }

    pub fn cv(&self) -> Option<f64> {
        self.eval.as_ref().map(|(_, cv)| *cv)
    }

    pub fn is_evaluated(&self) -> bool {
        self.eval.is_some()
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self.cv(), Some(cv) if cv == 0.0)
    }

    /// Objective vector, or a contract error when unevaluated.
    pub fn objectives(&self) -> Result<&[f64]> {
        self.f()
            .ok_or_else(|| contract("operation requires an evaluated solution"))
    }
}

/// An ordered population tagged with its generation index.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Population {
    members: Vec<Solution>,
    generation: usize,
}

impl Population {
    pub fn new(members: Vec<Solution>, generation: usize) -> Self {
        Self { members, generation }
    }

    /// Validates that every member matches `spec`'s decision dimension and,
    /// when evaluated, its objective count.
    pub fn validated(members: Vec<Solution>, generation: usize, spec: &ProblemSpec) -> Result<Self> {
        for s in &members {
            if s.x().len() != spec.d() {
                return Err(Error::DimensionMismatch {
                    what: "decision vector length",
                    expected: spec.d(),
                    found: s.x().len(),
                });
            }
            if let Some(f) = s.f() {
                if f.len() != spec.m() {
                    return Err(Error::DimensionMismatch {
                        what: "objective vector length",
                        expected: spec.m(),
                        found: f.len(),
                    });
                }
            }
        }
        Ok(Self::new(members, generation))
    }

    pub fn members(&self) -> &[Solution] {
        &self.members
    }

    pub fn into_members(self) -> Vec<Solution> {
        self.members
    }

    pub fn generation(&self) -> usize {
        self.generation
    }

    pub fn with_generation(mut self, generation: usize) -> Self {
        self.generation = generation;
        self
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Solution> {
        self.members.iter()
    }

    pub fn get(&self, i: usize) -> Option<&Solution> {
        self.members.get(i)
    }

    pub fn all_evaluated(&self) -> bool {
        self.members.iter().all(Solution::is_evaluated)
    }

    pub(crate) fn require_evaluated(&self) -> Result<()> {
        match self.members.iter().position(|s| !s.is_evaluated()) {
            Some(i) => Err(contract(format!("population member {i} is not evaluated"))),
            None => Ok(()),
        }
    }

    /// Keeps only evaluated members, preserving order.
    pub fn evaluated_only(&self) -> Population {
        Population::new(
            self.members.iter().filter(|s| s.is_evaluated()).cloned().collect(),
            self.generation,
        )
    }

    /// Concatenation `self ∪ other` (order preserved, duplicates kept).
    pub fn union(&self, other: &Population) -> Population {
        let mut members = self.members.clone();
        members.extend(other.members.iter().cloned());
        Population::new(members, self.generation.max(other.generation))
    }

    /// Members at `indices`, in that order.
    pub fn pick(&self, indices: &[usize]) -> Population {
        Population::new(
            indices.iter().map(|&i| self.members[i].clone()).collect(),
            self.generation,
        )
    }

    /// Objective vectors of evaluated members.
    pub fn objective_vectors(&self) -> Vec<Vec<f64>> {
        self.members.iter().filter_map(|s| s.f().map(<[f64]>::to_vec)).collect()
    }

    /// Objective vectors of evaluated, feasible members.
    pub fn feasible_objectives(&self) -> Vec<Vec<f64>> {
        self.members
            .iter()
            .filter(|s| s.is_feasible())
            .filter_map(|s| s.f().map(<[f64]>::to_vec))
            .collect()
    }
}

impl FromIterator<Solution> for Population {
    fn from_iter<I: IntoIterator<Item = Solution>>(iter: I) -> Self {
        Population::new(iter.into_iter().collect(), 0)
    }
}

impl<'a> IntoIterator for &'a Population {
    type Item = &'a Solution;
    type IntoIter = std::slice::Iter<'a, Solution>;

    fn into_iter(self) -> Self::IntoIter {
        self.members.iter()
    }
}
