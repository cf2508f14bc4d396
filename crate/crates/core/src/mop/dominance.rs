use super::Solution;
use crate::error::{contract, Error, Result};

/// Outcome of comparing two objective vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dominance {
    Dominates,
    Dominated,
    Neither,
}

/// Pareto dominance on raw objective slices of equal length.
#[inline]
pub fn dominates_slices(a: &[f64], b: &[f64]) -> bool {
    let mut strictly = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strictly = true;
        }
    }
    strictly
}

fn objectives_pair<'a>(a: &'a Solution, b: &'a Solution) -> Result<(&'a [f64], &'a [f64])> {
    let fa = a.objectives()?;
    let fb = b.objectives()?;
    if fa.len() != fb.len() {
        return Err(Error::DimensionMismatch {
            what: "objective count",
            expected: fa.len(),
            found: fb.len(),
        });
    }
    Ok((fa, fb))
}

/// `a ≺ b`: no worse on every objective and strictly better on one.
pub fn dominates(a: &Solution, b: &Solution) -> Result<bool> {
    let (fa, fb) = objectives_pair(a, b)?;
    Ok(dominates_slices(fa, fb))
}

/// Feasibility-first dominance: feasible beats infeasible, smaller violation
/// beats larger, and two feasible solutions fall back to Pareto dominance.
pub fn constrained_dominates(a: &Solution, b: &Solution) -> Result<bool> {
    let (fa, fb) = objectives_pair(a, b)?;
    let (ca, cb) = match (a.cv(), b.cv()) {
        (Some(ca), Some(cb)) => (ca, cb),
        _ => return Err(contract("constrained dominance needs constraint violations")),
    };
    Ok(constrained_dominates_raw(fa, ca, fb, cb))
}

#[inline]
pub(crate) fn constrained_dominates_raw(fa: &[f64], ca: f64, fb: &[f64], cb: f64) -> bool {
    match (ca == 0.0, cb == 0.0) {
        (true, false) => true,
        (false, true) => false,
        (false, false) => ca < cb,
        (true, true) => dominates_slices(fa, fb),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sol(f: &[f64]) -> Solution {
        Solution::evaluated(vec![], f.to_vec(), 0.0).unwrap()
    }

    fn sol_cv(f: &[f64], cv: f64) -> Solution {
        Solution::evaluated(vec![], f.to_vec(), cv).unwrap()
    }

    #[test]
    fn pareto_examples() {
        assert!(dominates(&sol(&[1.0, 2.0]), &sol(&[1.0, 3.0])).unwrap());
        assert!(!dominates(&sol(&[1.0, 2.0]), &sol(&[1.0, 2.0])).unwrap());
        assert!(!dominates(&sol(&[1.0, 3.0]), &sol(&[2.0, 2.0])).unwrap());
        assert!(!dominates(&sol(&[2.0, 2.0]), &sol(&[1.0, 3.0])).unwrap());
    }

    #[test]
    fn unevaluated_operand_is_an_error() {
        let a = Solution::new(vec![0.5]);
        assert!(dominates(&a, &sol(&[1.0, 1.0])).is_err());
        assert!(constrained_dominates(&sol(&[1.0, 1.0]), &a).is_err());
        assert!(dominates(&sol(&[1.0]), &sol(&[1.0, 1.0])).is_err());
    }

    #[test]
    fn constrained_examples() {
        // Objectives deliberately favour b.
        assert!(constrained_dominates(&sol_cv(&[9.0, 9.0], 0.0), &sol_cv(&[0.0, 0.0], 0.5)).unwrap());
        assert!(constrained_dominates(&sol_cv(&[9.0, 9.0], 0.2), &sol_cv(&[0.0, 0.0], 0.7)).unwrap());
        assert!(!constrained_dominates(&sol_cv(&[0.0, 0.0], 0.7), &sol_cv(&[9.0, 9.0], 0.2)).unwrap());
        assert!(constrained_dominates(&sol_cv(&[1.0, 2.0], 0.0), &sol_cv(&[1.0, 3.0], 0.0)).unwrap());
    }

    fn vec3() -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(0u8..4, 3).prop_map(|v| v.into_iter().map(f64::from).collect())
    }

    proptest! {
        #[test]
        fn irreflexive_and_antisymmetric(a in vec3(), b in vec3()) {
            let (a, b) = (sol(&a), sol(&b));
            prop_assert!(!dominates(&a, &a).unwrap());
            if dominates(&a, &b).unwrap() {
                prop_assert!(!dominates(&b, &a).unwrap());
            }
        }

        #[test]
        fn transitive(a in vec3(), b in vec3(), c in vec3()) {
            let (a, b, c) = (sol(&a), sol(&b), sol(&c));
            if dominates(&a, &b).unwrap() && dominates(&b, &c).unwrap() {
                prop_assert!(dominates(&a, &c).unwrap());
            }
        }
    }
}
