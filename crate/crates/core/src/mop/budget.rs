use std::sync::atomic::{AtomicUsize, Ordering};

use super::{aggregate_violation, Population, Problem, Solution};
use crate::error::{Error, Result};

/// Total number of objective-function evaluations allowed for a run.
///
/// `used` never exceeds `total`. Callers reserve evaluations before running
/// them and commit what they actually performed.
#[derive(Debug)]
pub struct EvaluationBudget {
    total: usize,
    used: AtomicUsize,
}

impl EvaluationBudget {
    pub fn new(total: usize) -> Self {
        Self {
            total,
            used: AtomicUsize::new(0),
        }
    }

    /// A budget with `used` already consumed (clamped to `total`).
    pub fn with_used(total: usize, used: usize) -> Self {
        Self {
            total,
            used: AtomicUsize::new(used.min(total)),
        }
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn used(&self) -> usize {
        self.used.load(Ordering::SeqCst)
    }

    pub fn remaining(&self) -> usize {
        self.total - self.used()
    }

    pub fn is_exhausted(&self) -> bool {
        self.remaining() == 0
    }

    /// Atomically reserves up to `want` evaluations.
    pub fn reserve(&self, want: usize) -> Reservation<'_> {
        let mut current = self.used.load(Ordering::SeqCst);
        loop {
            let granted = want.min(self.total - current);
            match self
                .used
                .compare_exchange(current, current + granted, Ordering::SeqCst, Ordering::SeqCst)
            {
                Ok(_) => {
                    return Reservation {
                        budget: self,
                        granted,
                        committed: false,
                    }
                }
                Err(actual) => current = actual,
            }
        }
    }
}

impl Clone for EvaluationBudget {
    fn clone(&self) -> Self {
        Self::with_used(self.total, self.used())
    }
}

/// Evaluations held against a budget. Unused evaluations are returned on
/// commit or drop.
#[derive(Debug)]
pub struct Reservation<'a> {
    budget: &'a EvaluationBudget,
    granted: usize,
    committed: bool,
}

impl Reservation<'_> {
    pub fn granted(&self) -> usize {
        self.granted
    }

    /// Keeps `performed` (≤ granted) evaluations and releases the rest.
    pub fn commit(mut self, performed: usize) {
        let performed = performed.min(self.granted);
        self.budget.used.fetch_sub(self.granted - performed, Ordering::SeqCst);
        self.committed = true;
    }
}

impl Drop for Reservation<'_> {
    fn drop(&mut self) {
        if !self.committed {
            self.budget.used.fetch_sub(self.granted, Ordering::SeqCst);
        }
    }
}

/// Evaluates `x` against `problem` without touching any budget.
///
/// Out-of-bounds input is a contract violation; NaN or infinite outputs are
/// a hard error.
pub fn evaluate_solution<P: Problem + ?Sized>(problem: &P, x: Vec<f64>) -> Result<Solution> {
    let spec = problem.spec();
    spec.check_decision(&x)?;
    let f = problem.objectives(&x);
    if f.len() != spec.m() {
        return Err(Error::DimensionMismatch {
            what: "objective vector length",
            expected: spec.m(),
            found: f.len(),
        });
    }
    let cv = aggregate_violation(&problem.constraints(&x));
    if f.iter().any(|v| !v.is_finite()) || !cv.is_finite() {
        return Err(Error::NonFinite {
            problem: spec.name().to_string(),
        });
    }
    Solution::evaluated(x, f, cv)
}

/// Result of evaluating a population against a budget.
#[derive(Debug, Clone)]
pub struct EvaluationOutcome {
    /// All input members; the ones that consumed budget are now evaluated.
    pub population: Population,
    pub performed: usize,
    /// Budget ran out before every pending member was evaluated.
    pub exhausted: bool,
}

/// Evaluates every unevaluated member in order, as far as the budget allows.
///
/// When the budget cannot cover every pending member, the prefix that fits
/// is evaluated and `exhausted` is set. A non-empty pending set with no
/// budget at all is reported as [`Error::BudgetExhausted`].
pub fn evaluate<P: Problem + ?Sized>(
    pop: &Population,
    problem: &P,
    budget: &EvaluationBudget,
) -> Result<EvaluationOutcome> {
    let pending: Vec<usize> = pop
        .iter()
        .enumerate()
        .filter(|(_, s)| !s.is_evaluated())
        .map(|(i, _)| i)
        .collect();
    if pending.is_empty() {
        return Ok(EvaluationOutcome {
            population: pop.clone(),
            performed: 0,
            exhausted: false,
        });
    }
    let reservation = budget.reserve(pending.len());
    let granted = reservation.granted();
    if granted == 0 {
        return Err(Error::BudgetExhausted { performed: 0 });
    }
    let targets = &pending[..granted];
    let evaluated = evaluate_many(problem, targets.iter().map(|&i| pop.members()[i].x().to_vec()))?;
    reservation.commit(granted);

    let mut members = pop.members().to_vec();
    for (&i, s) in targets.iter().zip(evaluated) {
        members[i] = s;
    }
    Ok(EvaluationOutcome {
        population: Population::new(members, pop.generation()),
        performed: granted,
        exhausted: granted < pending.len(),
    })
}

#[cfg(feature = "parallel")]
fn evaluate_many<P: Problem + ?Sized>(problem: &P, xs: impl Iterator<Item = Vec<f64>>) -> Result<Vec<Solution>> {
    use rayon::prelude::*;
    let xs: Vec<Vec<f64>> = xs.collect();
    xs.into_par_iter().map(|x| evaluate_solution(problem, x)).collect()
}

#[cfg(not(feature = "parallel"))]
fn evaluate_many<P: Problem + ?Sized>(problem: &P, xs: impl Iterator<Item = Vec<f64>>) -> Result<Vec<Solution>> {
    xs.map(|x| evaluate_solution(problem, x)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mop::ProblemSpec;
    use proptest::prelude::*;

    struct Sum {
        spec: ProblemSpec,
    }

    impl Problem for Sum {
        fn spec(&self) -> &ProblemSpec {
            &self.spec
        }
        fn objectives(&self, x: &[f64]) -> Vec<f64> {
            let s: f64 = x.iter().sum();
            vec![s, 1.0 - s]
        }
    }

    struct Nan {
        spec: ProblemSpec,
    }

    impl Problem for Nan {
        fn spec(&self) -> &ProblemSpec {
            &self.spec
        }
        fn objectives(&self, _x: &[f64]) -> Vec<f64> {
            vec![f64::NAN, 0.0]
        }
    }

    fn sum_problem() -> Sum {
        Sum {
            spec: ProblemSpec::unit("sum", 2, 2).unwrap(),
        }
    }

    fn pop(n: usize) -> Population {
        (0..n).map(|i| Solution::new(vec![0.001 * i as f64, 0.0])).collect()
    }

    #[test]
    fn full_evaluation_consumes_exactly() {
        let budget = EvaluationBudget::new(1000);
        let out = evaluate(&pop(100), &sum_problem(), &budget).unwrap();
        assert_eq!(budget.used(), 100);
        assert_eq!(out.performed, 100);
        assert!(!out.exhausted);
        assert!(out.population.all_evaluated());
    }

    #[test]
    fn partial_evaluation_on_short_budget() {
        let budget = EvaluationBudget::with_used(1000, 950);
        let out = evaluate(&pop(100), &sum_problem(), &budget).unwrap();
        assert_eq!(out.performed, 50);
        assert!(out.exhausted);
        assert_eq!(budget.used(), 1000);
        assert!(out.population.members()[..50].iter().all(Solution::is_evaluated));
        assert!(out.population.members()[50..].iter().all(|s| !s.is_evaluated()));
        match evaluate(&pop(3), &sum_problem(), &budget) {
            Err(Error::BudgetExhausted { performed: 0 }) => {}
            other => panic!("expected exhaustion, got {other:?}"),
        }
    }

    #[test]
    fn empty_population_is_a_noop() {
        let budget = EvaluationBudget::new(10);
        let out = evaluate(&Population::default(), &sum_problem(), &budget).unwrap();
        assert_eq!(out.performed, 0);
        assert_eq!(budget.used(), 0);
    }

    #[test]
    fn nan_objectives_are_rejected() {
        let p = Nan {
            spec: ProblemSpec::unit("nan", 2, 2).unwrap(),
        };
        assert!(matches!(
            evaluate_solution(&p, vec![0.5, 0.5]),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn out_of_bounds_is_rejected() {
        assert!(matches!(
            evaluate_solution(&sum_problem(), vec![1.5, 0.0]),
            Err(Error::OutOfBounds { index: 0, .. })
        ));
    }

    #[test]
    fn reservation_releases_unused() {
        let budget = EvaluationBudget::new(10);
        {
            let r = budget.reserve(7);
            assert_eq!(r.granted(), 7);
            assert_eq!(budget.remaining(), 3);
        }
        assert_eq!(budget.used(), 0);
        budget.reserve(7).commit(4);
        assert_eq!(budget.used(), 4);
    }

    proptest! {
        #[test]
        fn budget_never_exceeds_total(
            total in 0usize..200,
            ops in proptest::collection::vec((0usize..60, 0usize..60, any::<bool>()), 0..30)
        ) {
            let budget = EvaluationBudget::new(total);
            let problem = sum_problem();
            for (want, performed, via_eval) in ops {
                if via_eval {
                    let before = budget.used();
                    let res = evaluate(&pop(want), &problem, &budget);
                    if let Ok(out) = res {
                        prop_assert_eq!(budget.used(), before + out.performed);
                    }
                } else {
                    budget.reserve(want).commit(performed);
                }
                prop_assert!(budget.used() <= budget.total());
            }
        }
    }
}
