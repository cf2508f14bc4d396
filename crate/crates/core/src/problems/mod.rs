//! Benchmark problems and their reference fronts.
//!
//! Problems are addressed by name (`zdt1`, `lsmop7`, `synthetic`, ...) with
//! a decision dimension and objective count, see [`build_problem`].

mod front;
mod lsmop;
mod synthetic;
mod zdt;

pub use front::{default_front_size, ReferenceFront};
pub use lsmop::{evaluate_lsmop, Lsmop, LSMOP9_REGIONS, NK};
pub use synthetic::{SyntheticShift, DEFAULT_SHIFT};
pub use zdt::{evaluate_zdt, Zdt, ZdtVariant, ZDT3_REGIONS, ZDT6_F1_MIN};

use crate::error::{Error, Result};
use crate::mop::{Constraints, Problem, ProblemSpec};

/// Any registered benchmark problem.
#[derive(Debug, Clone)]
pub enum Benchmark {
    Zdt(Zdt),
    Lsmop(Lsmop),
    Synthetic(SyntheticShift),
}

impl Benchmark {
    /// `n` points spread evenly along the analytic Pareto front.
    pub fn reference_front(&self, n: usize) -> Result<ReferenceFront> {
        if n == 0 {
            return Err(Error::Contract("reference front size must be positive".into()));
        }
        let points = match self {
            Benchmark::Zdt(p) => front::zdt_front(p.variant(), n),
            Benchmark::Lsmop(p) => front::lsmop_front(p.variant(), p.spec().m(), n),
            Benchmark::Synthetic(p) => front::unit_grid(n).into_iter().map(|t| p.front_point(t)).collect(),
        };
        ReferenceFront::new(points)
    }

    /// Reference front of the default size for this problem's objective count.
    pub fn default_reference_front(&self) -> Result<ReferenceFront> {
        self.reference_front(default_front_size(self.spec().m()))
    }
}

impl Problem for Benchmark {
    fn spec(&self) -> &ProblemSpec {
        match self {
            Benchmark::Zdt(p) => p.spec(),
            Benchmark::Lsmop(p) => p.spec(),
            Benchmark::Synthetic(p) => p.spec(),
        }
    }

    fn objectives(&self, x: &[f64]) -> Vec<f64> {
        match self {
            Benchmark::Zdt(p) => p.objectives(x),
            Benchmark::Lsmop(p) => p.objectives(x),
            Benchmark::Synthetic(p) => p.objectives(x),
        }
    }

    fn constraints(&self, x: &[f64]) -> Constraints {
        match self {
            Benchmark::Zdt(p) => p.constraints(x),
            Benchmark::Lsmop(p) => p.constraints(x),
            Benchmark::Synthetic(p) => p.constraints(x),
        }
    }
}

/// Builds a registered problem by name. ZDT problems ignore `m` unless it
/// differs from 2, which is rejected.
pub fn build_problem(name: &str, d: usize, m: usize) -> Result<Benchmark> {
    let lower = name.to_ascii_lowercase();
    if let Some(idx) = lower.strip_prefix("zdt") {
        let variant = idx
            .parse::<u8>()
            .ok()
            .and_then(ZdtVariant::from_index)
            .ok_or_else(|| Error::UnknownProblem(name.to_string()))?;
        if m != 2 {
            return Err(Error::InvalidSpec(format!("{name} is bi-objective, got m={m}")));
        }
        return Ok(Benchmark::Zdt(Zdt::new(variant, d)?));
    }
    if let Some(idx) = lower.strip_prefix("lsmop") {
        let variant = idx.parse::<u8>().map_err(|_| Error::UnknownProblem(name.to_string()))?;
        if !(1..=9).contains(&variant) {
            return Err(Error::UnknownProblem(name.to_string()));
        }
        return Ok(Benchmark::Lsmop(Lsmop::new(variant, d, m)?));
    }
    if lower == "synthetic" {
        return Ok(Benchmark::Synthetic(SyntheticShift::with_default_shift(d, m)?));
    }
    Err(Error::UnknownProblem(name.to_string()))
}

/// Names accepted by [`build_problem`].
pub fn registered_names() -> Vec<String> {
    let mut names: Vec<String> = [1, 2, 3, 4, 6].iter().map(|i| format!("zdt{i}")).collect();
    names.extend((1..=9).map(|i| format!("lsmop{i}")));
    names.push("synthetic".into());
    names
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_resolves_names() {
        for name in registered_names() {
            let m = 2;
            let p = build_problem(&name, 40, m).unwrap();
            assert_eq!(p.spec().name(), name);
            assert_eq!(p.spec().d(), 40);
        }
        assert!(matches!(build_problem("zdt5", 30, 2), Err(Error::UnknownProblem(_))));
        assert!(matches!(build_problem("dtlz2", 30, 2), Err(Error::UnknownProblem(_))));
        assert!(build_problem("zdt1", 30, 3).is_err());
        assert_eq!(build_problem("LSMOP7", 250, 10).unwrap().spec().m(), 10);
    }

    #[test]
    fn fronts_have_requested_size_and_are_nondominated() {
        for name in registered_names() {
            for m in [2, 3] {
                let Ok(p) = build_problem(&name, 50, m) else { continue };
                for n in [1, 2, 7, 200] {
                    let front = p.reference_front(n).unwrap();
                    assert_eq!(front.size(), n, "{name}");
                    assert_eq!(front.m(), m);
                    assert!(front.is_mutually_nondominated(), "{name} m={m} n={n}");
                }
            }
        }
    }

    #[test]
    fn large_evaluations_scale() {
        let p = build_problem("lsmop8", 5000, 10).unwrap();
        let x: Vec<f64> = p.spec().upper().iter().map(|u| u / 3.0).collect();
        assert_eq!(p.objectives(&x).len(), 10);
        let z = build_problem("zdt6", 5000, 2).unwrap();
        assert_eq!(z.objectives(&vec![0.5; 5000]).len(), 2);
    }
}
