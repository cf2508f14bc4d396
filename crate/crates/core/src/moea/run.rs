use rand::Rng;
use serde::{Deserialize, Serialize};

use super::cso::cso_step;
use super::select::{nsga2_select, rank_and_crowding};
use super::variation::{polynomial_mutation, sbx_crossover, VariationConfig};
use crate::error::{contract, Error, Result};
use crate::metrics::igd;
use crate::mop::{evaluate, EvaluationBudget, Population, Problem, Solution};
use crate::problems::ReferenceFront;
use crate::rng::RunRng;

/// Receives consecutive post-selection populations of a run.
pub trait TrajectorySink {
    fn append(&mut self, from: &Population, to: &Population) -> Result<()>;
}

impl TrajectorySink for Vec<(Population, Population)> {
    fn append(&mut self, from: &Population, to: &Population) -> Result<()> {
        self.push((from.clone(), to.clone()));
        Ok(())
    }
}

/// Produces one generation of offspring for the host loop.
pub trait Reproduction {
    fn name(&self) -> &str;

    /// Up to `n` evaluated offspring of `parents`. Implementations charge
    /// `budget` for every evaluation and may return fewer than `n` members
    /// when it runs out.
    fn reproduce(
        &mut self,
        parents: &Population,
        problem: &dyn Problem,
        budget: &EvaluationBudget,
        n: usize,
        rng: &mut RunRng,
    ) -> Result<Population>;

    /// Called after environmental selection. The return value is logged as
    /// the generation's training loss.
    fn after_generation(
        &mut self,
        _parents: &Population,
        _offspring: &Population,
        _next: &Population,
    ) -> Result<Option<f64>> {
        Ok(None)
    }
}

/// One line of a run log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationLog {
    pub generation: usize,
    pub evaluations: usize,
    pub offspring: usize,
    pub igd: Option<f64>,
    pub loss: Option<f64>,
    /// The budget ran out part-way through this generation.
    pub partial: bool,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub population: Population,
    pub log: Vec<GenerationLog>,
    pub evaluations: usize,
}

/// Settings of the host loop.
#[derive(Debug, Clone, Copy)]
pub struct RunSettings<'a> {
    pub population_size: usize,
    pub max_evaluations: usize,
    pub reference: Option<&'a ReferenceFront>,
}

/// Uniform random decision vectors inside the problem bounds.
pub fn random_decisions(problem: &dyn Problem, n: usize, rng: &mut RunRng) -> Vec<Vec<f64>> {
    let spec = problem.spec();
    (0..n)
        .map(|_| {
            spec.lower()
                .iter()
                .zip(spec.upper())
                .map(|(lo, hi)| lo + rng.gen::<f64>() * (hi - lo))
                .collect()
        })
        .collect()
}

fn population_igd(pop: &Population, reference: Option<&ReferenceFront>) -> Option<f64> {
    let front = reference?;
    igd(front, &pop.feasible_objectives()).ok().map(|r| r.value)
}

/// Evaluates candidates in order against `budget`, keeping the evaluated prefix.
pub fn evaluate_candidates(
    xs: Vec<Vec<f64>>,
    problem: &dyn Problem,
    budget: &EvaluationBudget,
    generation: usize,
) -> Result<Population> {
    let pending = Population::new(xs.into_iter().map(Solution::new).collect(), generation);
    match evaluate(&pending, problem, budget) {
        Ok(out) => Ok(out.population.evaluated_only()),
        Err(Error::BudgetExhausted { .. }) => Ok(Population::new(Vec::new(), generation)),
        Err(e) => Err(e),
    }
}

/// The generational loop: initialize and evaluate `N` random members, then
/// repeat reproduce → evaluate → select-best-`N`-of-union until the budget
/// is spent. Consecutive selected populations after the first are passed to
/// `sink`, so a run with `G` offspring generations yields `G − 1` pairs.
pub fn run_moea(
    problem: &dyn Problem,
    settings: RunSettings<'_>,
    reproduction: &mut dyn Reproduction,
    rng: &mut RunRng,
    mut sink: Option<&mut dyn TrajectorySink>,
) -> Result<RunOutcome> {
    let n = settings.population_size;
    if n < 2 {
        return Err(contract("population size must be at least 2"));
    }
    if settings.max_evaluations < n {
        return Err(contract(format!(
            "budget {} is smaller than the population size {n}",
            settings.max_evaluations
        )));
    }
    let budget = EvaluationBudget::new(settings.max_evaluations);
    let init = random_decisions(problem, n, rng);
    let mut parents = evaluate_candidates(init, problem, &budget, 0)?;
    let mut log = vec![GenerationLog {
        generation: 0,
        evaluations: budget.used(),
        offspring: parents.len(),
        igd: population_igd(&parents, settings.reference),
        loss: None,
        partial: false,
    }];

    let mut generation = 0;
    while !budget.is_exhausted() {
        generation += 1;
        let want = n.min(budget.remaining());
        let offspring = reproduction
            .reproduce(&parents, problem, &budget, want, rng)?
            .with_generation(generation);
        if offspring.is_empty() {
            break;
        }
        let union = parents.union(&offspring);
        let next = nsga2_select(&union, n)?.population.with_generation(generation);
        let loss = reproduction.after_generation(&parents, &offspring, &next)?;
        if generation >= 2 {
            if let Some(s) = sink.as_deref_mut() {
                s.append(&parents, &next)?;
            }
        }
        log.push(GenerationLog {
            generation,
            evaluations: budget.used(),
            offspring: offspring.len(),
            igd: population_igd(&next, settings.reference),
            loss,
            partial: offspring.len() < n,
        });
        parents = next;
    }
    Ok(RunOutcome {
        population: parents,
        evaluations: budget.used(),
        log,
    })
}

/// Binary tournament on (rank, crowding descending, index).
pub fn tournament(rank: &[usize], crowding: &[f64], rng: &mut RunRng) -> usize {
    let n = rank.len();
    let a = rng.gen_range(0..n);
    let b = rng.gen_range(0..n);
    let a_better = rank[a]
        .cmp(&rank[b])
        .then_with(|| crowding[b].total_cmp(&crowding[a]))
        .then(a.cmp(&b))
        .is_le();
    if a_better {
        a
    } else {
        b
    }
}

/// Classical NSGA-II variation: tournament, SBX, polynomial mutation.
#[derive(Debug, Clone, Default)]
pub struct SbxPm {
    pub cfg: VariationConfig,
}

impl Reproduction for SbxPm {
    fn name(&self) -> &str {
        "nsga2"
    }

    fn reproduce(
        &mut self,
        parents: &Population,
        problem: &dyn Problem,
        budget: &EvaluationBudget,
        n: usize,
        rng: &mut RunRng,
    ) -> Result<Population> {
        let spec = problem.spec();
        let (rank, crowding) = rank_and_crowding(parents)?;
        let mut xs = Vec::with_capacity(n + 1);
        while xs.len() < n {
            let a = parents.members()[tournament(&rank, &crowding, rng)].x();
            let b = parents.members()[tournament(&rank, &crowding, rng)].x();
            let (c1, c2) = sbx_crossover(a, b, spec, &self.cfg, rng);
            xs.push(polynomial_mutation(&c1, spec, &self.cfg, rng));
            xs.push(polynomial_mutation(&c2, spec, &self.cfg, rng));
        }
        xs.truncate(n);
        evaluate_candidates(xs, problem, budget, parents.generation() + 1)
    }
}

/// Competitive-swarm variation: the moved losers of one [`cso_step`].
#[derive(Debug, Clone, Copy, Default)]
pub struct Cso;

impl Reproduction for Cso {
    fn name(&self) -> &str {
        "cso"
    }

    fn reproduce(
        &mut self,
        parents: &Population,
        problem: &dyn Problem,
        budget: &EvaluationBudget,
        n: usize,
        rng: &mut RunRng,
    ) -> Result<Population> {
        let stepped = cso_step(parents, problem.spec(), rng)?;
        let mut xs: Vec<Vec<f64>> = stepped
            .iter()
            .filter(|s| !s.is_evaluated())
            .map(|s| s.x().to_vec())
            .collect();
        xs.truncate(n);
        evaluate_candidates(xs, problem, budget, parents.generation() + 1)
    }
}

/// Uniform random offspring; the no-learning baseline.
#[derive(Debug, Clone, Copy, Default)]
pub struct RandomSearch;

impl Reproduction for RandomSearch {
    fn name(&self) -> &str {
        "random"
    }

    fn reproduce(
        &mut self,
        parents: &Population,
        problem: &dyn Problem,
        budget: &EvaluationBudget,
        n: usize,
        rng: &mut RunRng,
    ) -> Result<Population> {
        let xs = random_decisions(problem, n, rng);
        evaluate_candidates(xs, problem, budget, parents.generation() + 1)
    }
}

/// NSGA-II with SBX and polynomial mutation.
pub fn run_nsga2(
    problem: &dyn Problem,
    settings: RunSettings<'_>,
    cfg: VariationConfig,
    rng: &mut RunRng,
    sink: Option<&mut dyn TrajectorySink>,
) -> Result<RunOutcome> {
    cfg.validate()?;
    run_moea(problem, settings, &mut SbxPm { cfg }, rng, sink)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::build_problem;
    use crate::rng::rng_from_seed;

    fn settings(n: usize, e: usize) -> RunSettings<'static> {
        RunSettings {
            population_size: n,
            max_evaluations: e,
            reference: None,
        }
    }

    #[test]
    fn nine_generations_for_thousand_evaluations() {
        let p = build_problem("zdt1", 10, 2).unwrap();
        let out = run_nsga2(
            &p,
            settings(100, 1000),
            VariationConfig::default(),
            &mut rng_from_seed(1),
            None,
        )
        .unwrap();
        assert_eq!(out.evaluations, 1000);
        assert_eq!(out.log.len(), 10);
        assert_eq!(out.log.last().unwrap().generation, 9);
        assert_eq!(out.population.len(), 100);
    }

    #[test]
    fn one_generation_budget_returns_initial_population() {
        let p = build_problem("zdt2", 5, 2).unwrap();
        let out = run_nsga2(
            &p,
            settings(10, 10),
            VariationConfig::default(),
            &mut rng_from_seed(2),
            None,
        )
        .unwrap();
        assert_eq!(out.evaluations, 10);
        assert_eq!(out.log.len(), 1);
        assert!(out.population.all_evaluated());
    }

    #[test]
    fn partial_generation_is_merged_and_logged() {
        let p = build_problem("zdt1", 5, 2).unwrap();
        let out = run_nsga2(
            &p,
            settings(20, 95),
            VariationConfig::default(),
            &mut rng_from_seed(3),
            None,
        )
        .unwrap();
        assert_eq!(out.evaluations, 95);
        let last = out.log.last().unwrap();
        assert!(last.partial);
        assert_eq!(last.offspring, 15);
        assert_eq!(out.population.len(), 20);
    }

    #[test]
    fn seeded_runs_are_identical_and_trajectory_counts_match() {
        let p = build_problem("zdt3", 8, 2).unwrap();
        let run = |seed| {
            let mut sink: Vec<(Population, Population)> = Vec::new();
            let out = run_nsga2(
                &p,
                settings(20, 400),
                VariationConfig::default(),
                &mut rng_from_seed(seed),
                Some(&mut sink),
            )
            .unwrap();
            (out.population, sink)
        };
        let (a, sa) = run(5);
        let (b, sb) = run(5);
        assert_eq!(a, b);
        assert_eq!(sa, sb);
        // 400 = 20 init + 19 generations → 18 pairs.
        assert_eq!(sa.len(), 18);
        for (x, y) in &sa {
            assert_eq!(x.len(), 20);
            assert_eq!(y.len(), 20);
            assert_eq!(x.generation() + 1, y.generation());
        }
    }

    #[test]
    fn cso_improves_igd_on_large_zdt1() {
        let p = build_problem("zdt1", 100, 2).unwrap();
        let front = p.default_reference_front().unwrap();
        let mut first = Vec::new();
        let mut last = Vec::new();
        for seed in 0..5 {
            let s = RunSettings {
                population_size: 100,
                // 100 initial evaluations + 50 generations of 50 moved losers.
                max_evaluations: 100 + 50 * 50,
                reference: Some(&front),
            };
            let out = run_moea(&p, s, &mut Cso, &mut rng_from_seed(seed), None).unwrap();
            assert_eq!(out.log.len(), 51);
            first.push(out.log[0].igd.unwrap());
            last.push(out.log.last().unwrap().igd.unwrap());
        }
        first.sort_by(f64::total_cmp);
        last.sort_by(f64::total_cmp);
        assert!(last[2] < first[2], "median IGD {} -> {}", first[2], last[2]);
    }

    #[test]
    fn undersized_budget_rejected() {
        let p = build_problem("zdt1", 5, 2).unwrap();
        assert!(run_moea(&p, settings(10, 9), &mut RandomSearch, &mut rng_from_seed(0), None).is_err());
    }
}
