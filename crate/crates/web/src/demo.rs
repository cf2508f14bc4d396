use serde::{Deserialize, Serialize};

use pet_core::evolve::{FineEvolveConfig, ProblemRef};
use pet_core::harness::{benchmark_seed, median, run_arm, Arm};
use pet_core::metrics::{igd_points, wilcoxon_rank_sum, ALPHA};
use pet_core::moea::{fast_nondominated_sort, RunSettings};
use pet_core::mop::{Population, Solution};
use pet_core::problems::{build_problem, registered_names, Benchmark, ReferenceFront};
use pet_core::{Error, Result};

/// Reference front resolution for the plotted problems.
pub const FRONT_POINTS: usize = 500;
/// Upper bound on evaluations per run, to keep the page responsive.
pub const MAX_EVALUATIONS: usize = 50_000;

#[derive(Debug, Clone, Deserialize)]
pub struct RunRequest {
    pub problem: String,
    pub d: usize,
    pub arm: String,
    pub population_size: usize,
    pub max_evaluations: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunResult {
    /// Feasible objective vectors of the final population.
    pub points: Vec<Vec<f64>>,
    /// Ranks of `points` within the final population.
    pub ranks: Vec<usize>,
    pub reference: Vec<Vec<f64>>,
    pub igd: Option<f64>,
    /// IGD after each generation.
    pub trace: Vec<Option<f64>>,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Deserialize)]
pub struct CompareRequest {
    pub problem: String,
    pub d: usize,
    pub arms: [String; 2],
    pub population_size: usize,
    pub max_evaluations: usize,
    pub runs: usize,
    pub master_seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareResult {
    pub igd: [Vec<f64>; 2],
    pub medians: [Option<f64>; 2],
    pub p_value: f64,
    /// `+` when the first arm is significantly better, `-` when worse, `=` otherwise.
    pub mark: char,
}

/// Problems the page can plot.
pub fn bi_objective_problems() -> Vec<String> {
    registered_names()
        .into_iter()
        .filter(|n| build_problem(n, 10, 2).and_then(|p| p.reference_front(10)).is_ok())
        .collect()
}

fn demo_arm(name: &str) -> Result<Arm> {
    let arm: Arm = name.parse()?;
    if arm.needs_model() {
        return Err(Error::Config(format!(
            "arm `{arm}` needs a trained model, which the page does not ship"
        )));
    }
    Ok(arm)
}

fn setup(problem: &str, d: usize, pop: usize, evals: usize) -> Result<(Benchmark, ReferenceFront)> {
    if evals > MAX_EVALUATIONS {
        return Err(Error::Config(format!("at most {MAX_EVALUATIONS} evaluations per run")));
    }
    if pop < 2 || evals < pop {
        return Err(Error::Config(format!(
            "population {pop} and budget {evals} are incompatible"
        )));
    }
    let p = build_problem(problem, d, 2)?;
    let front = p.reference_front(FRONT_POINTS)?;
    Ok((p, front))
}

fn settings(front: &ReferenceFront, pop: usize, evals: usize) -> RunSettings<'_> {
    RunSettings {
        population_size: pop,
        max_evaluations: evals,
        reference: Some(front),
    }
}

pub fn run_optimizer(req: &RunRequest) -> Result<RunResult> {
    let arm = demo_arm(&req.arm)?;
    let (problem, front) = setup(&req.problem, req.d, req.population_size, req.max_evaluations)?;
    let out = run_arm(
        arm,
        &problem,
        settings(&front, req.population_size, req.max_evaluations),
        None,
        FineEvolveConfig::default(),
        req.seed,
    )?;
    let all = fast_nondominated_sort(&out.population)?;
    let (points, ranks): (Vec<_>, Vec<_>) = out
        .population
        .iter()
        .zip(&all.rank)
        .filter(|(s, _)| s.is_feasible())
        .map(|(s, &r)| (s.f().unwrap_or_default().to_vec(), r))
        .unzip();
    let igd = if points.is_empty() {
        None
    } else {
        Some(igd_points(front.points(), &points)?.value)
    };
    Ok(RunResult {
        points,
        ranks,
        reference: front.points().to_vec(),
        igd,
        trace: out.log.iter().map(|g| g.igd).collect(),
        evaluations: out.evaluations,
    })
}

/// Zero-based non-dominated rank of each point (all treated as feasible).
pub fn nondominated_ranks(points: &[Vec<f64>]) -> Result<Vec<usize>> {
    let members = points
        .iter()
        .map(|f| Solution::evaluated(Vec::new(), f.clone(), 0.0))
        .collect::<Result<Vec<_>>>()?;
    Ok(fast_nondominated_sort(&Population::new(members, 0))?.rank)
}

pub fn compare_arms(req: &CompareRequest) -> Result<CompareResult> {
    let arms = [demo_arm(&req.arms[0])?, demo_arm(&req.arms[1])?];
    if arms[0] == arms[1] {
        return Err(Error::Config("pick two different arms".into()));
    }
    if !(3..=30).contains(&req.runs) {
        return Err(Error::Config("between 3 and 30 runs per arm".into()));
    }
    let (problem, front) = setup(&req.problem, req.d, req.population_size, req.max_evaluations)?;
    let pref = ProblemRef::new(req.problem.clone(), req.d, 2);
    let mut igd: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
    for (k, &arm) in arms.iter().enumerate() {
        for i in 0..req.runs {
            let seed = benchmark_seed(req.master_seed, arm, &pref, i);
            let out = run_arm(
                arm,
                &problem,
                settings(&front, req.population_size, req.max_evaluations),
                None,
                FineEvolveConfig::default(),
                seed,
            )?;
            let pts = out.population.feasible_objectives();
            if !pts.is_empty() {
                igd[k].push(igd_points(front.points(), &pts)?.value);
            }
        }
    }
    let test = wilcoxon_rank_sum(&igd[0], &igd[1], ALPHA)?;
    Ok(CompareResult {
        medians: [median(&igd[0]), median(&igd[1])],
        igd,
        p_value: test.p_value,
        mark: test.decision.mark(),
    })
}
