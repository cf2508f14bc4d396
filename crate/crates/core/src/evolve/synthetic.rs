use crate::error::Result;
use crate::moea::evaluate_candidates;
use crate::mop::{EvaluationBudget, Population, Problem};
use crate::pet::{example_from_populations, generate_population, Example, PetModel};
use crate::problems::SyntheticShift;
use crate::rng::RunRng;

/// Half-width of the clusters used as synthetic parent populations.
pub const DEFAULT_SPREAD: f64 = 0.02;

fn evaluated(problem: &SyntheticShift, xs: Vec<Vec<f64>>) -> Result<Population> {
    let b = EvaluationBudget::new(xs.len());
    evaluate_candidates(xs, problem, &b, 0)
}

/// A parent cluster and its exact shifted successor.
pub fn synthetic_populations(
    problem: &SyntheticShift,
    n: usize,
    spread: f64,
    rng: &mut RunRng,
) -> Result<(Population, Population)> {
    let xs = problem.sample_population(rng, n, spread);
    let next: Vec<Vec<f64>> = xs.iter().map(|x| problem.target(x)).collect();
    Ok((evaluated(problem, xs)?, evaluated(problem, next)?.with_generation(1)))
}

pub fn synthetic_example(problem: &SyntheticShift, n: usize, spread: f64, rng: &mut RunRng) -> Result<Example> {
    let (p, q) = synthetic_populations(problem, n, spread, rng)?;
    example_from_populations(&p, &q, problem.spec())
}

/// `count` examples for each `(d, m)` shape.
pub fn synthetic_examples(
    shapes: &[(usize, usize)],
    n: usize,
    count: usize,
    spread: f64,
    rng: &mut RunRng,
) -> Result<Vec<Example>> {
    let mut out = Vec::with_capacity(shapes.len() * count);
    for &(d, m) in shapes {
        let problem = SyntheticShift::with_default_shift(d, m)?;
        for _ in 0..count {
            out.push(synthetic_example(&problem, n, spread, rng)?);
        }
    }
    Ok(out)
}

/// Mean over `points` of the squared distance to the nearest target.
pub fn mean_nearest_sq_distance(points: &[Vec<f64>], targets: &[Vec<f64>]) -> f64 {
    let total: f64 = points
        .iter()
        .map(|p| {
            targets
                .iter()
                .map(|t| p.iter().zip(t).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
                .fold(f64::INFINITY, f64::min)
        })
        .sum();
    total / points.len() as f64
}

/// Generates one offspring generation from a fresh synthetic cluster and
/// scores it against the known-optimal successor. The random
/// initialization token is left out of the score.
pub fn one_generation_distance(
    model: &PetModel,
    problem: &SyntheticShift,
    n: usize,
    spread: f64,
    rng: &mut RunRng,
) -> Result<f64> {
    let (parents, next) = synthetic_populations(problem, n, spread, rng)?;
    let budget = EvaluationBudget::new(n);
    let offspring = generate_population(&parents, model, problem, &budget, n, rng)?.population;
    let decoded: Vec<Vec<f64>> = offspring.iter().skip(1).map(|s| s.x().to_vec()).collect();
    let targets: Vec<Vec<f64>> = next.iter().map(|s| s.x().to_vec()).collect();
    Ok(mean_nearest_sq_distance(&decoded, &targets))
}
