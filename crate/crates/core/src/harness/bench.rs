use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::{Arm, ExperimentConfig};
use crate::error::{Error, Result};
use crate::evolve::{run_nsga2_pet, FineEvolveConfig, ProblemRef, Teacher};
use crate::metrics::{igd, roc_against_best, round2, wilcoxon_rank_sum, ALPHA};
use crate::moea::{run_moea, run_nsga2, GenerationLog, RandomSearch, RunOutcome, RunSettings, VariationConfig};
use crate::pet::PetModel;
use crate::problems::{build_problem, default_front_size, Benchmark, ReferenceFront};
use crate::rng::{derive_seed, rng_from_seed, SeedPart};

/// Outcome of one (arm, problem, seed) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub arm: Arm,
    pub problem: String,
    pub d: usize,
    pub m: usize,
    pub seed_index: usize,
    pub seed: u64,
    /// Final IGD; `None` when the cell failed.
    pub igd: Option<f64>,
    pub evaluations: usize,
    pub wall_seconds: f64,
    pub error: Option<String>,
    /// Per-generation log; written to a separate file by the reporter.
    #[serde(skip)]
    pub log: Vec<GenerationLog>,
}

impl RunRecord {
    pub fn succeeded(&self) -> bool {
        self.igd.is_some()
    }
}

/// Median final IGD of one arm on one problem and its comparison with the
/// reference arm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmSummary {
    pub arm: Arm,
    /// `None` when every run failed (printed as NaN).
    pub median: Option<f64>,
    pub successes: usize,
    pub failures: usize,
    /// Rank-sum p-value against the reference arm.
    pub p_value: Option<f64>,
    /// `+`, `-` or `=` from this arm's side; absent for the reference arm or
    /// when either side has fewer than three successful runs.
    pub mark: Option<char>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSummary {
    pub problem: String,
    pub d: usize,
    pub m: usize,
    pub arms: Vec<ArmSummary>,
    /// Improvement of the reference arm over the best other arm, in percent
    /// rounded to two decimals.
    pub roc_percent: Option<f64>,
}

/// Count of `+`, `-` and `=` marks of one arm over all problems.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub arm: Arm,
    pub better: usize,
    pub worse: usize,
    pub indifferent: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub reference_arm: Arm,
    pub arms: Vec<Arm>,
    pub population_size: usize,
    pub max_evaluations: usize,
    pub n_seeds: usize,
    pub problems: Vec<ProblemSummary>,
    pub tallies: Vec<Tally>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkReport {
    pub records: Vec<RunRecord>,
    pub summary: Summary,
}

/// Seed of one benchmark cell.
pub fn benchmark_seed(master: u64, arm: Arm, p: &ProblemRef, seed_index: usize) -> u64 {
    derive_seed(
        master,
        &[
            SeedPart::Str(arm.name()),
            SeedPart::Str(&p.name),
            SeedPart::Num(p.d as u64),
            SeedPart::Num(p.m as u64),
            SeedPart::Num(seed_index as u64),
        ],
    )
}

/// Runs one arm once and returns the outcome.
pub fn run_arm(
    arm: Arm,
    problem: &Benchmark,
    settings: RunSettings<'_>,
    model: Option<&PetModel>,
    fine: FineEvolveConfig,
    seed: u64,
) -> Result<RunOutcome> {
    let mut rng = rng_from_seed(seed);
    match arm {
        Arm::Nsga2 => run_nsga2(problem, settings, VariationConfig::default(), &mut rng, None),
        Arm::Cso => run_moea(problem, settings, Teacher::Cso.reproduction().as_mut(), &mut rng, None),
        Arm::Random => run_moea(problem, settings, &mut RandomSearch, &mut rng, None),
        Arm::Pet | Arm::PetFrozen => {
            let model = model.ok_or_else(|| Error::Config(format!("arm `{arm}` needs a model")))?;
            let fine = if arm == Arm::Pet {
                fine
            } else {
                FineEvolveConfig::frozen()
            };
            run_nsga2_pet(problem, model.clone(), settings, fine, &mut rng).map(|(out, _)| out)
        }
    }
}

struct Cell<'a> {
    arm: Arm,
    problem: &'a ProblemRef,
    built: &'a Benchmark,
    front: &'a ReferenceFront,
    seed_index: usize,
    seed: u64,
}

fn run_cell(cell: &Cell<'_>, cfg: &ExperimentConfig, model: Option<&PetModel>) -> RunRecord {
    let start = Instant::now();
    let settings = RunSettings {
        population_size: cfg.population_size,
        max_evaluations: cfg.max_evaluations,
        reference: None,
    };
    let result = run_arm(cell.arm, cell.built, settings, model, cfg.fine_evolve, cell.seed)
        .and_then(|out| igd(cell.front, &out.population.feasible_objectives()).map(|r| (out, r.value)));
    let (igd, evaluations, log, error) = match result {
        Ok((out, v)) => (Some(v), out.evaluations, out.log, None),
        Err(e) => (None, 0, Vec::new(), Some(e.to_string())),
    };
    RunRecord {
        arm: cell.arm,
        problem: cell.problem.name.clone(),
        d: cell.problem.d,
        m: cell.problem.m,
        seed_index: cell.seed_index,
        seed: cell.seed,
        igd,
        evaluations,
        wall_seconds: start.elapsed().as_secs_f64(),
        error,
        log,
    }
}

/// Median of a non-empty sample.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[k]
    } else {
        (v[k - 1] + v[k]) / 2.0
    })
}

/// Runs every (problem, arm, seed) cell. Cells run on a worker pool with
/// the `parallel` feature; records come back in (problem, arm, seed) order.
/// Failed cells are recorded with their error and left out of statistics.
pub fn run_benchmark(cfg: &ExperimentConfig, model: Option<&PetModel>) -> Result<BenchmarkReport> {
    cfg.validate()?;
    if cfg.needs_model() && model.is_none() {
        return Err(Error::Config("a PET arm is listed but no model was given".into()));
    }
    let mut built = Vec::new();
    for p in &cfg.problems {
        let b = build_problem(&p.name, p.d, p.m)?;
        let front = b.reference_front(cfg.front_size.unwrap_or_else(|| default_front_size(p.m)))?;
        built.push((b, front));
    }
    let mut cells = Vec::new();
    for (p, (b, front)) in cfg.problems.iter().zip(&built) {
        for &arm in &cfg.arms {
            for seed_index in 0..cfg.n_seeds {
                cells.push(Cell {
                    arm,
                    problem: p,
                    built: b,
                    front,
                    seed_index,
                    seed: benchmark_seed(cfg.master_seed, arm, p, seed_index),
                });
            }
        }
    }
    #[cfg(feature = "parallel")]
    let records: Vec<RunRecord> = {
        use rayon::prelude::*;
        cells.par_iter().map(|c| run_cell(c, cfg, model)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let records: Vec<RunRecord> = cells.iter().map(|c| run_cell(c, cfg, model)).collect();

    let summary = summarize(cfg, &records)?;
    Ok(BenchmarkReport { records, summary })
}

/// Aggregates records into medians, rank-sum marks and ROC values.
pub fn summarize(cfg: &ExperimentConfig, records: &[RunRecord]) -> Result<Summary> {
    let mut samples: BTreeMap<(&str, usize, usize, Arm), (Vec<f64>, usize)> = BTreeMap::new();
    for r in records {
        let e = samples.entry((r.problem.as_str(), r.d, r.m, r.arm)).or_default();
        match r.igd {
            Some(v) => e.0.push(v),
            None => e.1 += 1,
        }
    }
    let empty = (Vec::new(), 0);
    let mut tallies: Vec<Tally> = cfg
        .arms
        .iter()
        .filter(|&&a| a != cfg.reference_arm)
        .map(|&arm| Tally {
            arm,
            better: 0,
            worse: 0,
            indifferent: 0,
        })
        .collect();
    let mut problems = Vec::new();
    for p in &cfg.problems {
        let get = |arm: Arm| samples.get(&(p.name.as_str(), p.d, p.m, arm)).unwrap_or(&empty);
        let (reference, _) = get(cfg.reference_arm);
        let mut arms = Vec::new();
        for &arm in &cfg.arms {
            let (values, failures) = get(arm);
            let mut summary = ArmSummary {
                arm,
                median: median(values),
                successes: values.len(),
                failures: *failures,
                p_value: None,
                mark: None,
            };
            if arm != cfg.reference_arm && values.len() >= 3 && reference.len() >= 3 {
                let test = wilcoxon_rank_sum(values, reference, ALPHA)?;
                summary.p_value = Some(test.p_value);
                summary.mark = Some(test.decision.mark());
                let t = tallies.iter_mut().find(|t| t.arm == arm).expect("tally per arm");
                match test.decision.mark() {
                    '+' => t.better += 1,
                    '-' => t.worse += 1,
                    _ => t.indifferent += 1,
                }
            }
            arms.push(summary);
        }
        let ours = arms.iter().find(|a| a.arm == cfg.reference_arm).and_then(|a| a.median);
        let baselines: Vec<f64> = arms
            .iter()
            .filter(|a| a.arm != cfg.reference_arm)
            .filter_map(|a| a.median)
            .collect();
        let roc_percent = ours.and_then(|o| roc_against_best(&baselines, o)).map(round2);
        problems.push(ProblemSummary {
            problem: p.name.clone(),
            d: p.d,
            m: p.m,
            arms,
            roc_percent,
        });
    }
    Ok(Summary {
        reference_arm: cfg.reference_arm,
        arms: cfg.arms.clone(),
        population_size: cfg.population_size,
        max_evaluations: cfg.max_evaluations,
        n_seeds: cfg.n_seeds,
        problems,
        tallies,
    })
}
