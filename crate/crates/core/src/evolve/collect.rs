use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::dataset::{CellInfo, TrajectoryDataset, TrajectoryPair};
use crate::error::{Error, Result};
use crate::moea::{run_moea, Cso, Reproduction, RunSettings, SbxPm, TrajectorySink, VariationConfig};
use crate::mop::{Population, Problem, ProblemSpec};
use crate::problems::build_problem;
use crate::rng::{derive_seed, rng_from_seed, SeedPart};

/// Optimizers whose runs are recorded for pretraining.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Teacher {
    Nsga2,
    Cso,
}

impl Teacher {
    pub fn name(self) -> &'static str {
        match self {
            Teacher::Nsga2 => "nsga2",
            Teacher::Cso => "cso",
        }
    }

    pub fn reproduction(self) -> Box<dyn Reproduction> {
        match self {
            Teacher::Nsga2 => Box::new(SbxPm {
                cfg: VariationConfig::default(),
            }),
            Teacher::Cso => Box::new(Cso),
        }
    }
}

impl FromStr for Teacher {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "nsga2" | "nsga-ii" => Ok(Teacher::Nsga2),
            "cso" => Ok(Teacher::Cso),
            other => Err(Error::Config(format!(
                "unknown teacher '{other}' (expected nsga2 or cso)"
            ))),
        }
    }
}

/// Converts consecutive selected populations into normalized pairs.
pub struct RecordingSink<'a> {
    pub spec: &'a ProblemSpec,
    pub teacher: &'a str,
    pub seed: u64,
    pub pairs: Vec<TrajectoryPair>,
}

impl TrajectorySink for RecordingSink<'_> {
    fn append(&mut self, from: &Population, to: &Population) -> Result<()> {
        self.pairs.push(TrajectoryPair::from_populations(
            self.spec,
            self.teacher,
            self.seed,
            from,
            to,
        )?);
        Ok(())
    }
}

/// A problem instance by registered name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProblemRef {
    pub name: String,
    pub d: usize,
    pub m: usize,
}

impl ProblemRef {
    pub fn new(name: impl Into<String>, d: usize, m: usize) -> Self {
        Self {
            name: name.into(),
            d,
            m,
        }
    }
}

/// A cell that could not be recorded.
#[derive(Debug, Clone, PartialEq)]
pub struct CellFailure {
    pub problem: String,
    pub teacher: String,
    pub seed: u64,
    pub message: String,
}

/// Seed of one recording run.
pub fn collection_seed(master: u64, p: &ProblemRef, teacher: Teacher, seed_index: u64) -> u64 {
    derive_seed(
        master,
        &[
            SeedPart::Str("collect"),
            SeedPart::Str(teacher.name()),
            SeedPart::Str(&p.name),
            SeedPart::Num(p.d as u64),
            SeedPart::Num(p.m as u64),
            SeedPart::Num(seed_index),
        ],
    )
}

fn record_cell(
    p: &ProblemRef,
    teacher: Teacher,
    seed: u64,
    n: usize,
    e: usize,
) -> Result<(CellInfo, Vec<TrajectoryPair>)> {
    let problem = build_problem(&p.name, p.d, p.m)?;
    let spec = problem.spec();
    let mut sink = RecordingSink {
        spec,
        teacher: teacher.name(),
        seed,
        pairs: Vec::new(),
    };
    let settings = RunSettings {
        population_size: n,
        max_evaluations: e,
        reference: None,
    };
    let mut rep = teacher.reproduction();
    run_moea(
        &problem,
        settings,
        rep.as_mut(),
        &mut rng_from_seed(seed),
        Some(&mut sink),
    )?;
    let info = CellInfo {
        problem: spec.name().to_string(),
        d: spec.d(),
        m: spec.m(),
        teacher: teacher.name().into(),
        seed,
        pairs: sink.pairs.len(),
        lower: spec.lower().to_vec(),
        upper: spec.upper().to_vec(),
    };
    Ok((info, sink.pairs))
}

/// Runs every (problem, teacher, seed) cell with a recording sink.
///
/// Cells run independently (in parallel with the `parallel` feature) and are
/// merged in (problem, teacher, seed) order. A failing cell is reported and
/// skipped.
pub fn collect_trajectories(
    problems: &[ProblemRef],
    teachers: &[Teacher],
    n_seeds: u64,
    master_seed: u64,
    n: usize,
    e: usize,
) -> Result<(TrajectoryDataset, Vec<CellFailure>)> {
    if e < 2 * n {
        return Err(Error::Config(format!(
            "budget {e} must cover at least two generations of {n}"
        )));
    }
    let mut cells = Vec::new();
    for p in problems {
        for &t in teachers {
            for s in 0..n_seeds {
                cells.push((p, t, collection_seed(master_seed, p, t, s)));
            }
        }
    }
    let run = |&(p, t, seed): &(&ProblemRef, Teacher, u64)| record_cell(p, t, seed, n, e);
    #[cfg(feature = "parallel")]
    let results: Vec<_> = {
        use rayon::prelude::*;
        cells.par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<_> = cells.iter().map(run).collect();

    let mut infos = Vec::new();
    let mut pairs = Vec::new();
    let mut failures = Vec::new();
    for ((p, t, seed), r) in cells.iter().zip(results) {
        match r {
            Ok((info, ps)) => {
                infos.push(info);
                pairs.extend(ps);
            }
            Err(e) => failures.push(CellFailure {
                problem: p.name.clone(),
                teacher: t.name().into(),
                seed: *seed,
                message: e.to_string(),
            }),
        }
    }
    Ok((TrajectoryDataset::new(infos, pairs)?, failures))
}
