use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::{FineEvolveConfig, ProblemRef};
use crate::problems::build_problem;

/// An algorithm arm of a benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Arm {
    /// NSGA-II with SBX and polynomial mutation.
    Nsga2,
    Cso,
    /// Uniform sampling in bounds with NSGA-II survival.
    Random,
    /// NSGA-II whose offspring come from a fine-evolved PET.
    Pet,
    /// PET offspring without fine-evolving.
    PetFrozen,
}

impl Arm {
    pub const ALL: [Arm; 5] = [Arm::Nsga2, Arm::Cso, Arm::Random, Arm::Pet, Arm::PetFrozen];

    pub fn name(self) -> &'static str {
        match self {
            Arm::Nsga2 => "nsga2",
            Arm::Cso => "cso",
            Arm::Random => "random",
            Arm::Pet => "pet",
            Arm::PetFrozen => "pet-frozen",
        }
    }

    pub fn needs_model(self) -> bool {
        matches!(self, Arm::Pet | Arm::PetFrozen)
    }
}

impl fmt::Display for Arm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Arm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Arm::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown arm `{s}`")))
    }
}

fn default_reference_arm() -> Arm {
    Arm::Pet
}

/// A benchmark: every arm on every problem for `n_seeds` seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problems: Vec<ProblemRef>,
    pub arms: Vec<Arm>,
    /// The arm every other arm is compared against.
    #[serde(default = "default_reference_arm")]
    pub reference_arm: Arm,
    pub population_size: usize,
    pub max_evaluations: usize,
    pub n_seeds: usize,
    #[serde(default)]
    pub master_seed: u64,
    /// Checkpoint for the PET arms, resolved relative to the config file.
    #[serde(default)]
    pub model: Option<PathBuf>,
    #[serde(default)]
    pub fine_evolve: FineEvolveConfig,
    /// Reference front size; defaults by objective count.
    #[serde(default)]
    pub front_size: Option<usize>,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.n_seeds == 0 {
            return fail("n_seeds must be at least 1".into());
        }
        if self.problems.is_empty() || self.arms.is_empty() {
            return fail("at least one problem and one arm are required".into());
        }
        if self.population_size < 2 {
            return fail(format!("population size {} is below 2", self.population_size));
        }
        if self.max_evaluations < self.population_size {
            return fail(format!(
                "budget {} is smaller than the population size {}",
                self.max_evaluations, self.population_size
            ));
        }
        if self.front_size == Some(0) {
            return fail("front_size must be positive".into());
        }
        for (i, a) in self.arms.iter().enumerate() {
            if self.arms[..i].contains(a) {
                return fail(format!("arm `{a}` is listed twice"));
            }
        }
        if !self.arms.contains(&self.reference_arm) {
            return fail(format!("reference arm `{}` is not among the arms", self.reference_arm));
        }
        for p in &self.problems {
            build_problem(&p.name, p.d, p.m)?;
        }
        Ok(())
    }

    pub fn needs_model(&self) -> bool {
        self.arms.iter().any(|a| a.needs_model())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads and validates a config file. A relative model path is taken
    /// relative to the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg = Self::from_json(&std::fs::read_to_string(path)?)?;
        if let (Some(m), Some(dir)) = (&cfg.model, path.parent()) {
            if m.is_relative() {
                cfg.model = Some(dir.join(m));
            }
        }
        Ok(cfg)
    }
}
