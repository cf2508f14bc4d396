use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moea::{nsga2_select, run_moea, Reproduction, RunOutcome, RunSettings};
use crate::mop::{EvaluationBudget, Population, Problem, ProblemSpec};
use crate::nn::{AdamConfig, AdamState};
use crate::pet::{example_from_populations, generate_population, Example, PetModel};
use crate::rng::{rng_from_seed, RunRng};

/// Offline training settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PretrainConfig {
    pub batch_size: usize,
    pub steps: usize,
    pub adam: AdamConfig,
    pub seed: u64,
    /// Record the batch loss every this many steps (and at the last step).
    pub eval_every: usize,
}

impl Default for PretrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 64,
            steps: 1000,
            adam: AdamConfig::default(),
            seed: 0,
            eval_every: 50,
        }
    }
}

impl PretrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 || self.steps == 0 || self.eval_every == 0 {
            return Err(Error::Config(
                "batch_size, steps and eval_every must be at least 1".into(),
            ));
        }
        if !(self.adam.lr > 0.0) {
            return Err(Error::Config("learning rate must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossPoint {
    pub step: usize,
    pub loss: f64,
}

/// Rejects examples the model cannot hold, naming the first offender.
pub fn check_capacity(model: &PetModel, examples: &[Example]) -> Result<()> {
    for (i, ex) in examples.iter().enumerate() {
        ex.validate().map_err(|e| Error::Data(format!("example {i}: {e}")))?;
        let n = ex.parents_x.len().max(ex.target_x.len());
        model
            .config()
            .check_capacity(ex.d, ex.m, n)
            .map_err(|e| Error::Capacity(format!("example {i} (d={}, m={}, N={n}): {e}", ex.d, ex.m)))?;
    }
    Ok(())
}

/// Batches for one pass over the data: examples are grouped by shape,
/// shuffled within each group and chunked, then the batches are shuffled.
fn epoch_batches(
    groups: &BTreeMap<(usize, usize, usize, usize), Vec<usize>>,
    size: usize,
    rng: &mut RunRng,
) -> Vec<Vec<usize>> {
    let mut batches = Vec::new();
    for members in groups.values() {
        let mut idx = members.clone();
        idx.shuffle(rng);
        batches.extend(idx.chunks(size).map(<[usize]>::to_vec));
    }
    batches.shuffle(rng);
    batches
}

/// Mini-batch teacher-forced training with Adam. Returns the loss curve.
pub fn pretrain(model: &mut PetModel, examples: &[Example], cfg: &PretrainConfig) -> Result<Vec<LossPoint>> {
    pretrain_monitored(model, examples, cfg, |_, _| Ok(()))
}

/// [`pretrain`] that also hands every recorded loss point and the current
/// weights to `monitor`; an error from the monitor stops training.
pub fn pretrain_monitored(
    model: &mut PetModel,
    examples: &[Example],
    cfg: &PretrainConfig,
    mut monitor: impl FnMut(&LossPoint, &PetModel) -> Result<()>,
) -> Result<Vec<LossPoint>> {
    cfg.validate()?;
    if examples.is_empty() {
        return Err(Error::Data("cannot pretrain on an empty dataset".into()));
    }
    check_capacity(model, examples)?;
    let mut groups: BTreeMap<_, Vec<usize>> = BTreeMap::new();
    for (i, ex) in examples.iter().enumerate() {
        groups.entry(ex.shape_key()).or_default().push(i);
    }
    let mut rng = rng_from_seed(cfg.seed);
    let mut adam = AdamState::new(model.params(), cfg.adam);
    let mut queue: Vec<Vec<usize>> = Vec::new();
    let mut curve = Vec::new();
    for step in 1..=cfg.steps {
        if queue.is_empty() {
            queue = epoch_batches(&groups, cfg.batch_size, &mut rng);
            queue.reverse();
        }
        let batch_idx = queue.pop().unwrap();
        let batch: Vec<&Example> = batch_idx.iter().map(|&i| &examples[i]).collect();
        let (loss, grads) = model.loss_and_gradients(&batch)?;
        if !loss.is_finite() {
            return Err(Error::NonFinite {
                problem: format!("training loss at step {step}"),
            });
        }
        adam.step(model.params_mut(), &grads)?;
        if step % cfg.eval_every == 0 || step == cfg.steps || step == 1 {
            let point = LossPoint { step, loss };
            monitor(&point, model)?;
            curve.push(point);
        }
    }
    Ok(curve)
}

/// Mean teacher-forced loss over `examples`, in shape-grouped batches.
pub fn mean_loss(model: &PetModel, examples: &[Example], batch_size: usize) -> Result<f64> {
    let mut groups: BTreeMap<_, Vec<&Example>> = BTreeMap::new();
    for ex in examples {
        groups.entry(ex.shape_key()).or_default().push(ex);
    }
    let (mut total, mut count) = (0.0, 0usize);
    for members in groups.values() {
        for chunk in members.chunks(batch_size.max(1)) {
            total += model.loss(chunk)? * chunk.len() as f64;
            count += chunk.len();
        }
    }
    if count == 0 {
        return Err(Error::Data("no examples".into()));
    }
    Ok(total / count as f64)
}

/// Online updates inside an optimization run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FineEvolveConfig {
    pub steps_per_generation: usize,
    pub lr: f64,
    pub enabled: bool,
}

impl Default for FineEvolveConfig {
    fn default() -> Self {
        Self {
            steps_per_generation: 1,
            lr: 1e-4,
            enabled: true,
        }
    }
}

impl FineEvolveConfig {
    /// The ablation arm that never updates the model.
    pub fn frozen() -> Self {
        Self {
            enabled: false,
            ..Self::default()
        }
    }
}

/// Trains toward `nsga2_select(x_g ∪ x_g1, |x_g|)`. Returns the loss before
/// the first update, or `None` when disabled.
pub fn fine_evolve_step(
    model: &mut PetModel,
    adam: &mut AdamState,
    spec: &ProblemSpec,
    x_g: &Population,
    x_g1: &Population,
    cfg: &FineEvolveConfig,
) -> Result<Option<f64>> {
    if !cfg.enabled || cfg.steps_per_generation == 0 {
        return Ok(None);
    }
    let target = nsga2_select(&x_g.union(x_g1), x_g.len())?.population;
    let ex = example_from_populations(x_g, &target, spec)?;
    adam.cfg.lr = cfg.lr;
    let mut first = None;
    for _ in 0..cfg.steps_per_generation {
        let (loss, grads) = model.loss_and_gradients(&[&ex])?;
        first.get_or_insert(loss);
        adam.step(model.params_mut(), &grads)?;
    }
    Ok(first)
}

/// PET as the variation step of NSGA-II, optionally fine-evolved.
pub struct PetReproduction {
    pub model: PetModel,
    pub adam: AdamState,
    pub fine: FineEvolveConfig,
    spec: ProblemSpec,
}

impl PetReproduction {
    pub fn new(model: PetModel, spec: ProblemSpec, fine: FineEvolveConfig) -> Self {
        let adam = AdamState::new(
            model.params(),
            AdamConfig {
                lr: fine.lr,
                ..AdamConfig::default()
            },
        );
        Self {
            model,
            adam,
            fine,
            spec,
        }
    }
}

impl Reproduction for PetReproduction {
    fn name(&self) -> &str {
        if self.fine.enabled {
            "pet"
        } else {
            "pet-frozen"
        }
    }

    fn reproduce(
        &mut self,
        parents: &Population,
        problem: &dyn Problem,
        budget: &EvaluationBudget,
        n: usize,
        rng: &mut RunRng,
    ) -> Result<Population> {
        Ok(generate_population(parents, &self.model, problem, budget, n, rng)?.population)
    }

    fn after_generation(
        &mut self,
        parents: &Population,
        offspring: &Population,
        _next: &Population,
    ) -> Result<Option<f64>> {
        fine_evolve_step(
            &mut self.model,
            &mut self.adam,
            &self.spec,
            parents,
            offspring,
            &self.fine,
        )
    }
}

/// NSGA-II with PET generating every offspring generation. Returns the run
/// outcome and the (possibly fine-evolved) model.
pub fn run_nsga2_pet(
    problem: &dyn Problem,
    model: PetModel,
    settings: RunSettings<'_>,
    fine: FineEvolveConfig,
    rng: &mut RunRng,
) -> Result<(RunOutcome, PetModel)> {
    let spec = problem.spec();
    model
        .config()
        .check_capacity(spec.d(), spec.m(), settings.population_size)?;
    let mut rep = PetReproduction::new(model, spec.clone(), fine);
    let out = run_moea(problem, settings, &mut rep, rng, None)?;
    Ok((out, rep.model))
}
