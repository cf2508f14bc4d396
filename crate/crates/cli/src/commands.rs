use std::fs;
use std::io::Write;
use std::path::Path;

use pet_core::evolve::{
    collect_trajectories, pretrain, FineEvolveConfig, PretrainConfig, ProblemRef, Teacher, TrajectoryDataset,
};
use pet_core::harness::{emit_report, run_arm, run_benchmark, Arm, ExperimentConfig};
use pet_core::metrics::igd_points;
use pet_core::moea::RunSettings;
use pet_core::nn::AdamConfig;
use pet_core::pet::{load_checkpoint, save_checkpoint, PetConfig, PetModel};
use pet_core::problems::{build_problem, default_front_size};
use pet_core::rng::{derive_seed, rng_from_seed, SeedPart};
use pet_core::selftest::run_selftest;
use pet_core::Error;

use crate::cli::{BenchmarkArgs, Cli, CollectArgs, Command, IgdArgs, OptimizeArgs, PretrainArgs, SelftestArgs};
use crate::points::{format_points, read_points};

#[derive(Debug)]
pub enum Failure {
    /// The arguments are well-formed for the parser but unusable.
    Usage(String),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

type Outcome = Result<(), Failure>;

pub fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Collect(a) => collect(a),
        Command::Pretrain(a) => pretrain_cmd(a),
        Command::Optimize(a) => optimize(a),
        Command::Benchmark(a) => benchmark(a),
        Command::Igd(a) => igd_cmd(a),
        Command::Selftest(a) => selftest(a),
    }
}

/// Parses `name:d[:m]`, with `m` defaulting to 2.
pub fn parse_problem(entry: &str) -> Result<ProblemRef, Failure> {
    let bad = || Failure::Usage(format!("problem `{entry}` is not of the form name:d[:m]"));
    let mut parts = entry.split(':');
    let name = parts.next().filter(|n| !n.is_empty()).ok_or_else(bad)?;
    let d = parts.next().and_then(|v| v.parse().ok()).ok_or_else(bad)?;
    let m = match parts.next() {
        Some(v) => v.parse().map_err(|_| bad())?,
        None => 2,
    };
    if parts.next().is_some() {
        return Err(bad());
    }
    Ok(ProblemRef::new(name, d, m))
}

fn collect(a: CollectArgs) -> Outcome {
    let problems = a
        .problems
        .iter()
        .map(|p| parse_problem(p))
        .collect::<Result<Vec<_>, _>>()?;
    let teachers = a
        .teachers
        .iter()
        .map(|t| t.parse::<Teacher>().map_err(|e| Failure::Usage(e.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    for p in &problems {
        build_problem(&p.name, p.d, p.m).map_err(|e| Failure::Usage(e.to_string()))?;
    }
    let (data, failures) = collect_trajectories(&problems, &teachers, a.seeds, a.master_seed, a.pop, a.evals)?;
    for f in &failures {
        eprintln!("skipped {} / {} / seed {}: {}", f.problem, f.teacher, f.seed, f.message);
    }
    data.save(&a.out)?;
    println!(
        "{} pairs from {} cells written to {}",
        data.pairs.len(),
        data.manifest.cells.len(),
        a.out.display()
    );
    Ok(())
}

fn read_model_config(path: &Path) -> Result<PetConfig, Failure> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Failure::Runtime(Error::Config(format!("{}: {e}", path.display()))))
}

fn pretrain_cmd(a: PretrainArgs) -> Outcome {
    let model_cfg: PetConfig = match &a.config {
        Some(p) => read_model_config(p)?,
        None => PetConfig::default(),
    };
    let cfg = PretrainConfig {
        batch_size: a.batch_size,
        steps: a.steps,
        adam: AdamConfig {
            lr: a.lr,
            ..AdamConfig::default()
        },
        seed: derive_seed(a.seed, &[SeedPart::Str("shuffle")]),
        eval_every: a.eval_every,
    };
    cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let data = TrajectoryDataset::load(&a.data)?;
    let examples = data.examples();
    let mut model = PetModel::new(
        model_cfg,
        &mut rng_from_seed(derive_seed(a.seed, &[SeedPart::Str("init")])),
    )?;
    let curve = pretrain(&mut model, &examples, &cfg)?;
    if let Some(path) = &a.curve {
        let mut f = std::io::BufWriter::new(fs::File::create(path)?);
        for p in &curve {
            serde_json::to_writer(&mut f, p).map_err(Error::from)?;
            f.write_all(b"\n")?;
        }
        f.flush()?;
    }
    save_checkpoint(&model, &a.out)?;
    let last = curve.last().map_or(f64::NAN, |p| p.loss);
    println!(
        "{} parameters trained for {} steps on {} pairs, final batch loss {last:.4e}; saved {}",
        model.parameter_count(),
        a.steps,
        examples.len(),
        a.out.display()
    );
    Ok(())
}

fn optimize(a: OptimizeArgs) -> Outcome {
    let arm: Arm = a.arm.parse().map_err(|e: Error| Failure::Usage(e.to_string()))?;
    let problem = build_problem(&a.problem, a.d, a.m).map_err(|e| Failure::Usage(e.to_string()))?;
    let model = match (&a.model, arm.needs_model()) {
        (Some(p), true) => Some(load_checkpoint(p)?),
        (None, true) => return Err(Failure::Usage(format!("arm `{arm}` needs --model"))),
        _ => None,
    };
    let front_size = a.front_size.unwrap_or_else(|| default_front_size(a.m));
    let front = problem.reference_front(front_size).ok();
    let settings = RunSettings {
        population_size: a.pop,
        max_evaluations: a.evals,
        reference: front.as_ref(),
    };
    let fine = FineEvolveConfig {
        lr: a.fine_lr,
        ..FineEvolveConfig::default()
    };
    let out = run_arm(arm, &problem, settings, model.as_ref(), fine, a.seed)?;
    if let Some(path) = &a.log {
        let mut f = std::io::BufWriter::new(fs::File::create(path)?);
        for line in &out.log {
            serde_json::to_writer(&mut f, line).map_err(Error::from)?;
            f.write_all(b"\n")?;
        }
        f.flush()?;
    }
    let objectives = out.population.feasible_objectives();
    if let Some(path) = &a.out {
        fs::write(path, format_points(&objectives))?;
    }
    println!(
        "arm {arm} on {} d={} m={}: {} evaluations, {} generations",
        a.problem,
        a.d,
        a.m,
        out.evaluations,
        out.log.len() - 1
    );
    match (&front, objectives.is_empty()) {
        (Some(f), false) => println!("igd {:.6e}", igd_points(f.points(), &objectives)?.value),
        (_, true) => println!("igd NaN (no feasible solutions)"),
        (None, false) => {}
    }
    Ok(())
}

fn benchmark(a: BenchmarkArgs) -> Outcome {
    let mut cfg = ExperimentConfig::load(&a.config).map_err(|e| match e {
        Error::Io(e) => Failure::Runtime(Error::Io(e)),
        other => Failure::Usage(other.to_string()),
    })?;
    if a.model.is_some() {
        cfg.model = a.model;
    }
    let out_dir = a
        .out
        .or_else(|| cfg.output.clone())
        .ok_or_else(|| Failure::Usage("no output directory: pass --out or set `output` in the config".into()))?;
    let model = match (&cfg.model, cfg.needs_model()) {
        (Some(p), true) => Some(load_checkpoint(p)?),
        (None, true) => return Err(Failure::Usage("a PET arm is listed but no model is configured".into())),
        _ => None,
    };
    let report = run_benchmark(&cfg, model.as_ref())?;
    let files = emit_report(&report, &out_dir)?;
    print!("{}", fs::read_to_string(&files.table)?);
    let failed = report.records.iter().filter(|r| !r.succeeded()).count();
    if failed > 0 {
        eprintln!(
            "{failed} of {} runs failed; see {}",
            report.records.len(),
            files.records.display()
        );
    }
    println!("reports written to {}", out_dir.display());
    Ok(())
}

fn igd_cmd(a: IgdArgs) -> Outcome {
    let front = read_points(&a.front).map_err(|e| Failure::Runtime(Error::Data(e)))?;
    let solutions = read_points(&a.solutions).map_err(|e| Failure::Runtime(Error::Data(e)))?;
    let r = igd_points(&front, &solutions)?;
    println!("{:.17e}", r.value);
    Ok(())
}

fn selftest(a: SelftestArgs) -> Outcome {
    let mut failed = 0;
    for s in run_selftest(a.seed) {
        let status = if s.passed { "PASS" } else { "FAIL" };
        println!("{status} {:<22} {} checks {}", s.name, s.checked, s.detail);
        failed += usize::from(!s.passed);
    }
    if failed > 0 {
        return Err(Failure::Runtime(Error::Contract(format!(
            "{failed} self-test suites failed"
        ))));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn problem_entries() {
        assert_eq!(parse_problem("zdt1:30").ok().map(|p| (p.d, p.m)), Some((30, 2)));
        assert_eq!(parse_problem("lsmop1:100:3").ok().map(|p| (p.d, p.m)), Some((100, 3)));
        for bad in ["zdt1", ":30", "zdt1:x", "zdt1:30:2:1"] {
            assert!(matches!(parse_problem(bad), Err(Failure::Usage(_))), "{bad}");
        }
    }
}
