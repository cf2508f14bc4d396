//! Oracle suites runnable outside the test harness (`pet selftest`).

use rand::Rng;

use crate::error::Result;
use crate::metrics::{exact_p_value, igd_points, normal_p_value, wilcoxon_rank_sum, ALPHA};
use crate::moea::fast_nondominated_sort;
use crate::mop::{Population, Solution};
use crate::nn::{gradient_check, gradient_check_params, AttnShape, GradCheckReport, Tape, Tensor, Var};
use crate::pet::{Example, OutputHead, PetConfig, PetModel};
use crate::rng::{rng_from_seed, RunRng};

/// Tolerance of the finite-difference gradient checks.
pub const GRAD_TOLERANCE: f64 = 1e-4;
/// Largest exact-vs-normal p-value gap allowed at the 12/13 boundary.
pub const P_AGREEMENT: f64 = 0.02;

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub checked: usize,
    pub detail: String,
}

impl SuiteOutcome {
    fn new(name: &'static str, checked: usize, failures: Vec<String>) -> Self {
        Self {
            name,
            passed: failures.is_empty(),
            checked,
            detail: failures.join("; "),
        }
    }
}

/// Fronts by repeated peeling: every pass collects the members no other
/// remaining member beats under feasibility-first dominance.
pub fn brute_force_fronts(fs: &[Vec<f64>], cvs: &[f64]) -> Vec<Vec<usize>> {
    let beats = |a: usize, b: usize| match (cvs[a] <= 0.0, cvs[b] <= 0.0) {
        (true, false) => true,
        (false, true) => false,
        (false, false) => cvs[a] < cvs[b],
        (true, true) => fs[a].iter().zip(&fs[b]).all(|(x, y)| x <= y) && fs[a].iter().zip(&fs[b]).any(|(x, y)| x < y),
    };
    let mut left: Vec<usize> = (0..fs.len()).collect();
    let mut fronts = Vec::new();
    while !left.is_empty() {
        let front: Vec<usize> = left
            .iter()
            .copied()
            .filter(|&i| !left.iter().any(|&j| beats(j, i)))
            .collect();
        left.retain(|i| !front.contains(i));
        fronts.push(front);
    }
    fronts
}

/// A random population with N ≤ 50 and m ≤ 5 on a coarse grid so ties and
/// duplicates occur; half the draws carry constraint violations.
pub fn random_sort_instance(rng: &mut RunRng, constrained: bool) -> (Vec<Vec<f64>>, Vec<f64>) {
    let n = rng.gen_range(1..=50);
    let m = rng.gen_range(2..=5);
    let fs = (0..n)
        .map(|_| (0..m).map(|_| f64::from(rng.gen_range(0u8..6))).collect())
        .collect();
    let cvs = (0..n)
        .map(|_| {
            if constrained && rng.gen_bool(0.4) {
                f64::from(rng.gen_range(1u8..4)) * 0.5
            } else {
                0.0
            }
        })
        .collect();
    (fs, cvs)
}

pub fn sort_suite(seed: u64, cases: usize) -> SuiteOutcome {
    let mut rng = rng_from_seed(seed);
    let mut failures = Vec::new();
    for case in 0..cases {
        let (fs, cvs) = random_sort_instance(&mut rng, case % 2 == 1);
        let pop: Population = fs
            .iter()
            .zip(&cvs)
            .map(|(f, &cv)| Solution::evaluated(Vec::new(), f.clone(), cv).expect("finite"))
            .collect();
        match fast_nondominated_sort(&pop) {
            Ok(p) if p.fronts == brute_force_fronts(&fs, &cvs) => {}
            Ok(_) => failures.push(format!("case {case}: fronts differ")),
            Err(e) => failures.push(format!("case {case}: {e}")),
        }
    }
    SuiteOutcome::new("sort-vs-brute-force", cases, failures)
}

fn random_points(rng: &mut RunRng, n: usize, m: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..m).map(|_| rng.gen_range(-2.0..2.0)).collect())
        .collect()
}

pub fn igd_suite(seed: u64, cases: usize) -> SuiteOutcome {
    let mut failures = Vec::new();
    let fixture = |r: &[Vec<f64>], s: &[Vec<f64>], want: f64| -> Option<String> {
        match igd_points(r, s) {
            Ok(v) if (v.value - want).abs() <= 1e-12 => None,
            Ok(v) => Some(format!("fixture expected {want}, got {}", v.value)),
            Err(e) => Some(e.to_string()),
        }
    };
    let two = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
    failures.extend(fixture(&two, &two, 0.0));
    failures.extend(fixture(&two, &[vec![1.0, 1.0]], 1.0));
    failures.extend(fixture(&[vec![0.0, 0.0]], &[vec![3.0, 4.0]], 5.0));

    let mut rng = rng_from_seed(seed);
    for case in 0..cases {
        let m = rng.gen_range(2..=4);
        let (nr, ns) = (rng.gen_range(1..30), rng.gen_range(1..30));
        let r = random_points(&mut rng, nr, m);
        let s = random_points(&mut rng, ns, m);
        let base = igd_points(&r, &s).map(|v| v.value);
        let Ok(base) = base else {
            failures.push(format!("case {case}: igd failed"));
            continue;
        };
        let c: Vec<f64> = (0..m).map(|_| rng.gen_range(-100.0..100.0)).collect();
        let shift = |ps: &[Vec<f64>]| -> Vec<Vec<f64>> {
            ps.iter()
                .map(|p| p.iter().zip(&c).map(|(a, b)| a + b).collect())
                .collect()
        };
        let shifted = igd_points(&shift(&r), &shift(&s)).map(|v| v.value).unwrap_or(f64::NAN);
        if !((shifted - base).abs() <= 1e-12) {
            failures.push(format!("case {case}: shift changed {base} to {shifted}"));
        }
        let mut grown = s.clone();
        let extra = rng.gen_range(1..10);
        grown.extend(random_points(&mut rng, extra, m));
        let bigger = igd_points(&r, &grown).map(|v| v.value).unwrap_or(f64::NAN);
        if !(bigger <= base) {
            failures.push(format!("case {case}: growth raised {base} to {bigger}"));
        }
    }
    SuiteOutcome::new("igd-fixtures", 3 + cases, failures)
}

/// Largest exact-vs-normal gap over every arrangement of distinct ranks
/// for samples of sizes `n1` and `n2`.
pub fn max_p_gap(n1: usize, n2: usize) -> f64 {
    let n = n1 + n2;
    let mut worst: f64 = 0.0;
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != n1 {
            continue;
        }
        let (a, b): (Vec<usize>, Vec<usize>) = (0..n).partition(|i| mask >> i & 1 == 1);
        let a: Vec<f64> = a.into_iter().map(|i| i as f64).collect();
        let b: Vec<f64> = b.into_iter().map(|i| i as f64).collect();
        worst = worst.max((exact_p_value(&a, &b) - normal_p_value(&a, &b)).abs());
    }
    worst
}

/// Splits at the exact/approximate boundary with at least four values on
/// each side.
pub fn boundary_splits() -> Vec<(usize, usize)> {
    [12, 13]
        .iter()
        .flat_map(|&n| (4..=n - 4).map(move |n1| (n1, n - n1)))
        .collect()
}

pub fn rank_sum_suite() -> SuiteOutcome {
    let mut failures = Vec::new();
    match wilcoxon_rank_sum(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0], ALPHA) {
        Ok(r) if r.statistic == 6.0 && (r.p_value - 0.1).abs() <= 1e-12 => {}
        Ok(r) => failures.push(format!("fixture gave W={} p={}", r.statistic, r.p_value)),
        Err(e) => failures.push(e.to_string()),
    }
    let splits = boundary_splits();
    for &(n1, n2) in &splits {
        let gap = max_p_gap(n1, n2);
        if gap > P_AGREEMENT {
            failures.push(format!("{n1}+{n2}: gap {gap:.4}"));
        }
    }
    SuiteOutcome::new("rank-sum", 1 + splits.len(), failures)
}

fn random_tensor(rng: &mut RunRng, shape: Vec<usize>) -> Tensor {
    let n = shape.iter().product();
    Tensor::new(shape, (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).expect("positive extents")
}

/// Squared distance to a fixed random target so every output entry gets a
/// distinct upstream gradient.
fn probe(tape: &mut Tape, y: Var) -> Result<Var> {
    let shape = tape.value(y).shape().to_vec();
    let target = random_tensor(&mut rng_from_seed(999), shape);
    let mask = vec![true; target.len()];
    tape.masked_mse(y, &target, &mask)
}

type Build = Box<dyn Fn(&mut Tape, &[Var]) -> Result<Var>>;

/// Finite-difference checks of every tape primitive.
pub fn primitive_gradient_checks(seed: u64) -> Result<Vec<(String, GradCheckReport)>> {
    let mut rng = rng_from_seed(seed);
    let attn = |batch, q_len, kv_len, causal| AttnShape {
        batch,
        q_len,
        kv_len,
        width: 8,
        heads: 2,
        causal,
    };
    let mask = [true, false, true, true];
    let mse_mask = [
        true, true, false, true, false, true, true, true, true, false, true, true,
    ];
    let mse_target = random_tensor(&mut rng, vec![3, 4]);
    let cases: Vec<(&str, Vec<Vec<usize>>, Build)> = vec![
        (
            "matmul-shared",
            vec![vec![2, 3, 4], vec![4, 5]],
            Box::new(|t, v| {
                let y = t.matmul(v[0], v[1])?;
                probe(t, y)
            }),
        ),
        (
            "matmul-batched",
            vec![vec![2, 3, 4], vec![2, 4, 2]],
            Box::new(|t, v| {
                let y = t.matmul(v[0], v[1])?;
                probe(t, y)
            }),
        ),
        (
            "add-bias",
            vec![vec![3, 5], vec![5]],
            Box::new(|t, v| {
                let y = t.add_bias(v[0], v[1])?;
                probe(t, y)
            }),
        ),
        (
            "add",
            vec![vec![3, 4], vec![3, 4]],
            Box::new(|t, v| {
                let y = t.add(v[0], v[1])?;
                probe(t, y)
            }),
        ),
        (
            "scale",
            vec![vec![3, 4]],
            Box::new(|t, v| {
                let y = t.scale(v[0], -1.7);
                probe(t, y)
            }),
        ),
        (
            "relu",
            vec![vec![3, 4]],
            Box::new(|t, v| {
                let y = t.relu(v[0]);
                probe(t, y)
            }),
        ),
        (
            "sigmoid",
            vec![vec![3, 4]],
            Box::new(|t, v| {
                let y = t.sigmoid(v[0]);
                probe(t, y)
            }),
        ),
        (
            "layer-norm",
            vec![vec![3, 6], vec![6], vec![6]],
            Box::new(|t, v| {
                let y = t.layer_norm(v[0], v[1], v[2])?;
                probe(t, y)
            }),
        ),
        (
            "softmax",
            vec![vec![2, 5]],
            Box::new(|t, v| {
                let y = t.softmax(v[0], None)?;
                probe(t, y)
            }),
        ),
        (
            "softmax-masked",
            vec![vec![3, 4]],
            Box::new(move |t, v| {
                let y = t.softmax(v[0], Some(&mask))?;
                probe(t, y)
            }),
        ),
        (
            "attention",
            vec![vec![6, 8], vec![6, 8], vec![6, 8]],
            Box::new(move |t, v| {
                let y = t.attention(v[0], v[1], v[2], attn(2, 3, 3, false))?;
                probe(t, y)
            }),
        ),
        (
            "attention-causal",
            vec![vec![6, 8], vec![6, 8], vec![6, 8]],
            Box::new(move |t, v| {
                let y = t.attention(v[0], v[1], v[2], attn(2, 3, 3, true))?;
                probe(t, y)
            }),
        ),
        (
            "attention-causal-offset",
            vec![vec![2, 8], vec![5, 8], vec![5, 8]],
            Box::new(move |t, v| {
                let y = t.attention(v[0], v[1], v[2], attn(1, 2, 5, true))?;
                probe(t, y)
            }),
        ),
        (
            "masked-mse",
            vec![vec![3, 4]],
            Box::new(move |t, v| t.masked_mse(v[0], &mse_target, &mse_mask)),
        ),
        ("sum", vec![vec![3, 4]], Box::new(|t, v| Ok(t.sum(v[0])))),
        ("mean", vec![vec![3, 4]], Box::new(|t, v| Ok(t.mean(v[0])))),
    ];
    let mut out = Vec::new();
    for (name, shapes, build) in cases {
        let inputs: Vec<Tensor> = shapes.into_iter().map(|s| random_tensor(&mut rng, s)).collect();
        out.push((name.to_string(), gradient_check(build, &inputs)?));
    }
    Ok(out)
}

fn random_example(rng: &mut RunRng, d: usize, m: usize, n: usize) -> Example {
    let mut rows = |w: usize| -> Vec<Vec<f64>> { (0..n).map(|_| (0..w).map(|_| rng.gen::<f64>()).collect()).collect() };
    Example {
        d,
        m,
        parents_x: rows(d),
        parents_f: rows(m),
        target_x: rows(d),
        target_f: rows(m),
    }
}

/// Checks the teacher-forced loss of a toy-configuration model with respect
/// to every parameter, for both output heads.
pub fn model_gradient_checks(seed: u64) -> Result<Vec<(String, GradCheckReport)>> {
    let mut out = Vec::new();
    for head in [OutputHead::Logistic, OutputHead::Softmax] {
        let mut rng = rng_from_seed(seed);
        let model = PetModel::new(
            PetConfig {
                head,
                ..PetConfig::toy()
            },
            &mut rng,
        )?;
        let ex = random_example(&mut rng, 5, 3, 4);
        let report = gradient_check_params(model.params(), |t| model.teacher_forced_loss(t, &[&ex]), 1)?;
        out.push((format!("pet-{head:?}").to_lowercase(), report));
    }
    Ok(out)
}

pub fn gradient_suite(seed: u64) -> SuiteOutcome {
    let mut failures = Vec::new();
    let mut checked = 0;
    for result in [primitive_gradient_checks(seed), model_gradient_checks(seed)] {
        match result {
            Ok(reports) => {
                checked += reports.len();
                for (name, r) in reports {
                    if !r.passes(GRAD_TOLERANCE) {
                        failures.push(format!("{name}: max rel err {:.3e}", r.max_rel_error));
                    }
                }
            }
            Err(e) => failures.push(e.to_string()),
        }
    }
    SuiteOutcome::new("gradient-checks", checked, failures)
}

/// Every suite with its default size.
pub fn run_selftest(seed: u64) -> Vec<SuiteOutcome> {
    vec![
        sort_suite(seed, 200),
        igd_suite(seed, 100),
        rank_sum_suite(),
        gradient_suite(seed),
    ]
}
