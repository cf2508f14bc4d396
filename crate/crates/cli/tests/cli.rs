use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn pet(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pet"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(pet(dir.path(), &["--help"]).status.code(), Some(0));
    assert_eq!(pet(dir.path(), &["--version"]).status.code(), Some(0));
    assert_eq!(pet(dir.path(), &["frobnicate"]).status.code(), Some(1));
    assert_eq!(
        pet(dir.path(), &["optimize", "--problem", "zdt1"]).status.code(),
        Some(1)
    );
    assert_eq!(
        pet(
            dir.path(),
            &["optimize", "--problem", "nope", "--d", "5", "--arm", "nsga2"]
        )
        .status
        .code(),
        Some(1)
    );
    assert_eq!(
        pet(dir.path(), &["optimize", "--problem", "zdt1", "--d", "5"])
            .status
            .code(),
        Some(1),
        "pet arm without a model"
    );

    let o = pet(
        dir.path(),
        &["igd", "--front", "absent.txt", "--solutions", "absent.txt"],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("absent.txt"));
}

#[test]
fn igd_of_a_fixture() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("front.txt"), "# reference\n0 1\n0.5 0.5\n1 0\n").unwrap();
    fs::write(dir.path().join("sol.json"), "[[0, 1], [1, 0]]").unwrap();
    let o = pet(dir.path(), &["igd", "--front", "front.txt", "--solutions", "sol.json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: f64 = stdout(&o).trim().parse().unwrap();
    let expected = 0.5f64.sqrt() / 3.0;
    assert!((v - expected).abs() < 1e-15, "{v} vs {expected}");

    fs::write(dir.path().join("empty.txt"), "# nothing\n").unwrap();
    let o = pet(dir.path(), &["igd", "--front", "front.txt", "--solutions", "empty.txt"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn collect_pretrain_optimize() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = pet(
        d,
        &[
            "collect",
            "--problems",
            "zdt1:8,zdt2:8",
            "--seeds",
            "1",
            "--pop",
            "10",
            "--evals",
            "60",
            "--out",
            "data.jsonl",
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    // NSGA-II makes 6 generations (4 pairs), CSO halves the offspring count (11 generations, 9 pairs).
    assert!(stdout(&o).starts_with("26 pairs"), "{}", stdout(&o));

    fs::write(
        d.join("model.json"),
        r#"{"d_hat":8,"m_hat":2,"width":16,"layers":1,"heads":2,"max_seq":12}"#,
    )
    .unwrap();
    let o = pet(
        d,
        &[
            "pretrain",
            "--data",
            "data.jsonl",
            "--config",
            "model.json",
            "--steps",
            "5",
            "--batch-size",
            "4",
            "--eval-every",
            "2",
            "--curve",
            "curve.jsonl",
            "--out",
            "model.petm",
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let curve = fs::read_to_string(d.join("curve.jsonl")).unwrap();
    let steps: Vec<u64> = curve
        .lines()
        .map(|l| {
            serde_json::from_str::<serde_json::Value>(l).unwrap()["step"]
                .as_u64()
                .unwrap()
        })
        .collect();
    assert_eq!(steps, [1, 2, 4, 5]);

    let o = pet(
        d,
        &[
            "optimize",
            "--problem",
            "zdt1",
            "--d",
            "8",
            "--model",
            "model.petm",
            "--pop",
            "10",
            "--evals",
            "55",
            "--log",
            "log.jsonl",
            "--out",
            "final.txt",
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("55 evaluations"), "{}", stdout(&o));
    assert!(stdout(&o).contains("igd "));
    assert_eq!(fs::read_to_string(d.join("log.jsonl")).unwrap().lines().count(), 6);
    assert_eq!(
        fs::read_to_string(d.join("final.txt"))
            .unwrap()
            .lines()
            .filter(|l| !l.is_empty())
            .count(),
        10
    );

    // A model too narrow for the problem is a runtime failure.
    let o = pet(
        d,
        &[
            "optimize",
            "--problem",
            "zdt1",
            "--d",
            "30",
            "--model",
            "model.petm",
            "--pop",
            "10",
            "--evals",
            "50",
        ],
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn benchmark_reports() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(
        d.join("exp.json"),
        r#"{"problems":[{"name":"zdt1","d":6,"m":2}],"arms":["nsga2","random"],"reference_arm":"nsga2",
            "population_size":10,"max_evaluations":100,"n_seeds":4,"master_seed":3}"#,
    )
    .unwrap();
    let o = pet(d, &["benchmark", "--config", "exp.json"]);
    assert_eq!(o.status.code(), Some(1), "no output directory anywhere");

    let o = pet(d, &["benchmark", "--config", "exp.json", "--out", "rep"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("ZDT1"));
    for f in ["records.csv", "summary.json", "table.txt", "logs.jsonl"] {
        assert!(d.join("rep").join(f).is_file(), "{f}");
    }
    assert_eq!(
        fs::read_to_string(d.join("rep/records.csv")).unwrap().lines().count(),
        9
    );

    fs::write(d.join("bad.json"), r#"{"problems":[],"arms":["nsga2"]}"#).unwrap();
    assert_eq!(
        pet(d, &["benchmark", "--config", "bad.json", "--out", "x"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn selftest_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = pet(dir.path(), &["selftest", "--seed", "5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).lines().all(|l| l.starts_with("PASS")));
}
