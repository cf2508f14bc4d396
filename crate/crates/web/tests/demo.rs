use pet_web::demo::{
    bi_objective_problems, compare_arms, nondominated_ranks, run_optimizer, CompareRequest, RunRequest,
};

fn run(arm: &str, seed: u64) -> RunRequest {
    RunRequest {
        problem: "zdt1".into(),
        d: 10,
        arm: arm.into(),
        population_size: 20,
        max_evaluations: 1000,
        seed,
    }
}

#[test]
fn optimizer_run_is_reproducible_and_plottable() {
    let a = run_optimizer(&run("nsga2", 4)).unwrap();
    let b = run_optimizer(&run("nsga2", 4)).unwrap();
    assert_eq!(a.points, b.points);
    assert_eq!(a.evaluations, 1000);
    assert_eq!(a.points.len(), 20);
    assert_eq!(a.ranks.len(), a.points.len());
    assert!(a.reference.iter().all(|p| p.len() == 2));
    let igd = a.igd.unwrap();
    assert_eq!(a.trace.last().copied().flatten(), Some(igd));
    assert!(a.trace.first().copied().flatten().unwrap() > igd);
}

#[test]
fn requests_the_page_cannot_serve() {
    assert!(run_optimizer(&run("pet", 0)).is_err());
    assert!(run_optimizer(&RunRequest {
        problem: "dtlz2".into(),
        ..run("nsga2", 0)
    })
    .is_err());
    assert!(run_optimizer(&RunRequest {
        max_evaluations: 1_000_000,
        ..run("nsga2", 0)
    })
    .is_err());
    assert!(run_optimizer(&RunRequest {
        population_size: 1,
        ..run("nsga2", 0)
    })
    .is_err());
    let names = bi_objective_problems();
    assert!(names.iter().any(|n| n == "zdt1") && names.iter().any(|n| n == "lsmop1"));
}

#[test]
fn clicked_points_are_ranked() {
    let pts = vec![
        vec![0.0, 1.0],
        vec![1.0, 0.0],
        vec![1.0, 1.0],
        vec![2.0, 2.0],
        vec![0.5, 0.5],
    ];
    assert_eq!(nondominated_ranks(&pts).unwrap(), [0, 0, 1, 2, 0]);
    assert!(nondominated_ranks(&[vec![0.0, 1.0], vec![f64::NAN, 0.0]]).is_err());
}

#[test]
fn nsga2_beats_random_search() {
    let req = CompareRequest {
        problem: "zdt1".into(),
        d: 10,
        arms: ["nsga2".into(), "random".into()],
        population_size: 20,
        max_evaluations: 2000,
        runs: 5,
        master_seed: 9,
    };
    let r = compare_arms(&req).unwrap();
    assert_eq!(r.igd[0].len(), 5);
    assert!(r.medians[0].unwrap() < r.medians[1].unwrap());
    assert_eq!(r.mark, '+');
    // Five against five fully separated samples: exact two-sided p = 2/252.
    assert!((r.p_value - 2.0 / 252.0).abs() < 1e-12);
}
