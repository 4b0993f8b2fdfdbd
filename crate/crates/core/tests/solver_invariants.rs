use drsub_core::cutplane::{approximate_cutting_plane, ApproxOptions};
use drsub_core::problems::{gen_covering, gen_influence, gen_quadratic, GKind};
use drsub_core::sbb::{solve, solve_with_progress, SbbOptions, SbbTermination};
use drsub_core::verify::grid_maximize;
use drsub_core::OracleProblem;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn quadratic(n: usize, seed: u64) -> OracleProblem {
    gen_quadratic(n, n, seed).unwrap().to_problem().unwrap()
}

#[test]
fn bounds_sandwich_the_grid_optimum() {
    for seed in 0..4 {
        let p = quadratic(3, seed);
        let grid = grid_maximize(&p, 0.01).unwrap();
        let mut rows = Vec::new();
        let r = solve_with_progress(&p, &SbbOptions::default(), |row| rows.push(row.clone())).unwrap();
        assert_eq!(r.termination, SbbTermination::Gap);
        for row in &rows {
            assert!(row.best_ub >= grid.best_value - 1e-6, "seed {seed}");
            assert!(row.best_lb <= grid.best_value + grid.lipschitz_slack, "seed {seed}");
            assert!(row.node_ub <= row.parent_ub + 1e-7, "seed {seed} node {}", row.node_id);
        }
        assert!(p.is_feasible(&r.incumbent, 1e-9));
    }
}

#[test]
fn bounds_are_monotone_over_the_run() {
    let p = quadratic(3, 11);
    let mut rows = Vec::new();
    solve_with_progress(&p, &SbbOptions { rel_gap: 0.005, ..SbbOptions::default() }, |row| rows.push(row.clone())).unwrap();
    for pair in rows.windows(2) {
        assert!(pair[1].best_lb >= pair[0].best_lb);
        assert!(pair[1].best_ub <= pair[0].best_ub + 1e-12);
    }
}

#[test]
fn runs_are_reproducible() {
    let p = gen_influence(5, 2.0, GKind::Contest, 3).unwrap().to_problem().unwrap();
    let run = |workers| {
        let opts = SbbOptions { node_limit: Some(150), workers, ..SbbOptions::default() };
        let mut rows = Vec::new();
        let r = solve_with_progress(&p, &opts, |row| {
            let mut row = row.clone();
            row.elapsed_s = 0.0;
            rows.push(row)
        })
        .unwrap();
        (r.best_lb, r.best_ub, r.nodes_explored, r.incumbent, rows)
    };
    assert_eq!(run(1), run(1));
    assert_eq!(run(2), run(2));
}

#[test]
fn small_instances_reach_the_default_gap() {
    let problems = [
        quadratic(4, 1),
        gen_covering(4, 60, 2.0, false, 2).unwrap().to_problem().unwrap(),
        gen_covering(4, 30, 2.0, true, 3).unwrap().to_problem().unwrap(),
        gen_influence(4, 2.0, GKind::Identity, 4).unwrap().to_problem().unwrap(),
    ];
    for (k, p) in problems.iter().enumerate() {
        let r = solve(p, &SbbOptions { time_limit: None, ..SbbOptions::default() }).unwrap();
        assert_eq!(r.termination, SbbTermination::Gap, "problem {k}");
        assert!(r.rel_gap() <= 0.05);
    }
}

#[test]
fn cutting_plane_bound_is_valid_on_random_subboxes() {
    let p = gen_covering(3, 50, 1.5, false, 8).unwrap().to_problem().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let a = p.bounds().sample(&mut rng);
        let b = p.bounds().sample(&mut rng);
        let lo: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x.min(*y)).collect();
        let hi: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x.max(*y)).collect();
        let bx = drsub_core::BoxBounds::new(lo, hi).unwrap();
        let res = approximate_cutting_plane(&p, &bx, &[], &ApproxOptions::default()).unwrap();
        if res.is_infeasible() {
            continue;
        }
        for _ in 0..200 {
            let x = bx.sample(&mut rng);
            if p.is_feasible(&x, 0.0) {
                assert!(res.upper_bound >= p.evaluate(&x).unwrap() - 1e-7);
            }
        }
        assert!(res.lower_bound <= res.upper_bound + 1e-7);
    }
}
