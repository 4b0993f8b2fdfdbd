//! `drsub verify`: invariant checks on generated instances and random LPs.

use drsub_core::envelopes::{envelope_cut, overestimator_value};
use drsub_core::instance::Instance;
use drsub_core::lp::{LpModel, LpStatus, Sense};
use drsub_core::model::check_submodular_sample;
use drsub_core::problems::{gen_covering, gen_influence, gen_quadratic, GKind, QuadraticInstance};
use drsub_core::sbb::{solve, SbbOptions};
use drsub_core::verify::{fd_gradient_check, grid_maximize, vertex_enumerate_lp};
use drsub_core::{LinearConstraints, OracleProblem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::args::VerifyArgs;
use crate::CliError;

struct Report {
    failures: usize,
}

impl Report {
    fn check(&mut self, name: &str, ok: bool, detail: String) {
        if !ok {
            self.failures += 1;
        }
        println!("{} {name:<44} {detail}", if ok { "PASS" } else { "FAIL" });
    }
}

fn families(seed: u64) -> Result<Vec<(&'static str, Instance)>, CliError> {
    Ok(vec![
        ("quadratic n=5", Instance::quadratic(gen_quadratic(5, 5, seed)?, seed)),
        ("uncap_covering n=5", Instance::covering(gen_covering(5, 150, 2.0, false, seed)?, seed)),
        ("cap_covering n=5", Instance::covering(gen_covering(5, 150, 2.0, true, seed)?, seed)),
        ("influence identity n=6", Instance::influence(gen_influence(6, 2.0, GKind::Identity, seed)?, seed)),
        ("influence contest n=6", Instance::influence(gen_influence(6, 2.0, GKind::Contest, seed)?, seed)),
    ])
}

fn check_family(report: &mut Report, name: &str, inst: &Instance, args: &VerifyArgs) -> Result<(), CliError> {
    let text = inst.to_json()?;
    let round_trip = Instance::from_json(&text)?.to_json()? == text;
    report.check(&format!("{name}: json round trip"), round_trip, String::new());

    let p = inst.build_problem()?;
    let dr = check_submodular_sample(&p, args.trials, args.seed)?;
    report.check(
        &format!("{name}: DR-submodular sample"),
        dr.passed && dr.monotone,
        format!(
            "lattice {:.1e} concavity {:.1e} monotonicity {:.1e}",
            dr.lattice_violation, dr.concavity_violation, dr.monotonicity_violation
        ),
    );

    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let h = drsub_core::tol::FD_STEP;
    let limit = if matches!(inst.payload, drsub_core::instance::Payload::Quadratic(_)) { 1e-9 } else { 1e-5 };
    let mut worst: f64 = 0.0;
    for _ in 0..args.points {
        let x: Vec<f64> = (0..p.dim()).map(|_| rng.gen_range(2.0 * h..1.0 - 2.0 * h)).collect();
        worst = worst.max(fd_gradient_check(&p, &x, h)?);
    }
    report.check(&format!("{name}: gradient vs central differences"), worst <= limit, format!("max rel error {worst:.1e}"));

    let mut slack = f64::INFINITY;
    for _ in 0..args.trials {
        let x = p.bounds().sample(&mut rng);
        let s = p.bounds().sample(&mut rng);
        slack = slack.min(overestimator_value(&p, &x, &s)? - p.evaluate(&x)?);
    }
    report.check(&format!("{name}: overestimator validity"), slack >= -1e-9, format!("min slack {slack:.1e}"));

    let (lo, hi) = (p.bounds().lower().to_vec(), p.bounds().upper().to_vec());
    let at_lo = envelope_cut(&p, &lo, p.bounds())?.value(&lo) - p.evaluate(&lo)?;
    let at_hi = envelope_cut(&p, &hi, p.bounds())?.value(&hi) - p.evaluate(&hi)?;
    report.check(
        &format!("{name}: envelope tight at corners"),
        at_lo.abs() <= 1e-9 && at_hi.abs() <= 1e-9,
        format!("{at_lo:.1e} / {at_hi:.1e}"),
    );
    Ok(())
}

fn random_lp(rng: &mut ChaCha8Rng) -> LpModel {
    let n = rng.gen_range(2..=4);
    let m = rng.gen_range(1..=5);
    let objective = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let bounds = (0..n).map(|_| (0.0, rng.gen_range(0.5..2.0))).collect();
    let mut model = LpModel::with_bounds(objective, bounds).expect("finite bounds");
    for _ in 0..m {
        let coeffs = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let sense = if rng.gen_bool(0.2) { Sense::Ge } else { Sense::Le };
        model.add_row(coeffs, sense, rng.gen_range(-0.5..1.0)).expect("finite row");
    }
    model
}

fn check_lp(report: &mut Report, seed: u64) -> Result<(), CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut agree = 0;
    let total = 50;
    for _ in 0..total {
        let model = random_lp(&mut rng);
        let simplex = model.solve()?;
        let brute = vertex_enumerate_lp(&model)?;
        let same = simplex.status == brute.status
            && (simplex.status != LpStatus::Optimal
                || (simplex.objective_value - brute.objective_value).abs() <= 1e-7);
        agree += usize::from(same);
    }
    report.check("lp: simplex vs vertex enumeration", agree == total, format!("{agree}/{total} agree"));
    Ok(())
}

fn check_toy_sbb(report: &mut Report) -> Result<(), CliError> {
    let q = QuadraticInstance::from_hessian(vec![vec![0.0, -1.0], vec![-1.0, 0.0]])?;
    let base = q.to_problem()?;
    let p = OracleProblem::new(
        base.objective().clone(),
        base.bounds().clone(),
        LinearConstraints::new(vec![vec![1.0, 1.0]], vec![1.0])?,
    )?;
    let grid = grid_maximize(&p, 0.01)?;
    let r = solve(&p, &SbbOptions::default())?;
    let ok = r.best_ub >= grid.best_value - 1e-6 && r.best_lb >= 0.95 * grid.best_value && r.rel_gap() <= 0.05;
    report.check(
        "sbb: x1 + x2 - x1 x2 under x1 + x2 <= 1",
        ok,
        format!("lb {:.6} ub {:.6} grid {:.6}", r.best_lb, r.best_ub, grid.best_value),
    );
    Ok(())
}

/// Returns whether every check passed.
pub fn run(args: &VerifyArgs) -> Result<bool, CliError> {
    if args.trials == 0 || args.points == 0 {
        return Err(CliError::Usage("--trials and --points must be positive".into()));
    }
    let mut report = Report { failures: 0 };
    for (name, inst) in families(args.seed)? {
        check_family(&mut report, name, &inst, args)?;
    }
    check_lp(&mut report, args.seed)?;
    check_toy_sbb(&mut report)?;
    println!("{} failure(s)", report.failures);
    Ok(report.failures == 0)
}
