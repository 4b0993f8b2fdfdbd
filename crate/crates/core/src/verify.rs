//! Brute-force oracles for desk-scale validation: lattice search for the
//! global maximum, vertex enumeration for LPs and finite-difference checks for
//! gradients. None of these share code paths with the solvers they check.

use itertools::Itertools;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lp::{LpModel, LpSolution, LpStatus, Sense};
use crate::model::OracleProblem;
use crate::tol;

const GRID_GUARD: f64 = 1e8;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridOracleResult {
    pub best_x: Vec<f64>,
    pub best_value: f64,
    pub grid_step: f64,
    pub points_evaluated: u64,
    /// `L · step · n / 2` with `L` the largest sampled gradient component;
    /// the true optimum is at most `best_value + lipschitz_slack`.
    pub lipschitz_slack: f64,
}

fn axis_points(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let count = ((hi - lo) / step + 1e-9).floor() as usize;
    let mut pts: Vec<f64> = (0..=count).map(|k| (lo + k as f64 * step).min(hi)).collect();
    if *pts.last().unwrap() < hi {
        pts.push(hi);
    }
    pts.dedup();
    pts
}

/// Exhaustive search over the lattice `lower + k · step` (upper corner always
/// included) intersected with `A x <= b`.
///
/// Ties keep the lattice point that comes last in lexicographic order.
pub fn grid_maximize(problem: &OracleProblem, step: f64) -> Result<GridOracleResult> {
    if !(step > 0.0) {
        return Err(Error::domain("grid step must be positive"));
    }
    let bounds = problem.bounds();
    let n = problem.dim();
    if n == 0 {
        return Err(Error::domain("grid search needs at least one dimension"));
    }
    let axes: Vec<Vec<f64>> = (0..n)
        .map(|i| axis_points(bounds.lower()[i], bounds.upper()[i], step))
        .collect();
    let total: f64 = axes.iter().map(|a| a.len() as f64).product();
    if total > GRID_GUARD {
        return Err(Error::Refused(format!(
            "grid has {total:e} points, guard is {GRID_GUARD:e}"
        )));
    }
    let inner: u64 = axes[1..].iter().map(|a| a.len() as u64).product();

    // (value, linear index) of the best point per leading coordinate
    let best = axes[0]
        .par_iter()
        .enumerate()
        .map(|(lead, &x0)| {
            let mut x = vec![0.0; n];
            x[0] = x0;
            let mut best: Option<(f64, u64)> = None;
            for idx in 0..inner {
                let mut rem = idx;
                for d in (1..n).rev() {
                    let len = axes[d].len() as u64;
                    x[d] = axes[d][(rem % len) as usize];
                    rem /= len;
                }
                if !problem.constraints().is_satisfied(&x, tol::LP_ROW) {
                    continue;
                }
                let v = problem.value_unchecked(&x);
                if best.is_none_or(|(bv, _)| v >= bv) {
                    best = Some((v, lead as u64 * inner + idx));
                }
            }
            best
        })
        .reduce(
            || None,
            |a, b| match (a, b) {
                (None, other) | (other, None) => other,
                (Some(a), Some(b)) => {
                    if b.0 > a.0 || (b.0 == a.0 && b.1 > a.1) {
                        Some(b)
                    } else {
                        Some(a)
                    }
                }
            },
        );

    let Some((best_value, linear)) = best else {
        return Err(Error::Infeasible("no lattice point satisfies A x <= b".into()));
    };
    let mut best_x = vec![0.0; n];
    let mut rem = linear % inner;
    best_x[0] = axes[0][(linear / inner) as usize];
    for d in (1..n).rev() {
        let len = axes[d].len() as u64;
        best_x[d] = axes[d][(rem % len) as usize];
        rem /= len;
    }

    let lipschitz = sampled_gradient_bound(problem, 1000, 0x5eed);
    Ok(GridOracleResult {
        best_x,
        best_value,
        grid_step: step,
        points_evaluated: total as u64,
        lipschitz_slack: lipschitz * step * n as f64 / 2.0,
    })
}

/// Largest finite gradient component over random interior points.
pub fn sampled_gradient_bound(problem: &OracleProblem, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let x = problem.bounds().sample(&mut rng);
        for g in problem.gradient_unchecked(&x) {
            if g.is_finite() {
                worst = worst.max(g.abs());
            }
        }
    }
    worst
}

/// Solves a tiny LP by enumerating every basic solution.
///
/// Candidate vertices are intersections of `n` hyperplanes drawn from the rows
/// (taken as equalities) and the finite variable bounds. Assumes the LP is
/// bounded when feasible.
pub fn vertex_enumerate_lp(model: &LpModel) -> Result<LpSolution> {
    let n = model.num_vars();
    if n > 8 || model.num_rows() > 12 {
        return Err(Error::Refused(format!(
            "vertex enumeration handles at most 8 variables and 12 rows, got {n} and {}",
            model.num_rows()
        )));
    }
    let mut planes: Vec<(Vec<f64>, f64)> = model
        .rows()
        .iter()
        .map(|r| (r.coeffs.clone(), r.rhs))
        .collect();
    for (j, &(lo, hi)) in model.bounds().iter().enumerate() {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        planes.push((e.clone(), lo));
        if hi.is_finite() {
            planes.push((e, hi));
        }
    }

    let mut best: Option<(f64, Vec<f64>)> = None;
    for combo in (0..planes.len()).combinations(n) {
        let mut mat: Vec<Vec<f64>> = combo.iter().map(|&p| planes[p].0.clone()).collect();
        let mut rhs: Vec<f64> = combo.iter().map(|&p| planes[p].1).collect();
        let Some(x) = gauss_solve(&mut mat, &mut rhs) else {
            continue;
        };
        if !vertex_feasible(model, &x) {
            continue;
        }
        let obj: f64 = model.objective().iter().zip(&x).map(|(c, v)| c * v).sum();
        if best.as_ref().is_none_or(|(b, _)| obj > *b) {
            best = Some((obj, x));
        }
    }
    Ok(match best {
        Some((objective_value, x)) => LpSolution {
            status: LpStatus::Optimal,
            x,
            objective_value,
        },
        None => LpSolution {
            status: LpStatus::Infeasible,
            x: vec![f64::NAN; n],
            objective_value: f64::NEG_INFINITY,
        },
    })
}

fn vertex_feasible(model: &LpModel, x: &[f64]) -> bool {
    let rows_ok = model.rows().iter().all(|r| {
        let act: f64 = r.coeffs.iter().zip(x).map(|(a, v)| a * v).sum();
        match r.sense {
            Sense::Le => act <= r.rhs + tol::LP_ROW,
            Sense::Ge => act >= r.rhs - tol::LP_ROW,
            Sense::Eq => (act - r.rhs).abs() <= tol::LP_ROW,
        }
    });
    rows_ok
        && x.iter()
            .zip(model.bounds())
            .all(|(v, (lo, hi))| *v >= lo - tol::FEASIBILITY && *v <= hi + tol::FEASIBILITY)
}

/// Gaussian elimination with partial pivoting; `None` when singular.
fn gauss_solve(mat: &mut [Vec<f64>], rhs: &mut [f64]) -> Option<Vec<f64>> {
    let n = rhs.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&a, &b| mat[a][col].abs().total_cmp(&mat[b][col].abs()))?;
        if mat[piv][col].abs() < 1e-12 {
            return None;
        }
        mat.swap(col, piv);
        rhs.swap(col, piv);
        for r in col + 1..n {
            let f = mat[r][col] / mat[col][col];
            if f == 0.0 {
                continue;
            }
            for c in col..n {
                mat[r][c] -= f * mat[col][c];
            }
            rhs[r] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| mat[r][c] * x[c]).sum();
        x[r] = (rhs[r] - s) / mat[r][r];
    }
    Some(x)
}

/// Largest componentwise error between the oracle gradient and central
/// differences with step `h`, each scaled by `max(|∂F/∂x_i|, 1)`.
pub fn fd_gradient_check(problem: &OracleProblem, x: &[f64], h: f64) -> Result<f64> {
    let bounds = problem.bounds();
    problem.check_in_box(x)?;
    for i in 0..problem.dim() {
        if x[i] - h < bounds.lower()[i] || x[i] + h > bounds.upper()[i] {
            return Err(Error::domain(format!(
                "coordinate {i} is closer than {h} to the box boundary"
            )));
        }
    }
    let grad = problem.gradient_unchecked(x);
    let mut probe = x.to_vec();
    let mut worst: f64 = 0.0;
    for i in 0..problem.dim() {
        probe[i] = x[i] + h;
        let up = problem.value_unchecked(&probe);
        probe[i] = x[i] - h;
        let down = problem.value_unchecked(&probe);
        probe[i] = x[i];
        let fd = (up - down) / (2.0 * h);
        worst = worst.max((fd - grad[i]).abs() / grad[i].abs().max(1.0));
    }
    Ok(worst)
}
