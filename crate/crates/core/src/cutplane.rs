//! Hypograph cutting-plane algorithms.
//!
//! [`approximate_cutting_plane`] maximizes `η` over the LP formed by envelope
//! cuts `η <= F(s) + (∇F(s) ⊙ (u - s)/(u - l))ᵀ(x - l)`, adding one cut per
//! iteration at the LP optimum. It is the node bounder of spatial
//! branch-and-bound.
//!
//! [`exact_cutting_plane`] uses the non-concave ReLU overestimators directly,
//! modelling each `[x_i - s_i]⁺` with the tightened big-M graph formulation.
//! The main problem is a MILP solved by an internal depth-first
//! branch-and-bound; it is only meant for tiny instances.

use serde::Serialize;

use crate::envelopes::{envelope_from_oracle, relu_cut, Cut};
use crate::error::{Error, Result};
use crate::lp::{LpModel, LpStatus, Sense};
use crate::model::{BoxBounds, OracleProblem};
use crate::tol;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CutTermination {
    /// The LP returned a support already used on this box.
    DuplicateCut,
    /// The upper bound did not improve for `stall_iters` iterations.
    Stall,
    /// `(UB - LB) / LB` reached the requested relative gap.
    RelGap,
    /// `UB - LB` reached the requested absolute gap (exact method).
    AbsGap,
    IterLimit,
    /// The box does not intersect `A x <= b`.
    Infeasible,
}

impl CutTermination {
    pub fn as_str(&self) -> &'static str {
        match self {
            CutTermination::DuplicateCut => "duplicate_cut",
            CutTermination::Stall => "stall",
            CutTermination::RelGap => "rel_gap",
            CutTermination::AbsGap => "abs_gap",
            CutTermination::IterLimit => "iter_limit",
            CutTermination::Infeasible => "infeasible",
        }
    }
}

/// One line of the optional iteration trace.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceRow {
    pub iter: usize,
    pub lb: f64,
    pub ub: f64,
    pub support: Vec<f64>,
}

impl TraceRow {
    pub fn csv_header(dim: usize) -> String {
        let mut h = String::from("iter,LB,UB");
        for i in 0..dim {
            h.push_str(&format!(",x{i}"));
        }
        h
    }

    pub fn to_csv(&self) -> String {
        let mut line = format!("{},{},{}", self.iter, self.lb, self.ub);
        for v in &self.support {
            line.push_str(&format!(",{v}"));
        }
        line
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CutPlaneResult {
    /// Best `F` value over the feasible supports visited.
    pub lower_bound: f64,
    /// Last main-problem optimum, a valid bound on `max F` over the box.
    pub upper_bound: f64,
    /// Feasible point attaining `lower_bound`; empty when infeasible.
    pub incumbent: Vec<f64>,
    /// Cuts generated by this run (inherited cuts are not repeated).
    pub cuts: Vec<Cut>,
    pub iterations: usize,
    pub termination: CutTermination,
    pub trace: Vec<TraceRow>,
}

impl CutPlaneResult {
    fn infeasible(iterations: usize, cuts: Vec<Cut>, trace: Vec<TraceRow>) -> Self {
        CutPlaneResult {
            lower_bound: f64::NEG_INFINITY,
            upper_bound: f64::NEG_INFINITY,
            incumbent: Vec::new(),
            cuts,
            iterations,
            termination: CutTermination::Infeasible,
            trace,
        }
    }

    pub fn is_infeasible(&self) -> bool {
        self.termination == CutTermination::Infeasible
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ApproxOptions {
    pub stall_iters: usize,
    pub subproblem_gap: f64,
    pub max_iters: usize,
}

impl Default for ApproxOptions {
    fn default() -> Self {
        ApproxOptions {
            stall_iters: 5,
            subproblem_gap: 0.001,
            max_iters: 500,
        }
    }
}

fn rel_gap(lb: f64, ub: f64) -> f64 {
    (ub - lb) / lb.max(1e-12)
}

/// Oracle output at a support, nudged inward when a gradient component is
/// unbounded so that cut coefficients stay finite.
fn stable_oracle(
    problem: &OracleProblem,
    support: &[f64],
    bounds: &BoxBounds,
) -> (Vec<f64>, f64, Vec<f64>) {
    let mut s = support.to_vec();
    let mut frac = 1e-6;
    for _ in 0..12 {
        let grad = problem.gradient_unchecked(&s);
        let wild: Vec<usize> = (0..s.len())
            .filter(|&i| {
                bounds.width(i) > 0.0 && !(grad[i].abs() <= tol::GRADIENT_CAP)
            })
            .collect();
        if wild.is_empty() {
            let f = problem.value_unchecked(&s);
            return (s, f, grad);
        }
        for i in wild {
            let mid = 0.5 * (bounds.lower()[i] + bounds.upper()[i]);
            let delta = frac * bounds.width(i);
            s[i] = if s[i] < mid {
                (s[i] + delta).min(mid)
            } else {
                (s[i] - delta).max(mid)
            };
        }
        frac *= 10.0;
    }
    let grad = problem.gradient_unchecked(&s);
    let f = problem.value_unchecked(&s);
    (s, f, grad)
}

fn check_box(problem: &OracleProblem, bounds: &BoxBounds) -> Result<()> {
    if bounds.dim() != problem.dim() {
        return Err(Error::domain(format!(
            "box has dimension {}, problem has dimension {}",
            bounds.dim(),
            problem.dim()
        )));
    }
    if !problem.bounds().contains_box(bounds, tol::BOX) {
        return Err(Error::domain("box is not contained in the problem box"));
    }
    Ok(())
}

/// Base LP over `(x, η)`: box bounds, `A x <= b`, `η >= 0`, maximize `η`.
fn base_model(problem: &OracleProblem, bounds: &BoxBounds, extra_vars: usize) -> Result<LpModel> {
    let n = problem.dim();
    let total = n + 1 + extra_vars;
    let mut objective = vec![0.0; total];
    objective[n] = 1.0;
    let mut model = LpModel::new(objective);
    for i in 0..n {
        model.set_bounds(i, bounds.lower()[i], bounds.upper()[i])?;
    }
    for (row, b) in problem.constraints().rows() {
        let mut coeffs = vec![0.0; total];
        coeffs[..n].copy_from_slice(row);
        model.add_row(coeffs, Sense::Le, b)?;
    }
    Ok(model)
}

fn add_envelope_row(model: &mut LpModel, cut: &Cut) -> Result<()> {
    let n = cut.coeffs.len();
    let mut coeffs = vec![0.0; model.num_vars()];
    for (c, v) in coeffs[..n].iter_mut().zip(&cut.coeffs) {
        *c = -v;
    }
    coeffs[n] = 1.0;
    model.add_row(coeffs, Sense::Le, cut.intercept)
}

fn same_point(a: &[f64], b: &[f64]) -> bool {
    a.iter()
        .zip(b)
        .all(|(x, y)| (x - y).abs() <= tol::DUPLICATE_SUPPORT)
}

/// Approximate cutting plane over `bounds`, starting from `inherited` cuts
/// (valid on a superset of `bounds`) plus a cut at the box midpoint.
pub fn approximate_cutting_plane(
    problem: &OracleProblem,
    bounds: &BoxBounds,
    inherited: &[Cut],
    opts: &ApproxOptions,
) -> Result<CutPlaneResult> {
    check_box(problem, bounds)?;
    let n = problem.dim();
    let mut model = base_model(problem, bounds, 0)?;
    for cut in inherited {
        if cut.coeffs.len() != n {
            return Err(Error::domain("inherited cut has the wrong dimension"));
        }
        add_envelope_row(&mut model, cut)?;
    }

    let mut cuts = Vec::new();
    let mut visited: Vec<Vec<f64>> = Vec::new();
    let mut lb = f64::NEG_INFINITY;
    let mut incumbent = Vec::new();
    let mut trace = Vec::new();

    let mid = bounds.midpoint();
    let (support, f, grad) = stable_oracle(problem, &mid, bounds);
    if problem.constraints().is_satisfied(&support, tol::FEASIBILITY) {
        lb = f;
        incumbent = support.clone();
    }
    let cut = envelope_from_oracle(&support, f, &grad, bounds);
    add_envelope_row(&mut model, &cut)?;
    cuts.push(cut);
    visited.push(mid);

    let mut ub = f64::INFINITY;
    let mut best_ub = f64::INFINITY;
    let mut stalled = 0;
    let mut iter = 0;
    loop {
        iter += 1;
        let sol = model.solve()?;
        match sol.status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => return Ok(CutPlaneResult::infeasible(iter, cuts, trace)),
            LpStatus::Unbounded => {
                return Err(Error::SolverFailure(
                    "cutting-plane main problem is unbounded".into(),
                ))
            }
        }
        let eta = sol.objective_value;
        ub = ub.min(eta);
        let x = bounds.project(&sol.x[..n])?;
        let fx = problem.value_unchecked(&x);
        if fx > lb || incumbent.is_empty() {
            lb = fx;
            incumbent = x.clone();
        }
        trace.push(TraceRow {
            iter,
            lb,
            ub,
            support: x.clone(),
        });

        if best_ub.is_infinite() || ub < best_ub - tol::STALL_IMPROVEMENT * best_ub.abs().max(1.0) {
            best_ub = ub;
            stalled = 0;
        } else {
            stalled += 1;
        }

        let termination = if rel_gap(lb, ub) <= opts.subproblem_gap {
            Some(CutTermination::RelGap)
        } else if visited.iter().any(|v| same_point(v, &x)) {
            Some(CutTermination::DuplicateCut)
        } else if stalled >= opts.stall_iters {
            Some(CutTermination::Stall)
        } else if iter >= opts.max_iters {
            Some(CutTermination::IterLimit)
        } else {
            None
        };
        if let Some(termination) = termination {
            return Ok(CutPlaneResult {
                lower_bound: lb,
                upper_bound: ub,
                incumbent,
                cuts,
                iterations: iter,
                termination,
                trace,
            });
        }

        let (support, f, grad) = stable_oracle(problem, &x, bounds);
        let cut = envelope_from_oracle(&support, f, &grad, bounds);
        add_envelope_row(&mut model, &cut)?;
        cuts.push(cut);
        visited.push(x);
    }
}

/// Rows of the big-M graph of `y = [x_i - s_i]⁺` on `[l_i, u_i]`.
///
/// Coefficients are over the local variables `(x_i, y, z)`; `y >= 0` and
/// `z ∈ [0, 1]` (binary) are variable bounds, reported in
/// [`ReluGraph::y_bounds`] and [`ReluGraph::z_bounds`].
#[derive(Clone, Debug, PartialEq)]
pub struct ReluGraph {
    pub rows: Vec<([f64; 3], Sense, f64)>,
    pub y_bounds: (f64, f64),
    pub z_bounds: (f64, f64),
}

impl ReluGraph {
    /// Whether `(x, y, z)` satisfies every row and bound.
    pub fn admits(&self, x: f64, y: f64, z: f64, slack: f64) -> bool {
        let within = |v: f64, (lo, hi): (f64, f64)| v >= lo - slack && v <= hi + slack;
        within(y, self.y_bounds)
            && within(z, self.z_bounds)
            && self.rows.iter().all(|(c, sense, rhs)| {
                let act = c[0] * x + c[1] * y + c[2] * z;
                match sense {
                    Sense::Le => act <= rhs + slack,
                    Sense::Ge => act >= rhs - slack,
                    Sense::Eq => (act - rhs).abs() <= slack,
                }
            })
    }
}

pub fn build_relu_graph_rows(support: &[f64], bounds: &BoxBounds, index: usize) -> Result<ReluGraph> {
    if index >= bounds.dim() || support.len() != bounds.dim() {
        return Err(Error::domain("index or support does not match the box"));
    }
    let (lo, hi, s) = (bounds.lower()[index], bounds.upper()[index], support[index]);
    if s < lo - tol::BOX || s > hi + tol::BOX {
        return Err(Error::domain(format!(
            "support {s} outside [{lo}, {hi}] in dimension {index}"
        )));
    }
    Ok(ReluGraph {
        rows: vec![
            // y <= x - l (1 - z) - s z
            ([-1.0, 1.0, s - lo], Sense::Le, -lo),
            // y <= (u - s) z
            ([0.0, 1.0, -(hi - s)], Sense::Le, 0.0),
            // y >= x - s
            ([-1.0, 1.0, 0.0], Sense::Ge, -s),
        ],
        y_bounds: (0.0, f64::INFINITY),
        z_bounds: (0.0, 1.0),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExactOptions {
    /// Defaults to `binary_budget / n` when `None`.
    pub max_iters: Option<usize>,
    /// Cap on `n * max_iters`, the number of binaries the MILP may reach.
    pub binary_budget: usize,
    /// Node cap for the internal MILP branch-and-bound, per main problem.
    pub node_limit: usize,
}

impl Default for ExactOptions {
    fn default() -> Self {
        ExactOptions {
            max_iters: None,
            binary_budget: 60,
            node_limit: 200_000,
        }
    }
}

/// Exact cutting plane with ReLU overestimators; stops once
/// `UB - LB <= epsilon`, at which point `LB + epsilon >= max F`.
pub fn exact_cutting_plane(
    problem: &OracleProblem,
    bounds: &BoxBounds,
    epsilon: f64,
    opts: &ExactOptions,
) -> Result<CutPlaneResult> {
    check_box(problem, bounds)?;
    let n = problem.dim();
    if n == 0 {
        return Err(Error::domain("problem has no variables"));
    }
    let max_iters = opts.max_iters.unwrap_or(opts.binary_budget / n).max(1);
    if n * max_iters > opts.binary_budget {
        return Err(Error::Refused(format!(
            "{n} variables x {max_iters} iterations exceeds the binary budget of {}",
            opts.binary_budget
        )));
    }

    let mut cuts: Vec<Cut> = Vec::new();
    let mut lb = f64::NEG_INFINITY;
    let mut incumbent = Vec::new();
    let mut trace = Vec::new();

    let mid = bounds.midpoint();
    let (support, _, _) = stable_oracle(problem, &mid, bounds);
    if problem.constraints().is_satisfied(&support, tol::FEASIBILITY) {
        lb = problem.value_unchecked(&support);
        incumbent = support.clone();
    }
    cuts.push(relu_cut(problem, &support, bounds)?);

    let mut ub = f64::INFINITY;
    for iter in 1..=max_iters {
        let (model, binaries) = exact_main_problem(problem, bounds, &cuts)?;
        let Some((eta, point)) = solve_binary_program(&model, &binaries, opts.node_limit)? else {
            return Ok(CutPlaneResult::infeasible(iter, cuts, trace));
        };
        ub = ub.min(eta);
        let x = bounds.project(&point[..n])?;
        let fx = problem.value_unchecked(&x);
        if fx > lb || incumbent.is_empty() {
            lb = fx;
            incumbent = x.clone();
        }
        trace.push(TraceRow {
            iter,
            lb,
            ub,
            support: x.clone(),
        });
        let termination = if ub - lb <= epsilon {
            Some(CutTermination::AbsGap)
        } else if iter == max_iters {
            Some(CutTermination::IterLimit)
        } else {
            None
        };
        if let Some(termination) = termination {
            return Ok(CutPlaneResult {
                lower_bound: lb,
                upper_bound: ub,
                incumbent,
                cuts,
                iterations: iter,
                termination,
                trace,
            });
        }
        let (support, _, _) = stable_oracle(problem, &x, bounds);
        cuts.push(relu_cut(problem, &support, bounds)?);
    }
    unreachable!("loop returns on its last iteration")
}

/// MILP with variables `(x, η, y_11..y_nQ, z_11..z_nQ)`.
fn exact_main_problem(
    problem: &OracleProblem,
    bounds: &BoxBounds,
    cuts: &[Cut],
) -> Result<(LpModel, Vec<usize>)> {
    let n = problem.dim();
    let q = cuts.len();
    let y0 = n + 1;
    let z0 = y0 + n * q;
    let mut model = base_model(problem, bounds, 2 * n * q)?;
    let total = model.num_vars();
    let mut binaries = Vec::with_capacity(n * q);
    for (k, cut) in cuts.iter().enumerate() {
        let mut cut_row = vec![0.0; total];
        cut_row[n] = 1.0;
        for i in 0..n {
            let y = y0 + k * n + i;
            let z = z0 + k * n + i;
            let graph = build_relu_graph_rows(&cut.support, bounds, i)?;
            model.set_bounds(y, graph.y_bounds.0, graph.y_bounds.1)?;
            model.set_bounds(z, graph.z_bounds.0, graph.z_bounds.1)?;
            for (c, sense, rhs) in &graph.rows {
                let mut row = vec![0.0; total];
                row[i] = c[0];
                row[y] = c[1];
                row[z] = c[2];
                model.add_row(row, *sense, *rhs)?;
            }
            binaries.push(z);
            cut_row[y] = -cut.grad_at_support[i];
        }
        model.add_row(cut_row, Sense::Le, cut.f_at_support)?;
    }
    Ok((model, binaries))
}

/// Depth-first branch-and-bound over `binaries` using LP relaxations.
/// Returns the optimal objective and point, or `None` when infeasible.
fn solve_binary_program(
    model: &LpModel,
    binaries: &[usize],
    node_limit: usize,
) -> Result<Option<(f64, Vec<f64>)>> {
    const INTEGRALITY: f64 = 1e-6;
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut stack: Vec<Vec<(usize, f64)>> = vec![Vec::new()];
    let mut nodes = 0usize;
    while let Some(fixings) = stack.pop() {
        nodes += 1;
        if nodes > node_limit {
            return Err(Error::Refused(format!(
                "MILP branch-and-bound exceeded {node_limit} nodes"
            )));
        }
        let mut sub = model.clone();
        for &(var, v) in &fixings {
            sub.set_bounds(var, v, v)?;
        }
        let sol = sub.solve()?;
        match sol.status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => continue,
            LpStatus::Unbounded => {
                return Err(Error::SolverFailure("MILP relaxation is unbounded".into()))
            }
        }
        if let Some((b, _)) = &best {
            if sol.objective_value <= *b + 1e-9 {
                continue;
            }
        }
        let fractional = binaries
            .iter()
            .copied()
            .find(|&z| (sol.x[z] - sol.x[z].round()).abs() > INTEGRALITY);
        match fractional {
            None => best = Some((sol.objective_value, sol.x)),
            Some(z) => {
                // explore the side the relaxation leans towards first
                let (first, second) = if sol.x[z] >= 0.5 { (1.0, 0.0) } else { (0.0, 1.0) };
                let mut a = fixings.clone();
                a.push((z, second));
                stack.push(a);
                let mut b = fixings;
                b.push((z, first));
                stack.push(b);
            }
        }
    }
    Ok(best)
}
