//! Dense bounded-variable primal simplex.
//!
//! Every row gets a slack so the initial basis is the slack basis; rows whose
//! slack would start outside its bounds get an artificial instead and are
//! repaired in phase one. The tableau is kept in compact (dictionary) form:
//! one column per nonbasic variable, so its width stays at roughly the number
//! of structural variables even when hundreds of cut rows are present.
//!
//! Pivoting follows Bland's rule (lowest index enters, lowest index leaves on
//! ties), which makes the solver deterministic and cycle free.

use crate::error::{Error, Result};
use crate::tol;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub coeffs: Vec<f64>,
    pub sense: Sense,
    pub rhs: f64,
}

/// `max cᵀv` subject to row constraints and per-variable bounds.
#[derive(Clone, Debug, PartialEq)]
pub struct LpModel {
    objective: Vec<f64>,
    rows: Vec<Row>,
    bounds: Vec<(f64, f64)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective_value: f64,
}

impl LpSolution {
    fn without_point(status: LpStatus, n: usize) -> Self {
        let objective_value = match status {
            LpStatus::Unbounded => f64::INFINITY,
            _ => f64::NEG_INFINITY,
        };
        LpSolution {
            status,
            x: vec![f64::NAN; n],
            objective_value,
        }
    }
}

impl LpModel {
    /// Model with every variable bounded to `[0, +inf)`.
    pub fn new(objective: Vec<f64>) -> Self {
        let n = objective.len();
        LpModel {
            objective,
            rows: Vec::new(),
            bounds: vec![(0.0, f64::INFINITY); n],
        }
    }

    pub fn with_bounds(objective: Vec<f64>, bounds: Vec<(f64, f64)>) -> Result<Self> {
        if bounds.len() != objective.len() {
            return Err(Error::domain(format!(
                "{} bounds for {} variables",
                bounds.len(),
                objective.len()
            )));
        }
        let mut model = LpModel::new(objective);
        for (j, (lo, hi)) in bounds.into_iter().enumerate() {
            model.set_bounds(j, lo, hi)?;
        }
        Ok(model)
    }

    pub fn set_bounds(&mut self, var: usize, lo: f64, hi: f64) -> Result<()> {
        if var >= self.num_vars() {
            return Err(Error::domain(format!("variable {var} out of range")));
        }
        if !lo.is_finite() || hi.is_nan() || lo > hi {
            return Err(Error::domain(format!(
                "invalid bounds [{lo}, {hi}] for variable {var}"
            )));
        }
        self.bounds[var] = (lo, hi);
        Ok(())
    }

    pub fn add_row(&mut self, coeffs: Vec<f64>, sense: Sense, rhs: f64) -> Result<()> {
        if coeffs.len() != self.num_vars() {
            return Err(Error::domain(format!(
                "row has {} coefficients, model has {} variables",
                coeffs.len(),
                self.num_vars()
            )));
        }
        if !rhs.is_finite() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::domain("row contains a non-finite value"));
        }
        self.rows.push(Row { coeffs, sense, rhs });
        Ok(())
    }

    /// Consuming form of [`LpModel::add_row`].
    pub fn with_row(mut self, coeffs: Vec<f64>, sense: Sense, rhs: f64) -> Result<Self> {
        self.add_row(coeffs, sense, rhs)?;
        Ok(self)
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn solve(&self) -> Result<LpSolution> {
        solve(self)
    }

    /// Largest row or bound violation of `x`, with row residuals scaled by
    /// the magnitude of the terms involved.
    pub fn max_scaled_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for row in &self.rows {
            let activity: f64 = row.coeffs.iter().zip(x).map(|(a, v)| a * v).sum();
            let scale = row
                .coeffs
                .iter()
                .zip(x)
                .map(|(a, v)| (a * v).abs())
                .fold(row.rhs.abs(), f64::max)
                .max(1.0);
            let excess = match row.sense {
                Sense::Le => activity - row.rhs,
                Sense::Ge => row.rhs - activity,
                Sense::Eq => (activity - row.rhs).abs(),
            };
            worst = worst.max(excess / scale);
        }
        for (v, &(lo, hi)) in x.iter().zip(&self.bounds) {
            worst = worst.max(lo - v).max(v - hi);
        }
        worst
    }
}

/// Solves `model` with a cold start.
pub fn solve(model: &LpModel) -> Result<LpSolution> {
    let n = model.num_vars();
    let mut simplex = Simplex::build(model);
    let max_iters = 50 * (simplex.m + simplex.ncols) + 1000;

    if simplex.has_artificials() {
        simplex.set_phase_one_cost();
        match simplex.run(max_iters)? {
            Outcome::Optimal => {}
            Outcome::Unbounded => {
                return Err(Error::SolverFailure("phase one reported unbounded".into()))
            }
        }
        let infeasibility = simplex.artificial_sum();
        let scale = model
            .rows
            .iter()
            .map(|r| r.rhs.abs())
            .fold(1.0_f64, f64::max);
        if infeasibility > 1e-9 * scale {
            return Ok(LpSolution::without_point(LpStatus::Infeasible, n));
        }
        simplex.retire_artificials();
    }

    simplex.set_phase_two_cost(&model.objective);
    match simplex.run(max_iters)? {
        Outcome::Optimal => {}
        Outcome::Unbounded => return Ok(LpSolution::without_point(LpStatus::Unbounded, n)),
    }

    let x: Vec<f64> = (0..n)
        .map(|j| {
            let (lo, hi) = model.bounds[j];
            simplex.val[j].clamp(lo, hi)
        })
        .collect();
    let violation = model.max_scaled_violation(&x);
    if violation > tol::LP_ROW {
        return Err(Error::SolverFailure(format!(
            "final point violates the model by {violation:e}"
        )));
    }
    let objective_value = model.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    Ok(LpSolution {
        status: LpStatus::Optimal,
        x,
        objective_value,
    })
}

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-9;
const BREAKDOWN: f64 = 1e-11;
const HARRIS_TOL: f64 = 1e-9;
const PRIMAL_TOL: f64 = 1e-9;

enum Outcome {
    Optimal,
    Unbounded,
}

/// Compact tableau: `x_B[r] + Σ_k tab[r][k] · x_{cols[k]} = rhs[r]`.
struct Simplex {
    m: usize,
    ncols: usize,
    tab: Vec<f64>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    cols: Vec<usize>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    val: Vec<f64>,
    at_upper: Vec<bool>,
    cost: Vec<f64>,
    first_artificial: usize,
    /// Normalized constraint matrix over every variable, kept for reinversion.
    orig: Vec<Vec<f64>>,
    orig_rhs: Vec<f64>,
}

impl Simplex {
    fn build(model: &LpModel) -> Self {
        let n = model.num_vars();
        let m = model.num_rows();

        let mut lo: Vec<f64> = model.bounds.iter().map(|b| b.0).collect();
        let mut hi: Vec<f64> = model.bounds.iter().map(|b| b.1).collect();
        let mut val = lo.clone();

        // Normalize to a x + s = b with s >= 0 (Le) or s = 0 (Eq).
        let mut dense_rows = Vec::with_capacity(m);
        for row in &model.rows {
            let (coeffs, rhs, slack_hi) = match row.sense {
                Sense::Le => (row.coeffs.clone(), row.rhs, f64::INFINITY),
                Sense::Ge => (row.coeffs.iter().map(|c| -c).collect(), -row.rhs, f64::INFINITY),
                Sense::Eq => (row.coeffs.clone(), row.rhs, 0.0),
            };
            dense_rows.push((coeffs, rhs, slack_hi));
        }
        for &(_, _, slack_hi) in &dense_rows {
            lo.push(0.0);
            hi.push(slack_hi);
            val.push(0.0);
        }

        let first_artificial = n + m;
        let mut basis = Vec::with_capacity(m);
        let mut cols: Vec<usize> = (0..n).collect();
        let mut row_signs = Vec::with_capacity(m);
        for (i, (coeffs, rhs, slack_hi)) in dense_rows.iter().enumerate() {
            let activity: f64 = coeffs.iter().zip(&val[..n]).map(|(a, v)| a * v).sum();
            let resid = rhs - activity;
            let slack = n + i;
            if resid >= 0.0 && resid <= *slack_hi {
                basis.push(slack);
                val[slack] = resid;
                row_signs.push(None);
            } else {
                let art = lo.len();
                lo.push(0.0);
                hi.push(f64::INFINITY);
                let sign = if resid >= 0.0 { 1.0 } else { -1.0 };
                val.push(sign * resid);
                basis.push(art);
                cols.push(slack);
                row_signs.push(Some(sign));
            }
        }

        let ncols = cols.len();
        let mut col_of = vec![usize::MAX; lo.len()];
        for (k, &v) in cols.iter().enumerate() {
            col_of[v] = k;
        }
        let mut tab = vec![0.0; m * ncols];
        let mut rhs_vec = vec![0.0; m];
        for (i, (coeffs, rhs, _)) in dense_rows.iter().enumerate() {
            let sign = row_signs[i].unwrap_or(1.0);
            let row = &mut tab[i * ncols..(i + 1) * ncols];
            for (j, &a) in coeffs.iter().enumerate() {
                row[j] = sign * a;
            }
            if row_signs[i].is_some() {
                row[col_of[n + i]] = sign;
            }
            rhs_vec[i] = sign * rhs;
        }

        let nvars = lo.len();
        let mut orig = vec![vec![0.0; nvars]; m];
        let mut orig_rhs = vec![0.0; m];
        let mut art = first_artificial;
        for (i, (coeffs, rhs, _)) in dense_rows.iter().enumerate() {
            let sign = row_signs[i].unwrap_or(1.0);
            for (j, &a) in coeffs.iter().enumerate() {
                orig[i][j] = sign * a;
            }
            orig[i][n + i] = sign;
            if row_signs[i].is_some() {
                orig[i][art] = 1.0;
                art += 1;
            }
            orig_rhs[i] = sign * rhs;
        }
        Simplex {
            m,
            ncols,
            tab,
            rhs: rhs_vec,
            basis,
            cols,
            lo,
            hi,
            val,
            at_upper: vec![false; nvars],
            cost: vec![0.0; nvars],
            first_artificial,
            orig,
            orig_rhs,
        }
    }

    fn has_artificials(&self) -> bool {
        self.lo.len() > self.first_artificial
    }

    fn set_phase_one_cost(&mut self) {
        self.cost.iter_mut().for_each(|c| *c = 0.0);
        for c in &mut self.cost[self.first_artificial..] {
            *c = -1.0;
        }
    }

    fn set_phase_two_cost(&mut self, objective: &[f64]) {
        self.cost.iter_mut().for_each(|c| *c = 0.0);
        self.cost[..objective.len()].copy_from_slice(objective);
    }

    fn artificial_sum(&self) -> f64 {
        self.val[self.first_artificial..].iter().sum()
    }

    /// Pins every artificial to zero; basic ones stay in the basis as fixed
    /// variables and leave through ordinary degenerate pivots.
    fn retire_artificials(&mut self) {
        for v in self.first_artificial..self.lo.len() {
            self.hi[v] = 0.0;
            self.val[v] = 0.0;
            self.at_upper[v] = false;
        }
        self.refresh_basic_values();
    }

    fn refresh_basic_values(&mut self) {
        for r in 0..self.m {
            let row = &self.tab[r * self.ncols..(r + 1) * self.ncols];
            let mut v = self.rhs[r];
            for (k, &t) in row.iter().enumerate() {
                if t != 0.0 {
                    v -= t * self.val[self.cols[k]];
                }
            }
            self.val[self.basis[r]] = v;
        }
    }

    fn reduced_cost(&self, k: usize) -> f64 {
        let mut d = self.cost[self.cols[k]];
        for r in 0..self.m {
            let cb = self.cost[self.basis[r]];
            if cb != 0.0 {
                d -= cb * self.tab[r * self.ncols + k];
            }
        }
        d
    }

    /// Bland: eligible nonbasic column with the lowest variable index.
    fn choose_entering(&self) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for k in 0..self.ncols {
            let v = self.cols[k];
            if self.hi[v] - self.lo[v] <= 0.0 {
                continue;
            }
            if let Some((bk, _)) = best {
                if self.cols[bk] < v {
                    continue;
                }
            }
            let d = self.reduced_cost(k);
            let dir = if !self.at_upper[v] && d > COST_TOL {
                1.0
            } else if self.at_upper[v] && d < -COST_TOL {
                -1.0
            } else {
                continue;
            };
            best = Some((k, dir));
        }
        best
    }

    fn run(&mut self, max_iters: usize) -> Result<Outcome> {
        let mut fresh = false;
        for iter in 0..max_iters {
            if iter % 64 == 63 {
                self.reinvert();
                fresh = true;
            }
            let Some((k, dir)) = self.choose_entering() else {
                if !fresh {
                    // confirm optimality on an accurate tableau
                    self.reinvert();
                    fresh = true;
                    continue;
                }
                // reinversion can expose small primal infeasibilities; the
                // basis is dual feasible, so repair them with dual pivots
                if self.dual_pivot() {
                    fresh = false;
                    continue;
                }
                return Ok(Outcome::Optimal);
            };
            fresh = false;
            let entering = self.cols[k];

            // Harris two-pass ratio test: find the largest step that keeps
            // every basic variable within HARRIS_TOL of its bounds, then leave
            // on the largest pivot among rows blocking before that step.
            let mut relaxed = f64::INFINITY;
            for r in 0..self.m {
                let alpha = -self.tab[r * self.ncols + k] * dir;
                let b = self.basis[r];
                if alpha < -PIVOT_TOL {
                    relaxed = relaxed.min((self.val[b] - self.lo[b] + HARRIS_TOL) / -alpha);
                } else if alpha > PIVOT_TOL && self.hi[b].is_finite() {
                    relaxed = relaxed.min((self.hi[b] - self.val[b] + HARRIS_TOL) / alpha);
                }
            }
            let mut step = f64::INFINITY;
            let mut leave: Option<(usize, bool)> = None;
            let mut best_alpha = 0.0;
            for r in 0..self.m {
                let alpha = -self.tab[r * self.ncols + k] * dir;
                let b = self.basis[r];
                let (limit, to_upper) = if alpha < -PIVOT_TOL {
                    (((self.val[b] - self.lo[b]) / -alpha).max(0.0), false)
                } else if alpha > PIVOT_TOL && self.hi[b].is_finite() {
                    (((self.hi[b] - self.val[b]) / alpha).max(0.0), true)
                } else {
                    continue;
                };
                if limit > relaxed {
                    continue;
                }
                let size = alpha.abs();
                let better = match leave {
                    None => true,
                    Some((lr, _)) => {
                        size > best_alpha * (1.0 + 1e-9)
                            || (size >= best_alpha * (1.0 - 1e-9) && b < self.basis[lr])
                    }
                };
                if better {
                    step = limit;
                    best_alpha = size;
                    leave = Some((r, to_upper));
                }
            }

            let flip = self.hi[entering] - self.lo[entering];
            if flip <= step {
                if !flip.is_finite() {
                    return Ok(Outcome::Unbounded);
                }
                self.shift(k, dir, flip);
                self.at_upper[entering] = dir > 0.0;
                self.val[entering] = if dir > 0.0 {
                    self.hi[entering]
                } else {
                    self.lo[entering]
                };
                continue;
            }

            let (r, to_upper) = leave.expect("finite step implies a blocking row");
            let pivot = self.tab[r * self.ncols + k];
            if pivot.abs() < BREAKDOWN {
                return Err(Error::SolverFailure(format!(
                    "pivot {pivot:e} below breakdown threshold"
                )));
            }
            self.shift(k, dir, step);
            let leaving = self.basis[r];
            self.val[leaving] = if to_upper {
                self.hi[leaving]
            } else {
                self.lo[leaving]
            };
            self.at_upper[leaving] = to_upper;
            self.at_upper[entering] = false;
            self.pivot(r, k);
        }
        Err(Error::SolverFailure(format!(
            "no convergence within {max_iters} iterations"
        )))
    }

    /// One bounded dual simplex pivot on the most violated basic variable.
    /// Returns false when the basis is primal feasible or no column can
    /// repair the violation.
    fn dual_pivot(&mut self) -> bool {
        let mut worst: Option<(usize, f64)> = None;
        for r in 0..self.m {
            let b = self.basis[r];
            let below = self.lo[b] - self.val[b];
            let above = self.val[b] - self.hi[b];
            let excess = below.max(above);
            let bound = if below > 0.0 { self.lo[b] } else { self.hi[b] };
            let tol = PRIMAL_TOL * bound.abs().max(1.0);
            if excess > tol && worst.is_none_or(|(_, w)| excess > w) {
                worst = Some((r, excess));
            }
        }
        let Some((r, _)) = worst else {
            return false;
        };
        let b = self.basis[r];
        let to_upper = self.val[b] > self.hi[b];
        let target = if to_upper { self.hi[b] } else { self.lo[b] };

        // x_b = rhs - Σ tab[r][k] x_k; pick the column whose move fixes x_b
        // with the smallest change in reduced cost.
        let mut choice: Option<(usize, f64, f64, f64)> = None;
        for k in 0..self.ncols {
            let v = self.cols[k];
            if self.hi[v] - self.lo[v] <= 0.0 {
                continue;
            }
            let t = self.tab[r * self.ncols + k];
            if t.abs() <= PIVOT_TOL {
                continue;
            }
            // raising x_b needs -t·Δ > 0
            let dir = if to_upper { t.signum() } else { -t.signum() };
            if (dir > 0.0 && self.at_upper[v]) || (dir < 0.0 && !self.at_upper[v]) {
                continue;
            }
            let ratio = self.reduced_cost(k).abs() / t.abs();
            let better = match choice {
                None => true,
                Some((_, _, best, size)) => {
                    ratio < best - 1e-12 || (ratio <= best + 1e-12 && t.abs() > size)
                }
            };
            if better {
                choice = Some((k, dir, ratio, t.abs()));
            }
        }
        let Some((k, dir, _, _)) = choice else {
            return false;
        };
        let t = self.tab[r * self.ncols + k];
        let step = ((self.val[b] - target) / t).abs();
        let entering = self.cols[k];
        self.shift(k, dir, step);
        self.val[b] = target;
        self.at_upper[b] = to_upper;
        self.at_upper[entering] = false;
        self.pivot(r, k);
        true
    }

    /// Recomputes the tableau `B⁻¹N`, `B⁻¹b` for the current basis from the
    /// original rows, discarding accumulated rounding error. Keeps the old
    /// tableau if the basis matrix looks singular.
    fn reinvert(&mut self) {
        let (m, nc) = (self.m, self.ncols);
        let width = m + nc + 1;
        let mut a = vec![0.0; m * width];
        for i in 0..m {
            let row = &mut a[i * width..(i + 1) * width];
            for (r, &b) in self.basis.iter().enumerate() {
                row[r] = self.orig[i][b];
            }
            for (k, &v) in self.cols.iter().enumerate() {
                row[m + k] = self.orig[i][v];
            }
            row[m + nc] = self.orig_rhs[i];
        }
        for c in 0..m {
            let p = (c..m)
                .max_by(|&x, &y| a[x * width + c].abs().total_cmp(&a[y * width + c].abs()))
                .expect("non-empty range");
            let pv = a[p * width + c];
            if pv.abs() < BREAKDOWN {
                self.refresh_basic_values();
                return;
            }
            if p != c {
                for j in 0..width {
                    a.swap(p * width + j, c * width + j);
                }
            }
            for j in 0..width {
                a[c * width + j] /= pv;
            }
            let pivot_row: Vec<f64> = a[c * width..(c + 1) * width].to_vec();
            for i in 0..m {
                if i == c {
                    continue;
                }
                let f = a[i * width + c];
                if f != 0.0 {
                    for (x, &pr) in a[i * width..(i + 1) * width].iter_mut().zip(&pivot_row) {
                        *x -= f * pr;
                    }
                }
            }
        }
        for i in 0..m {
            self.tab[i * nc..(i + 1) * nc].copy_from_slice(&a[i * width + m..i * width + m + nc]);
            self.rhs[i] = a[i * width + m + nc];
        }
        self.refresh_basic_values();
    }

    /// Moves the entering variable by `dir * step` and updates basic values.
    fn shift(&mut self, k: usize, dir: f64, step: f64) {
        if step == 0.0 {
            return;
        }
        let entering = self.cols[k];
        self.val[entering] += dir * step;
        for r in 0..self.m {
            let t = self.tab[r * self.ncols + k];
            if t != 0.0 {
                self.val[self.basis[r]] -= t * dir * step;
            }
        }
    }

    fn pivot(&mut self, r: usize, k: usize) {
        let nc = self.ncols;
        let p = self.tab[r * nc + k];
        {
            let row = &mut self.tab[r * nc..(r + 1) * nc];
            for (kk, t) in row.iter_mut().enumerate() {
                *t = if kk == k { 1.0 / p } else { *t / p };
            }
        }
        self.rhs[r] /= p;
        let pivot_row: Vec<f64> = self.tab[r * nc..(r + 1) * nc].to_vec();
        let pivot_rhs = self.rhs[r];
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let factor = self.tab[i * nc + k];
            if factor == 0.0 {
                continue;
            }
            let row = &mut self.tab[i * nc..(i + 1) * nc];
            for (kk, t) in row.iter_mut().enumerate() {
                if kk == k {
                    *t = -factor / p;
                } else {
                    *t -= factor * pivot_row[kk];
                }
            }
            self.rhs[i] -= factor * pivot_rhs;
        }
        std::mem::swap(&mut self.basis[r], &mut self.cols[k]);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn single_bound() {
        let model = LpModel::new(vec![1.0])
            .with_row(vec![1.0], Sense::Le, 1.0)
            .unwrap();
        let sol = model.solve().unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!(close(sol.x[0], 1.0));
    }

    #[test]
    fn simplex_on_simplex() {
        let model = LpModel::with_bounds(vec![1.0, 1.0], vec![(0.0, 1.0); 2])
            .unwrap()
            .with_row(vec![1.0, 1.0], Sense::Le, 1.0)
            .unwrap();
        let sol = model.solve().unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!(close(sol.objective_value, 1.0));
    }

    #[test]
    fn two_sqrt_cuts() {
        // variables (x, eta)
        let model = LpModel::with_bounds(vec![0.0, 1.0], vec![(0.0, 1.0), (0.0, f64::INFINITY)])
            .unwrap()
            .with_row(vec![-0.75, 1.0], Sense::Le, 0.5)
            .unwrap()
            .with_row(vec![0.25, 1.0], Sense::Le, 1.25)
            .unwrap();
        let sol = model.solve().unwrap();
        assert!(close(sol.x[0], 0.75));
        assert!(close(sol.x[1], 1.0625));
        assert!(close(sol.objective_value, 1.0625));
    }

    #[test]
    fn infeasible_and_unbounded() {
        let model = LpModel::new(vec![1.0])
            .with_row(vec![1.0], Sense::Ge, 2.0)
            .unwrap()
            .with_row(vec![1.0], Sense::Le, 1.0)
            .unwrap();
        assert_eq!(model.solve().unwrap().status, LpStatus::Infeasible);

        let model = LpModel::new(vec![1.0, 0.0])
            .with_row(vec![1.0, -1.0], Sense::Le, 1.0)
            .unwrap();
        assert_eq!(model.solve().unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn equality_and_ge_rows() {
        // max x + 2y, x + y = 1, x >= 0.25
        let model = LpModel::new(vec![1.0, 2.0])
            .with_row(vec![1.0, 1.0], Sense::Eq, 1.0)
            .unwrap()
            .with_row(vec![1.0, 0.0], Sense::Ge, 0.25)
            .unwrap();
        let sol = model.solve().unwrap();
        assert!(close(sol.x[0], 0.25));
        assert!(close(sol.x[1], 0.75));
    }

    #[test]
    fn negative_lower_bounds() {
        // max -x s.t. x >= -3 via bound, x + y >= -5, y in [-1, 1]
        let model = LpModel::with_bounds(vec![-1.0, 1.0], vec![(-3.0, 4.0), (-1.0, 1.0)])
            .unwrap()
            .with_row(vec![1.0, 1.0], Sense::Ge, -5.0)
            .unwrap();
        let sol = model.solve().unwrap();
        assert!(close(sol.x[0], -3.0));
        assert!(close(sol.x[1], 1.0));
    }

    #[test]
    fn add_row_checks_length() {
        let mut model = LpModel::new(vec![1.0]);
        assert!(model.add_row(vec![1.0, 2.0], Sense::Le, 1.0).is_err());
        model.add_row(vec![1.0], Sense::Le, 1.0).unwrap();
        assert_eq!(model.num_rows(), 1);
        assert!(model.set_bounds(0, 1.0, 0.0).is_err());
        assert!(model.set_bounds(0, f64::NEG_INFINITY, 0.0).is_err());
    }

    #[test]
    fn duplicate_row_keeps_optimum() {
        let base = LpModel::with_bounds(vec![1.0, 1.0], vec![(0.0, 1.0); 2])
            .unwrap()
            .with_row(vec![2.0, 1.0], Sense::Le, 1.5)
            .unwrap();
        let first = base.solve().unwrap();
        let dup = base.clone().with_row(vec![2.0, 1.0], Sense::Le, 1.5).unwrap();
        let second = dup.solve().unwrap();
        assert!(close(first.objective_value, second.objective_value));
    }

    #[test]
    fn incremental_rows_match_fresh_model() {
        let mut incremental = LpModel::with_bounds(vec![0.0, 0.0, 1.0], vec![(0.0, 1.0), (0.0, 1.0), (0.0, f64::INFINITY)]).unwrap();
        incremental.add_row(vec![-1.0, -1.0, 1.0], Sense::Le, 0.2).unwrap();
        let _ = incremental.solve().unwrap();
        incremental.add_row(vec![-0.3, -0.1, 1.0], Sense::Le, 0.9).unwrap();
        incremental.add_row(vec![1.0, 1.0, 0.0], Sense::Le, 1.0).unwrap();
        let resolved = incremental.solve().unwrap();

        let fresh = LpModel::with_bounds(vec![0.0, 0.0, 1.0], vec![(0.0, 1.0), (0.0, 1.0), (0.0, f64::INFINITY)])
            .unwrap()
            .with_row(vec![-1.0, -1.0, 1.0], Sense::Le, 0.2)
            .unwrap()
            .with_row(vec![-0.3, -0.1, 1.0], Sense::Le, 0.9)
            .unwrap()
            .with_row(vec![1.0, 1.0, 0.0], Sense::Le, 1.0)
            .unwrap();
        let cold = fresh.solve().unwrap();
        assert!((resolved.objective_value - cold.objective_value).abs() <= 1e-9);
        assert_eq!(resolved, cold);
    }

    #[test]
    fn degenerate_problem_terminates() {
        // Classic cycling example for Dantzig's rule (Beale), maximized form.
        let model = LpModel::new(vec![0.75, -150.0, 0.02, -6.0])
            .with_row(vec![0.25, -60.0, -0.04, 9.0], Sense::Le, 0.0)
            .unwrap()
            .with_row(vec![0.5, -90.0, -0.02, 3.0], Sense::Le, 0.0)
            .unwrap()
            .with_row(vec![0.0, 0.0, 1.0, 0.0], Sense::Le, 1.0)
            .unwrap();
        let sol = model.solve().unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!(close(sol.objective_value, 0.05));
    }

    #[test]
    fn solutions_are_deterministic() {
        let model = LpModel::with_bounds(vec![1.0, 1.0, 1.0], vec![(0.0, 1.0); 3])
            .unwrap()
            .with_row(vec![1.0, 1.0, 1.0], Sense::Le, 1.5)
            .unwrap()
            .with_row(vec![1.0, -1.0, 0.0], Sense::Le, 0.0)
            .unwrap();
        let a = model.solve().unwrap();
        let b = model.solve().unwrap();
        assert_eq!(a.x.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), b.x.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
    }

    proptest! {
        #[test]
        fn optimal_points_are_feasible(
            n in 1usize..5,
            m in 0usize..6,
            seed in any::<u64>(),
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let objective: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut model = LpModel::with_bounds(objective, vec![(0.0, 2.0); n]).unwrap();
            for _ in 0..m {
                let coeffs: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let sense = match rng.gen_range(0..3) { 0 => Sense::Le, 1 => Sense::Ge, _ => Sense::Eq };
                let rhs = rng.gen_range(-1.0..1.0);
                model.add_row(coeffs, sense, rhs).unwrap();
            }
            let sol = model.solve().unwrap();
            if sol.status == LpStatus::Optimal {
                prop_assert!(model.max_scaled_violation(&sol.x) <= 1e-7);
                for (v, (lo, hi)) in sol.x.iter().zip(model.bounds()) {
                    prop_assert!(*v >= *lo - 1e-9 && *v <= *hi + 1e-9);
                }
            }
        }
    }
}
