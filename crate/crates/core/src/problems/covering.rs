//! Maximum covering facility defense.
//!
//! Facility `i` covers demand `j` when their distance is at most `dbar`;
//! hardening `x_i` keeps facility `i` available with probability `g_i(x_i)`.
//! Without capacities the expected coverage has a product closed form. With
//! capacities `K_i` the coverage of an available set is an assignment LP, and
//! the expectation runs over all subsets.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::gme::{SetTable, MAX_ELEMENTS};
use super::{availabilities, GKind};
use crate::error::{Error, Result};
use crate::lp::{LpModel, LpStatus, Sense};
use crate::model::{BoxBounds, LinearConstraints, Objective, OracleProblem};

/// Capacity slack factor: `K_i = |J| / ((1 - α) n)`.
pub const CAPACITY_ALPHA: f64 = 0.1;
pub const DEFAULT_DBAR: f64 = 0.2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct CoveringInstance {
    pub facility_xy: Vec<[f64; 2]>,
    pub demand_xy: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    pub dbar: f64,
    pub budget: f64,
    pub a: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub K: Option<Vec<f64>>,
    #[serde(default = "contest")]
    pub g_kind: GKind,
}

fn contest() -> GKind {
    GKind::Contest
}

impl CoveringInstance {
    pub fn dim(&self) -> usize {
        self.facility_xy.len()
    }

    pub fn is_capacitated(&self) -> bool {
        self.K.is_some()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.dim();
        let bad = |msg: String| Err(Error::Instance(msg));
        if n == 0 {
            return bad("covering instance has no facilities".into());
        }
        if self.weights.len() != self.demand_xy.len() {
            return bad("one weight per demand point is required".into());
        }
        if self.a.len() != n {
            return bad(format!("a must have {n} entries"));
        }
        if self.a.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            return bad("contest parameters a must be positive".into());
        }
        if self.weights.iter().any(|&w| !(w >= 0.0 && w.is_finite())) {
            return bad("weights must be non-negative".into());
        }
        if !(self.dbar >= 0.0 && self.dbar.is_finite()) || !self.budget.is_finite() {
            return bad("dbar and budget must be finite, dbar non-negative".into());
        }
        let coords = self.facility_xy.iter().chain(&self.demand_xy).flatten();
        if coords.into_iter().any(|v| !v.is_finite()) {
            return bad("coordinates must be finite".into());
        }
        if let Some(k) = &self.K {
            if k.len() != n || k.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
                return bad(format!("K must have {n} positive entries"));
            }
            if n > MAX_ELEMENTS {
                return Err(Error::Refused(format!(
                    "capacitated covering with {n} facilities exceeds the guard of {MAX_ELEMENTS}"
                )));
            }
        }
        Ok(())
    }

    /// `I_j`: facilities covering each demand point.
    pub fn coverage_sets(&self) -> Vec<Vec<usize>> {
        let r2 = self.dbar * self.dbar;
        self.demand_xy
            .iter()
            .map(|d| {
                self.facility_xy
                    .iter()
                    .enumerate()
                    .filter(|(_, f)| {
                        let (dx, dy) = (f[0] - d[0], f[1] - d[1]);
                        dx * dx + dy * dy <= r2
                    })
                    .map(|(i, _)| i)
                    .collect()
            })
            .collect()
    }

    /// Weighted coverage of the facility set `mask` without capacities.
    pub fn uncapacitated_coverage(&self, mask: usize) -> f64 {
        self.coverage_sets()
            .iter()
            .zip(&self.weights)
            .filter(|(cover, _)| cover.iter().any(|&i| mask >> i & 1 == 1))
            .map(|(_, w)| w)
            .sum()
    }

    pub fn to_problem(&self) -> Result<OracleProblem> {
        self.validate()?;
        let n = self.dim();
        let objective: Arc<dyn Objective> = match &self.K {
            None => Arc::new(UncapacitatedCoverage {
                sets: self.coverage_sets(),
                weights: self.weights.clone(),
                a: self.a.clone(),
                g_kind: self.g_kind,
            }),
            Some(_) => {
                let sets = self.coverage_sets();
                let table = SetTable::from_fn(n, |mask| assignment_value(self, &sets, mask))?;
                Arc::new(GmeObjective::new(table, self.a.clone(), self.g_kind))
            }
        };
        OracleProblem::new(objective, BoxBounds::unit(n), LinearConstraints::budget(n, self.budget))
    }
}

struct UncapacitatedCoverage {
    sets: Vec<Vec<usize>>,
    weights: Vec<f64>,
    a: Vec<f64>,
    g_kind: GKind,
}

impl Objective for UncapacitatedCoverage {
    fn dim(&self) -> usize {
        self.a.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let (g, _) = availabilities(self.g_kind, &self.a, x);
        self.sets
            .iter()
            .zip(&self.weights)
            .filter(|(cover, _)| !cover.is_empty())
            .map(|(cover, w)| w * (1.0 - cover.iter().map(|&i| 1.0 - g[i]).product::<f64>()))
            .sum()
    }

    fn gradient(&self, x: &[f64], grad: &mut [f64]) {
        let (g, dg) = availabilities(self.g_kind, &self.a, x);
        grad.iter_mut().for_each(|v| *v = 0.0);
        for (cover, w) in self.sets.iter().zip(&self.weights) {
            for &i in cover {
                let others: f64 = cover.iter().filter(|&&k| k != i).map(|&k| 1.0 - g[k]).product();
                grad[i] += w * others;
            }
        }
        for (v, d) in grad.iter_mut().zip(dg) {
            *v *= d;
        }
    }
}

/// Multilinear-type extension `Σ_S f(S) Π g Π (1 - g)` of a tabulated `f`.
pub(crate) struct GmeObjective {
    table: SetTable,
    a: Vec<f64>,
    g_kind: GKind,
}

impl GmeObjective {
    pub(crate) fn new(table: SetTable, a: Vec<f64>, g_kind: GKind) -> Self {
        GmeObjective { table, a, g_kind }
    }
}

impl Objective for GmeObjective {
    fn dim(&self) -> usize {
        self.table.num_elements()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let (g, _) = availabilities(self.g_kind, &self.a, x);
        self.table.expectation(&g)
    }

    fn gradient(&self, x: &[f64], grad: &mut [f64]) {
        let (g, dg) = availabilities(self.g_kind, &self.a, x);
        self.table.partials(&g, grad);
        for (v, d) in grad.iter_mut().zip(dg) {
            *v *= d;
        }
    }
}

/// Capacitated coverage `f(S)`: the best weighted assignment of demands to
/// available covering facilities, each demand counted at most once and each
/// facility serving at most `K_i`.
pub fn solve_assignment(inst: &CoveringInstance, subset: &[usize]) -> Result<f64> {
    inst.validate()?;
    if inst.K.is_none() {
        return Err(Error::domain("solve_assignment needs a capacitated instance"));
    }
    let mut mask = 0usize;
    for &i in subset {
        if i >= inst.dim() {
            return Err(Error::domain(format!("facility {i} out of range")));
        }
        mask |= 1 << i;
    }
    Ok(assignment_value(inst, &inst.coverage_sets(), mask))
}

fn assignment_value(inst: &CoveringInstance, sets: &[Vec<usize>], mask: usize) -> f64 {
    let capacity = inst.K.as_deref().expect("capacitated instance");
    // one column per (facility in S, demand it covers)
    let pairs: Vec<(usize, usize)> = sets
        .iter()
        .enumerate()
        .flat_map(|(j, cover)| cover.iter().filter(|&&i| mask >> i & 1 == 1).map(move |&i| (i, j)))
        .collect();
    if pairs.is_empty() {
        return 0.0;
    }
    let objective = pairs.iter().map(|&(_, j)| inst.weights[j]).collect();
    let bounds = vec![(0.0, 1.0); pairs.len()];
    let mut model = LpModel::with_bounds(objective, bounds).expect("valid bounds");
    let mut facilities: Vec<usize> = pairs.iter().map(|p| p.0).collect();
    facilities.sort_unstable();
    facilities.dedup();
    for i in facilities {
        let row = pairs.iter().map(|&(fi, _)| f64::from(u8::from(fi == i))).collect();
        model.add_row(row, Sense::Le, capacity[i]).expect("valid row");
    }
    let mut demands: Vec<usize> = pairs.iter().map(|p| p.1).collect();
    demands.dedup();
    for j in demands {
        let row: Vec<f64> = pairs.iter().map(|&(_, dj)| f64::from(u8::from(dj == j))).collect();
        if row.iter().sum::<f64>() > 1.0 {
            model.add_row(row, Sense::Le, 1.0).expect("valid row");
        }
    }
    let sol = model.solve().expect("assignment LP is bounded and feasible at zero");
    debug_assert_eq!(sol.status, LpStatus::Optimal);
    sol.objective_value
}

/// Random instance on the unit square: `n` facilities, `demands` demand
/// points with unit weights, `dbar = 0.2`, `a_i = b / n`, contest `g`, and
/// `K_i = |J| / ((1 - α) n)` when `capacitated`.
pub fn gen_covering(
    n: usize,
    demands: usize,
    budget: f64,
    capacitated: bool,
    seed: u64,
) -> Result<CoveringInstance> {
    if n == 0 || demands == 0 {
        return Err(Error::domain("covering generator needs n >= 1 and |J| >= 1"));
    }
    if !(budget > 0.0 && budget.is_finite()) {
        return Err(Error::domain("budget must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut point = || [rng.gen::<f64>(), rng.gen::<f64>()];
    let facility_xy = (0..n).map(|_| point()).collect();
    let demand_xy = (0..demands).map(|_| point()).collect();
    let capacity = demands as f64 / ((1.0 - CAPACITY_ALPHA) * n as f64);
    let inst = CoveringInstance {
        facility_xy,
        demand_xy,
        weights: vec![1.0; demands],
        dbar: DEFAULT_DBAR,
        budget,
        a: vec![budget / n as f64; n],
        K: capacitated.then(|| vec![capacity; n]),
        g_kind: GKind::Contest,
    };
    inst.validate()?;
    Ok(inst)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Facilities at fixed spots and demand points placed on top of them.
    fn toy(facilities: &[[f64; 2]], demands: &[[f64; 2]], k: Option<f64>) -> CoveringInstance {
        let n = facilities.len();
        CoveringInstance {
            facility_xy: facilities.to_vec(),
            demand_xy: demands.to_vec(),
            weights: vec![1.0; demands.len()],
            dbar: 0.2,
            budget: 1.0,
            a: vec![0.4; n],
            K: k.map(|k| vec![k; n]),
            g_kind: GKind::Identity,
        }
    }

    #[test]
    fn single_demand_single_facility() {
        let inst = toy(&[[0.5, 0.5], [0.0, 0.0]], &[[0.55, 0.5]], None);
        let p = inst.to_problem().unwrap();
        assert!((p.evaluate(&[0.3, 0.9]).unwrap() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn shared_demand() {
        let inst = toy(&[[0.5, 0.5], [0.5, 0.6]], &[[0.5, 0.55]], None);
        let p = inst.to_problem().unwrap();
        assert!((p.evaluate(&[0.5, 0.5]).unwrap() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn assignment_examples() {
        let none = toy(&[[0.5, 0.5]], &[[0.5, 0.5]], Some(1.0));
        assert_eq!(solve_assignment(&none, &[]).unwrap(), 0.0);
        let one = toy(&[[0.5, 0.5]], &[[0.5, 0.5], [0.52, 0.5], [0.5, 0.52]], Some(2.0));
        assert!((solve_assignment(&one, &[0]).unwrap() - 2.0).abs() < 1e-9);
        let two = toy(&[[0.1, 0.1], [0.9, 0.9]], &[[0.1, 0.1], [0.9, 0.9]], Some(1.0));
        assert!((solve_assignment(&two, &[0, 1]).unwrap() - 2.0).abs() < 1e-9);
        assert!(solve_assignment(&two, &[2]).is_err());
    }

    #[test]
    fn slack_capacities_match_uncapacitated() {
        let mut cap = gen_covering(5, 40, 2.0, true, 3).unwrap();
        cap.K = Some(vec![40.0; 5]);
        let mut uncap = cap.clone();
        uncap.K = None;
        let pc = cap.to_problem().unwrap();
        let pu = uncap.to_problem().unwrap();
        for x in [[0.1, 0.2, 0.3, 0.4, 0.5], [1.0, 0.0, 1.0, 0.0, 0.5], [0.0; 5]] {
            assert!((pc.evaluate(&x).unwrap() - pu.evaluate(&x).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn capacitated_table_is_monotone() {
        let inst = gen_covering(4, 30, 2.0, true, 11).unwrap();
        let sets = inst.coverage_sets();
        let f: Vec<f64> = (0..16).map(|m| assignment_value(&inst, &sets, m)).collect();
        for s in 0..16usize {
            for t in 0..16usize {
                if s & t == s {
                    assert!(f[s] <= f[t] + 1e-9);
                }
            }
        }
    }

    #[test]
    fn generator_parameters() {
        let inst = gen_covering(5, 150, 2.0, false, 1).unwrap();
        assert_eq!(inst.a, vec![0.4; 5]);
        assert_eq!(inst.demand_xy.len(), 150);
        assert!(inst.K.is_none());
        let cap = gen_covering(5, 150, 2.0, true, 1).unwrap();
        let k = cap.K.unwrap();
        assert!((k[0] - 150.0 / (0.9 * 5.0)).abs() < 1e-12);
        assert!((k[0] - 33.333_333_333_333_336).abs() < 1e-12);
    }

    #[test]
    fn gradient_handles_full_availability() {
        // g = 1 at x = 1 for identity; the gradient must not divide by zero
        let inst = toy(&[[0.5, 0.5], [0.5, 0.6]], &[[0.5, 0.55]], None);
        let p = inst.to_problem().unwrap();
        let g = p.gradient(&[1.0, 0.25]).unwrap();
        assert_eq!(g, vec![0.75, 0.0]);
    }
}
