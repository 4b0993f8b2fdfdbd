//! Problem contract shared by every solver: a value/gradient oracle over a
//! box `[lower, upper]` intersected with `A x <= b`.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tol;

/// Axis-aligned box `{x : lower <= x <= upper}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxBounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl BoxBounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::domain(format!(
                "box bounds have lengths {} and {}",
                lower.len(),
                upper.len()
            )));
        }
        for (i, (&lo, &hi)) in lower.iter().zip(&upper).enumerate() {
            if !lo.is_finite() || !hi.is_finite() {
                return Err(Error::domain(format!("non-finite bound in dimension {i}")));
            }
            if lo > hi {
                return Err(Error::domain(format!(
                    "lower bound {lo} exceeds upper bound {hi} in dimension {i}"
                )));
            }
        }
        Ok(BoxBounds { lower, upper })
    }

    /// The unit cube `[0, 1]^n`.
    pub fn unit(n: usize) -> Self {
        BoxBounds {
            lower: vec![0.0; n],
            upper: vec![1.0; n],
        }
    }

    /// The degenerate box `[x, x]`.
    pub fn point(x: &[f64]) -> Result<Self> {
        BoxBounds::new(x.to_vec(), x.to_vec())
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn width(&self, i: usize) -> f64 {
        self.upper[i] - self.lower[i]
    }

    pub fn widths(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.width(i)).collect()
    }

    pub fn midpoint(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| 0.5 * (lo + hi))
            .collect()
    }

    /// L1 norm of the width vector.
    pub fn diameter_l1(&self) -> f64 {
        (0..self.dim()).map(|i| self.width(i)).sum()
    }

    pub fn is_zero_volume(&self) -> bool {
        (0..self.dim()).all(|i| self.width(i) <= 0.0)
    }

    pub fn contains(&self, x: &[f64], slack: f64) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&v, (&lo, &hi))| v >= lo - slack && v <= hi + slack)
    }

    pub fn contains_box(&self, other: &BoxBounds, slack: f64) -> bool {
        self.dim() == other.dim()
            && (0..self.dim()).all(|i| {
                other.lower[i] >= self.lower[i] - slack && other.upper[i] <= self.upper[i] + slack
            })
    }

    /// Copy of this box with dimension `i` replaced by `[lo, hi]`.
    pub fn with_interval(&self, i: usize, lo: f64, hi: f64) -> Result<Self> {
        let mut lower = self.lower.clone();
        let mut upper = self.upper.clone();
        lower[i] = lo;
        upper[i] = hi;
        BoxBounds::new(lower, upper)
    }

    /// Componentwise clamp.
    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::domain(format!(
                "point has length {}, box has dimension {}",
                x.len(),
                self.dim()
            )));
        }
        Ok(x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(&v, (&lo, &hi))| v.clamp(lo, hi))
            .collect())
    }

    /// Uniform sample from the box.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(&lo, &hi)| if hi > lo { rng.gen_range(lo..=hi) } else { lo })
            .collect()
    }
}

/// Componentwise clamp of `x` into `bounds`.
pub fn project_into_box(x: &[f64], bounds: &BoxBounds) -> Result<Vec<f64>> {
    bounds.project(x)
}

/// Row-major system `A x <= b`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LinearConstraints {
    matrix: Vec<Vec<f64>>,
    rhs: Vec<f64>,
}

impl LinearConstraints {
    pub fn new(matrix: Vec<Vec<f64>>, rhs: Vec<f64>) -> Result<Self> {
        if matrix.len() != rhs.len() {
            return Err(Error::domain(format!(
                "constraint matrix has {} rows but rhs has {} entries",
                matrix.len(),
                rhs.len()
            )));
        }
        if let Some(first) = matrix.first() {
            if matrix.iter().any(|row| row.len() != first.len()) {
                return Err(Error::domain("constraint rows have unequal lengths"));
            }
        }
        Ok(LinearConstraints { matrix, rhs })
    }

    pub fn none() -> Self {
        LinearConstraints::default()
    }

    /// Single budget row `sum(x) <= budget`.
    pub fn budget(n: usize, budget: f64) -> Self {
        LinearConstraints {
            matrix: vec![vec![1.0; n]],
            rhs: vec![budget],
        }
    }

    pub fn num_rows(&self) -> usize {
        self.rhs.len()
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.matrix
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn rows(&self) -> impl Iterator<Item = (&[f64], f64)> {
        self.matrix.iter().map(Vec::as_slice).zip(self.rhs.iter().copied())
    }

    /// Largest positive `a_i x - b_i`, or 0 when all rows hold.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        self.rows()
            .map(|(row, b)| dot(row, x) - b)
            .fold(0.0, f64::max)
    }

    pub fn is_satisfied(&self, x: &[f64], slack: f64) -> bool {
        self.max_violation(x) <= slack
    }
}

/// Value and gradient oracle of a non-decreasing DR-submodular function.
///
/// Implementations must be pure: the same `x` always gives the same answer,
/// and evaluation may happen from several threads at once.
pub trait Objective: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> f64;

    /// Writes the gradient at `x` into `grad` (length `dim`).
    fn gradient(&self, x: &[f64], grad: &mut [f64]);
}

/// Objective assembled from two closures.
pub struct FnObjective<V, G> {
    dim: usize,
    value: V,
    gradient: G,
}

impl<V, G> FnObjective<V, G>
where
    V: Fn(&[f64]) -> f64 + Send + Sync,
    G: Fn(&[f64], &mut [f64]) + Send + Sync,
{
    pub fn new(dim: usize, value: V, gradient: G) -> Self {
        FnObjective {
            dim,
            value,
            gradient,
        }
    }
}

impl<V, G> Objective for FnObjective<V, G>
where
    V: Fn(&[f64]) -> f64 + Send + Sync,
    G: Fn(&[f64], &mut [f64]) + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }

    fn gradient(&self, x: &[f64], grad: &mut [f64]) {
        (self.gradient)(x, grad)
    }
}

/// The grey-box problem `max F(x)` over `bounds ∩ {A x <= b}`.
#[derive(Clone)]
pub struct OracleProblem {
    objective: Arc<dyn Objective>,
    bounds: BoxBounds,
    constraints: LinearConstraints,
}

impl fmt::Debug for OracleProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OracleProblem")
            .field("dim", &self.dim())
            .field("bounds", &self.bounds)
            .field("constraints", &self.constraints)
            .finish()
    }
}

impl OracleProblem {
    pub fn new(
        objective: Arc<dyn Objective>,
        bounds: BoxBounds,
        constraints: LinearConstraints,
    ) -> Result<Self> {
        let n = objective.dim();
        if bounds.dim() != n {
            return Err(Error::domain(format!(
                "objective has dimension {n}, box has dimension {}",
                bounds.dim()
            )));
        }
        if constraints.matrix.iter().any(|row| row.len() != n) {
            return Err(Error::domain(format!(
                "constraint rows must have length {n}"
            )));
        }
        Ok(OracleProblem {
            objective,
            bounds,
            constraints,
        })
    }

    /// Convenience constructor from closures.
    pub fn from_fns<V, G>(
        dim: usize,
        value: V,
        gradient: G,
        bounds: BoxBounds,
        constraints: LinearConstraints,
    ) -> Result<Self>
    where
        V: Fn(&[f64]) -> f64 + Send + Sync + 'static,
        G: Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    {
        OracleProblem::new(
            Arc::new(FnObjective::new(dim, value, gradient)),
            bounds,
            constraints,
        )
    }

    pub fn dim(&self) -> usize {
        self.objective.dim()
    }

    pub fn bounds(&self) -> &BoxBounds {
        &self.bounds
    }

    pub fn constraints(&self) -> &LinearConstraints {
        &self.constraints
    }

    pub fn objective(&self) -> &Arc<dyn Objective> {
        &self.objective
    }

    /// Same objective and constraints over a different box.
    pub fn with_bounds(&self, bounds: BoxBounds) -> Result<Self> {
        OracleProblem::new(self.objective.clone(), bounds, self.constraints.clone())
    }

    /// `F(x)` after checking that `x` lies in the box.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        self.check_in_box(x)?;
        Ok(self.objective.value(x))
    }

    /// `∇F(x)` after checking that `x` lies in the box.
    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_in_box(x)?;
        Ok(self.gradient_unchecked(x))
    }

    pub(crate) fn value_unchecked(&self, x: &[f64]) -> f64 {
        self.objective.value(x)
    }

    pub(crate) fn gradient_unchecked(&self, x: &[f64]) -> Vec<f64> {
        let mut grad = vec![0.0; self.dim()];
        self.objective.gradient(x, &mut grad);
        grad
    }

    pub fn is_feasible(&self, x: &[f64], slack: f64) -> bool {
        self.bounds.contains(x, slack) && self.constraints.is_satisfied(x, slack)
    }

    pub(crate) fn check_in_box(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::domain(format!(
                "point has length {}, problem has dimension {}",
                x.len(),
                self.dim()
            )));
        }
        if !self.bounds.contains(x, tol::BOX) {
            return Err(Error::domain(format!("point {x:?} lies outside the box")));
        }
        Ok(())
    }
}

/// `F(x)` for `x` inside the problem box.
pub fn evaluate(problem: &OracleProblem, x: &[f64]) -> Result<f64> {
    problem.evaluate(x)
}

/// Outcome of a randomized DR-submodularity check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubmodularityReport {
    pub trials: usize,
    /// Largest `F(x ∨ y) + F(x ∧ y) - F(x) - F(y)` seen, floored at 0.
    pub lattice_violation: f64,
    /// Largest positive second difference along a coordinate axis.
    pub concavity_violation: f64,
    /// Largest negative gradient component seen, as a positive number.
    pub monotonicity_violation: f64,
    /// Lattice and concavity violations both within tolerance.
    pub passed: bool,
    /// Gradient non-negative within tolerance at every sample.
    pub monotone: bool,
}

/// Samples `trials` random pairs in the box and measures how far `F` is from
/// satisfying the lattice inequality and axis-wise concavity.
///
/// A failed report is a warning, not an error; solvers still accept the
/// problem but lose their guarantees.
pub fn check_submodular_sample(
    problem: &OracleProblem,
    trials: usize,
    rng_seed: u64,
) -> Result<SubmodularityReport> {
    if trials == 0 {
        return Err(Error::domain("trials must be at least 1"));
    }
    let n = problem.dim();
    let bounds = problem.bounds();
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut lattice: f64 = 0.0;
    let mut concavity: f64 = 0.0;
    let mut monotone: f64 = 0.0;

    for _ in 0..trials {
        let x = bounds.sample(&mut rng);
        let y = bounds.sample(&mut rng);
        let join: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a.max(*b)).collect();
        let meet: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a.min(*b)).collect();
        let excess = problem.value_unchecked(&join) + problem.value_unchecked(&meet)
            - problem.value_unchecked(&x)
            - problem.value_unchecked(&y);
        lattice = lattice.max(excess);

        // Second difference along each axis through x, endpoints from y.
        for i in 0..n {
            if bounds.width(i) <= 0.0 {
                continue;
            }
            let (a, c) = (x[i].min(y[i]), x[i].max(y[i]));
            let mut pa = x.clone();
            let mut pc = x.clone();
            let mut pm = x.clone();
            pa[i] = a;
            pc[i] = c;
            pm[i] = 0.5 * (a + c);
            let second = problem.value_unchecked(&pa) + problem.value_unchecked(&pc)
                - 2.0 * problem.value_unchecked(&pm);
            concavity = concavity.max(second);
        }

        let grad = problem.gradient_unchecked(&x);
        let most_negative = grad.iter().fold(0.0_f64, |acc, g| acc.max(-g));
        monotone = monotone.max(most_negative);
    }

    Ok(SubmodularityReport {
        trials,
        lattice_violation: lattice,
        concavity_violation: concavity,
        monotonicity_violation: monotone,
        passed: lattice <= tol::ORACLE_CHECK && concavity <= tol::ORACLE_CHECK,
        monotone: monotone <= tol::FEASIBILITY,
    })
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// `F(x) = x1 + x2 - x1 x2` on `[0,1]^2`, optionally with `x1 + x2 <= 1`.
    pub fn bilinear(with_budget: bool) -> OracleProblem {
        let constraints = if with_budget {
            LinearConstraints::budget(2, 1.0)
        } else {
            LinearConstraints::none()
        };
        OracleProblem::from_fns(
            2,
            |x| x[0] + x[1] - x[0] * x[1],
            |x, g| {
                g[0] = 1.0 - x[1];
                g[1] = 1.0 - x[0];
            },
            BoxBounds::unit(2),
            constraints,
        )
        .unwrap()
    }

    /// `F(x) = sqrt(x)` on `[lo, hi]`.
    pub fn sqrt_on(lo: f64, hi: f64) -> OracleProblem {
        OracleProblem::from_fns(
            1,
            |x| x[0].sqrt(),
            |x, g| g[0] = 0.5 / x[0].sqrt(),
            BoxBounds::new(vec![lo], vec![hi]).unwrap(),
            LinearConstraints::none(),
        )
        .unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn bilinear_values() {
        let p = bilinear(false);
        assert_eq!(evaluate(&p, &[0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(evaluate(&p, &[1.0, 1.0]).unwrap(), 1.0);
        assert_eq!(evaluate(&p, &[0.5, 0.5]).unwrap(), 0.75);
    }

    #[test]
    fn evaluate_rejects_out_of_box() {
        let p = bilinear(false);
        assert!(matches!(evaluate(&p, &[1.1, 0.0]), Err(Error::Domain(_))));
        assert!(matches!(evaluate(&p, &[0.0]), Err(Error::Domain(_))));
        // within the 1e-12 slack
        assert!(evaluate(&p, &[1.0 + 1e-13, 0.0]).is_ok());
    }

    #[test]
    fn projection() {
        let unit = BoxBounds::unit(2);
        assert_eq!(project_into_box(&[1.2, -0.1], &unit).unwrap(), vec![1.0, 0.0]);
        assert_eq!(project_into_box(&[0.5, 0.5], &unit).unwrap(), vec![0.5, 0.5]);
        let narrow = BoxBounds::new(vec![0.4], vec![0.6]).unwrap();
        assert_eq!(project_into_box(&[0.3], &narrow).unwrap(), vec![0.4]);
        assert!(matches!(
            project_into_box(&[0.3], &unit),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn box_validation() {
        assert!(BoxBounds::new(vec![0.0], vec![1.0, 2.0]).is_err());
        assert!(BoxBounds::new(vec![1.0], vec![0.0]).is_err());
        assert!(BoxBounds::new(vec![f64::NEG_INFINITY], vec![0.0]).is_err());
        assert!(BoxBounds::new(vec![0.2], vec![0.2]).unwrap().is_zero_volume());
    }

    #[test]
    fn constraint_validation() {
        assert!(LinearConstraints::new(vec![vec![1.0, 1.0]], vec![]).is_err());
        let c = LinearConstraints::budget(2, 1.0);
        assert!(c.is_satisfied(&[0.5, 0.5], 0.0));
        assert!((c.max_violation(&[1.0, 0.5]) - 0.5).abs() < 1e-15);
        let bad = OracleProblem::from_fns(
            2,
            |_| 0.0,
            |_, _| {},
            BoxBounds::unit(2),
            LinearConstraints::new(vec![vec![1.0]], vec![1.0]).unwrap(),
        );
        assert!(bad.is_err());
    }

    #[test]
    fn submodular_check_accepts_bilinear() {
        let report = check_submodular_sample(&bilinear(false), 1000, 7).unwrap();
        assert!(report.passed);
        assert!(report.monotone);
        assert!(report.lattice_violation <= 1e-12);
    }

    #[test]
    fn submodular_check_rejects_product() {
        let p = OracleProblem::from_fns(
            2,
            |x| x[0] * x[1],
            |x, g| {
                g[0] = x[1];
                g[1] = x[0];
            },
            BoxBounds::unit(2),
            LinearConstraints::none(),
        )
        .unwrap();
        let report = check_submodular_sample(&p, 1000, 7).unwrap();
        assert!(!report.passed);
        // x=(1,0), y=(0,1) gives the textbook witness
        assert!(p.evaluate(&[1.0, 0.0]).unwrap() + p.evaluate(&[0.0, 1.0]).unwrap() < 1.0);
    }

    #[test]
    fn submodular_check_accepts_sqrt() {
        let report = check_submodular_sample(&sqrt_on(0.0, 1.0), 1000, 3).unwrap();
        assert!(report.passed);
    }

    #[test]
    fn submodular_check_needs_trials() {
        assert!(check_submodular_sample(&sqrt_on(0.0, 1.0), 0, 3).is_err());
    }
}
