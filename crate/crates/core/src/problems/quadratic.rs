use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{dot, BoxBounds, LinearConstraints, Objective, OracleProblem};

/// `max hᵀx + ½ xᵀHx  s.t.  A x <= b, x ∈ [0, 1]ⁿ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct QuadraticInstance {
    pub H: Vec<Vec<f64>>,
    pub h: Vec<f64>,
    pub A: Vec<Vec<f64>>,
    pub b: Vec<f64>,
}

impl QuadraticInstance {
    /// Builds an instance from `H` with `h = -Hᵀ1` and no linear rows.
    pub fn from_hessian(hessian: Vec<Vec<f64>>) -> Result<Self> {
        let n = hessian.len();
        let h = (0..n).map(|j| -hessian.iter().map(|row| row[j]).sum::<f64>()).collect();
        let inst = QuadraticInstance {
            H: hessian,
            h,
            A: Vec::new(),
            b: Vec::new(),
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn dim(&self) -> usize {
        self.h.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.dim();
        let bad = |msg: String| Err(Error::Instance(msg));
        if n == 0 {
            return bad("quadratic instance has no variables".into());
        }
        if self.H.len() != n || self.H.iter().any(|r| r.len() != n) {
            return bad(format!("H must be {n}x{n}"));
        }
        if self.A.len() != self.b.len() || self.A.iter().any(|r| r.len() != n) {
            return bad(format!("A must have {n} columns and one row per entry of b"));
        }
        let all = self.H.iter().flatten().chain(&self.h).chain(self.A.iter().flatten()).chain(&self.b);
        if all.into_iter().any(|v| !v.is_finite()) {
            return bad("quadratic data must be finite".into());
        }
        for i in 0..n {
            for j in 0..n {
                if self.H[i][j] != self.H[j][i] {
                    return bad(format!("H is not symmetric at ({i}, {j})"));
                }
                if self.H[i][j] > 0.0 {
                    return bad(format!("H[{i}][{j}] is positive; F would not be submodular"));
                }
            }
        }
        Ok(())
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let quad: f64 = self.H.iter().zip(x).map(|(row, xi)| xi * dot(row, x)).sum();
        dot(&self.h, x) + 0.5 * quad
    }

    pub fn gradient(&self, x: &[f64], grad: &mut [f64]) {
        for ((g, row), hi) in grad.iter_mut().zip(&self.H).zip(&self.h) {
            *g = hi + dot(row, x);
        }
    }

    pub fn to_problem(&self) -> Result<OracleProblem> {
        self.validate()?;
        let n = self.dim();
        let constraints = if self.A.is_empty() {
            LinearConstraints::none()
        } else {
            LinearConstraints::new(self.A.clone(), self.b.clone())?
        };
        OracleProblem::new(Arc::new(self.clone()), BoxBounds::unit(n), constraints)
    }
}

impl Objective for QuadraticInstance {
    fn dim(&self) -> usize {
        self.h.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        QuadraticInstance::value(self, x)
    }

    fn gradient(&self, x: &[f64], grad: &mut [f64]) {
        QuadraticInstance::gradient(self, x, grad)
    }
}

/// Random instance: `H` uniform on `[-1, 0]` (upper triangle drawn, then
/// mirrored), `A` uniform on `[0, 1]`, `b = 1`, `h = -Hᵀ1`.
pub fn gen_quadratic(n: usize, m: usize, seed: u64) -> Result<QuadraticInstance> {
    if n == 0 || m == 0 {
        return Err(Error::domain("quadratic generator needs n >= 1 and m >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hessian = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            let v = -rng.gen::<f64>();
            hessian[i][j] = v;
            hessian[j][i] = v;
        }
    }
    let a = (0..m).map(|_| (0..n).map(|_| rng.gen::<f64>()).collect()).collect();
    let mut inst = QuadraticInstance::from_hessian(hessian)?;
    inst.A = a;
    inst.b = vec![1.0; m];
    inst.validate()?;
    Ok(inst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::check_submodular_sample;

    #[test]
    fn bilinear_example() {
        let q = QuadraticInstance::from_hessian(vec![vec![0.0, -1.0], vec![-1.0, 0.0]]).unwrap();
        assert_eq!(q.h, vec![1.0, 1.0]);
        for x in [[0.0, 0.0], [1.0, 1.0], [0.5, 0.5], [0.3, 0.9]] {
            assert!((q.value(&x) - (x[0] + x[1] - x[0] * x[1])).abs() < 1e-15);
        }
    }

    #[test]
    fn gradient_vanishes_at_upper_corner() {
        for seed in 0..20 {
            let q = gen_quadratic(6, 3, seed).unwrap();
            let mut g = vec![0.0; 6];
            q.gradient(&[1.0; 6], &mut g);
            assert!(g.iter().all(|v| v.abs() < 1e-12));
            q.gradient(&[0.0; 6], &mut g);
            assert_eq!(g, q.h);
            assert!(g.iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn generated_shape() {
        let q = gen_quadratic(4, 3, 7).unwrap();
        assert_eq!(q.A.len(), 3);
        assert!(q.A.iter().flatten().all(|&v| (0.0..=1.0).contains(&v)));
        assert!(q.H.iter().flatten().all(|&v| (-1.0..=0.0).contains(&v)));
        assert_eq!(q.b, vec![1.0; 3]);
        assert_eq!(q, gen_quadratic(4, 3, 7).unwrap());
        assert_ne!(q, gen_quadratic(4, 3, 8).unwrap());
    }

    #[test]
    fn generated_is_dr_submodular() {
        let p = gen_quadratic(5, 5, 1).unwrap().to_problem().unwrap();
        let report = check_submodular_sample(&p, 2000, 3).unwrap();
        assert!(report.passed && report.monotone, "{report:?}");
    }

    #[test]
    fn rejects_bad_hessian() {
        assert!(QuadraticInstance::from_hessian(vec![vec![0.0, 0.5], vec![0.5, 0.0]]).is_err());
        assert!(QuadraticInstance::from_hessian(vec![vec![0.0, -0.5], vec![-0.4, 0.0]]).is_err());
    }
}
