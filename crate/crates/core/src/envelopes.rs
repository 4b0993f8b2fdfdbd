//! Gradient-based first-order overestimators and their concave envelopes.
//!
//! For a support point `s` the piecewise-linear overestimator is
//! `F(s) + ∇F(s)ᵀ[x - s]⁺`. Replacing each ReLU term by its triangle envelope
//! on `[l, u]` gives the affine cut `F(s) + (∇F(s) ⊙ (u - s)/(u - l))ᵀ(x - l)`,
//! which is what the LP-based cutting plane consumes.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{BoxBounds, OracleProblem};
use crate::tol;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CutKind {
    /// Non-concave ReLU overestimator, modelled with binaries.
    ExactRelu,
    /// Affine concave envelope of the ReLU overestimator.
    Envelope,
}

/// An overestimator of `F` derived at `support` on `bounds`.
///
/// For envelope cuts the value at `x` is `intercept + coeffsᵀx`, which equals
/// `f_at_support + coeffsᵀ(x - lower)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Cut {
    pub support: Vec<f64>,
    pub f_at_support: f64,
    /// Gradient with negative components clamped to zero.
    pub grad_at_support: Vec<f64>,
    pub coeffs: Vec<f64>,
    pub intercept: f64,
    pub bounds: BoxBounds,
    pub kind: CutKind,
}

impl Cut {
    /// Value of the cut at `x`.
    pub fn value(&self, x: &[f64]) -> f64 {
        match self.kind {
            CutKind::Envelope => {
                self.f_at_support
                    + self
                        .coeffs
                        .iter()
                        .zip(x.iter().zip(self.bounds.lower()))
                        .map(|(c, (xi, lo))| c * (xi - lo))
                        .sum::<f64>()
            }
            CutKind::ExactRelu => relu_overestimate(self.f_at_support, &self.grad_at_support, &self.support, x),
        }
    }
}

fn relu_overestimate(f: f64, grad: &[f64], support: &[f64], x: &[f64]) -> f64 {
    f + grad
        .iter()
        .zip(x.iter().zip(support))
        .map(|(g, (xi, si))| {
            let step = (xi - si).max(0.0);
            // avoids inf * 0 when the gradient blows up at the support
            if step > 0.0 {
                g * step
            } else {
                0.0
            }
        })
        .sum::<f64>()
}

fn clamped_gradient(problem: &OracleProblem, x: &[f64]) -> Vec<f64> {
    let mut grad = problem.gradient_unchecked(x);
    for g in grad.iter_mut() {
        if g.is_nan() || *g < 0.0 {
            *g = 0.0;
        }
    }
    grad
}

fn check_support(problem: &OracleProblem, support: &[f64], bounds: &BoxBounds) -> Result<()> {
    if bounds.dim() != problem.dim() {
        return Err(Error::domain(format!(
            "box has dimension {}, problem has dimension {}",
            bounds.dim(),
            problem.dim()
        )));
    }
    if !bounds.contains(support, tol::BOX) {
        return Err(Error::domain(format!("support {support:?} lies outside the box")));
    }
    Ok(())
}

/// `F(s) + ∇F(s)ᵀ[x - s]⁺`.
pub fn overestimator_value(problem: &OracleProblem, x: &[f64], support: &[f64]) -> Result<f64> {
    problem.check_in_box(x)?;
    problem.check_in_box(support)?;
    let f = problem.value_unchecked(support);
    let grad = clamped_gradient(problem, support);
    Ok(relu_overestimate(f, &grad, support, x))
}

/// Builds an envelope cut from precomputed oracle output.
pub fn envelope_from_oracle(support: &[f64], f: f64, grad: &[f64], bounds: &BoxBounds) -> Cut {
    let grad: Vec<f64> = grad
        .iter()
        .map(|&g| if g.is_nan() || g < 0.0 { 0.0 } else { g })
        .collect();
    let coeffs: Vec<f64> = (0..support.len())
        .map(|i| {
            let width = bounds.width(i);
            let room = bounds.upper()[i] - support[i];
            // zero width or support at the upper end: the ReLU term is constant zero
            if width <= 0.0 || room <= 0.0 {
                0.0
            } else {
                grad[i] * (room / width)
            }
        })
        .collect();
    let intercept = f - coeffs
        .iter()
        .zip(bounds.lower())
        .map(|(c, lo)| c * lo)
        .sum::<f64>();
    Cut {
        support: support.to_vec(),
        f_at_support: f,
        grad_at_support: grad,
        coeffs,
        intercept,
        bounds: bounds.clone(),
        kind: CutKind::Envelope,
    }
}

/// Concave envelope over `bounds` of the overestimator supported at `support`.
pub fn envelope_cut(problem: &OracleProblem, support: &[f64], bounds: &BoxBounds) -> Result<Cut> {
    check_support(problem, support, bounds)?;
    let f = problem.value_unchecked(support);
    let grad = problem.gradient_unchecked(support);
    Ok(envelope_from_oracle(support, f, &grad, bounds))
}

/// Non-concave ReLU overestimator record, as used by the exact method.
pub fn relu_cut(problem: &OracleProblem, support: &[f64], bounds: &BoxBounds) -> Result<Cut> {
    check_support(problem, support, bounds)?;
    let f = problem.value_unchecked(support);
    let grad = clamped_gradient(problem, support);
    Ok(Cut {
        support: support.to_vec(),
        f_at_support: f,
        grad_at_support: grad,
        coeffs: Vec::new(),
        intercept: f,
        bounds: bounds.clone(),
        kind: CutKind::ExactRelu,
    })
}

/// Largest gap between the envelope and the overestimator for one support;
/// the maximum is attained at `x = support`.
pub fn single_cut_error_bound(
    problem: &OracleProblem,
    support: &[f64],
    bounds: &BoxBounds,
) -> Result<f64> {
    check_support(problem, support, bounds)?;
    let grad = clamped_gradient(problem, support);
    Ok((0..support.len())
        .map(|i| {
            let width = bounds.width(i);
            let above = support[i] - bounds.lower()[i];
            let below = bounds.upper()[i] - support[i];
            if width <= 0.0 || above <= 0.0 || below <= 0.0 {
                0.0
            } else {
                grad[i] * (below / width) * above
            }
        })
        .sum())
}

/// `∇F(s)ᵀ(u - l)`, which dominates [`single_cut_error_bound`] and vanishes
/// linearly with the box diameter.
pub fn coarse_error_bound(
    problem: &OracleProblem,
    support: &[f64],
    bounds: &BoxBounds,
) -> Result<f64> {
    check_support(problem, support, bounds)?;
    let grad = clamped_gradient(problem, support);
    Ok((0..support.len())
        .map(|i| {
            let width = bounds.width(i);
            if width <= 0.0 {
                0.0
            } else {
                grad[i] * width
            }
        })
        .sum())
}
