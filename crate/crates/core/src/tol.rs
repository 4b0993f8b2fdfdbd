//! Numerical tolerances shared across the crate.

/// Feasibility slack for box membership and cut validity checks.
pub const FEASIBILITY: f64 = 1e-9;

/// Slack allowed when sampling the lattice and concavity inequalities.
pub const ORACLE_CHECK: f64 = 1e-7;

/// Central finite-difference step used by gradient checks.
pub const FD_STEP: f64 = 1e-5;

/// Box membership slack for oracle evaluation.
pub const BOX: f64 = 1e-12;

/// Row residual accepted from the LP solver.
pub const LP_ROW: f64 = 1e-7;

/// Two supports closer than this (per component) are the same cut.
pub const DUPLICATE_SUPPORT: f64 = 1e-9;

/// Gradient components above this are treated as unbounded.
pub const GRADIENT_CAP: f64 = 1e8;

/// Relative decrease of the cutting-plane upper bound that counts as an
/// improvement for the stall rule; smaller moves are LP round-off.
pub const STALL_IMPROVEMENT: f64 = 1e-6;
