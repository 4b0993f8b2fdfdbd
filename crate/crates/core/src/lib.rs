//! Grey-box global maximization of continuous, non-decreasing, DR-submodular
//! functions over a box intersected with linear constraints.
//!
//! The solver only needs value and gradient oracles. Upper bounds come from
//! concave envelopes of gradient-based first-order overestimators, which are
//! accumulated as cutting planes over a linear program and refined by spatial
//! branch-and-bound.
//!
//! Module map:
//!
//! * [`model`]: the oracle contract, box and linear-constraint geometry.
//! * [`envelopes`]: first-order overestimators, envelope cuts, error bounds.
//! * [`lp`]: dense bounded-variable primal simplex.
//! * [`cutplane`]: approximate (LP) and exact (big-M MILP) cutting planes.
//! * [`sbb`]: spatial branch-and-bound over sub-rectangles.
//! * [`problems`]: the benchmark families and their seeded generators.
//! * [`instance`]: serializable instance files.
//! * [`verify`]: brute-force oracles used to check solver output.

mod clock;
pub mod cutplane;
pub mod envelopes;
pub mod error;
pub mod instance;
pub mod lp;
pub mod model;
pub mod problems;
pub mod sbb;
pub mod tol;
pub mod verify;

pub use error::{Error, Result};
pub use model::{BoxBounds, LinearConstraints, Objective, OracleProblem};
