//! Benchmark families with closed-form oracles and seeded generators.
//!
//! * [`quadratic`]: `F(x) = hᵀx + ½ xᵀHx` with non-positive `H`.
//! * [`covering`]: maximum covering facility defense, uncapacitated (product
//!   form) or capacitated (assignment LP inside a multilinear extension).
//! * [`influence`]: influence maximization over sampled live-arc graphs.
//!
//! Every generator draws from a `ChaCha8Rng` seeded with the caller's seed, so
//! a seed pins the instance bytes.

pub mod covering;
pub mod gme;
pub mod influence;
pub mod quadratic;

use serde::{Deserialize, Serialize};

pub use covering::{gen_covering, solve_assignment, CoveringInstance};
pub use influence::{gen_influence, InfluenceInstance};
pub use quadratic::{gen_quadratic, QuadraticInstance};

/// Probability that element `i` is available given `x_i` resources.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GKind {
    /// `g(x) = x`
    Identity,
    /// `g(x) = x / (x + a)`
    Contest,
}

impl GKind {
    /// `(g(x), g'(x))` for contest parameter `a` (ignored by `Identity`).
    pub fn eval(self, x: f64, a: f64) -> (f64, f64) {
        match self {
            GKind::Identity => (x, 1.0),
            GKind::Contest => {
                let d = x + a;
                (x / d, a / (d * d))
            }
        }
    }
}

impl std::str::FromStr for GKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "identity" => Ok(GKind::Identity),
            "contest" => Ok(GKind::Contest),
            other => Err(format!("unknown g kind `{other}` (identity|contest)")),
        }
    }
}

/// Availability levels and slopes for every coordinate.
pub(crate) fn availabilities(kind: GKind, a: &[f64], x: &[f64]) -> (Vec<f64>, Vec<f64>) {
    x.iter().zip(a).map(|(&xi, &ai)| kind.eval(xi, ai)).unzip()
}
