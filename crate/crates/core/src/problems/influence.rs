//! Continuous influence maximization over live-arc realizations.
//!
//! Each scenario keeps every arc independently with probability `p_live`,
//! drawn from its own seed when the instance is built. Seeding node set `S`
//! influences `|∪_{i∈S} N_i|` nodes, where `N_i` is the set reachable from `i`
//! in the live graph; the objective sums the expectation over scenarios.

use std::collections::VecDeque;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::covering::GmeObjective;
use super::gme::{SetTable, MAX_ELEMENTS};
use super::GKind;
use crate::error::{Error, Result};
use crate::model::{BoxBounds, LinearConstraints, OracleProblem};

pub const DEFAULT_P_LIVE: f64 = 0.1;
pub const DEFAULT_SCENARIOS: usize = 5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InfluenceInstance {
    pub nodes: usize,
    pub arcs: Vec<[usize; 2]>,
    pub p_live: f64,
    pub scenario_seeds: Vec<u64>,
    pub g_kind: GKind,
    pub budget: f64,
    pub a: Vec<f64>,
}

impl InfluenceInstance {
    pub fn dim(&self) -> usize {
        self.nodes
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.nodes;
        let bad = |msg: String| Err(Error::Instance(msg));
        if n == 0 {
            return bad("influence instance has no nodes".into());
        }
        if n > MAX_ELEMENTS {
            return Err(Error::Refused(format!(
                "influence maximization over {n} nodes exceeds the guard of {MAX_ELEMENTS}"
            )));
        }
        if self.arcs.iter().any(|&[s, t]| s >= n || t >= n || s == t) {
            return bad("arcs must join two distinct existing nodes".into());
        }
        if !(0.0..=1.0).contains(&self.p_live) {
            return bad("p_live must lie in [0, 1]".into());
        }
        if self.a.len() != n || self.a.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            return bad(format!("a must have {n} positive entries"));
        }
        if !self.budget.is_finite() {
            return bad("budget must be finite".into());
        }
        Ok(())
    }

    /// Live arcs of the scenario drawn from `seed`.
    pub fn live_arcs(&self, seed: u64) -> Vec<[usize; 2]> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.arcs
            .iter()
            .copied()
            .filter(|_| rng.gen::<f64>() < self.p_live)
            .collect()
    }

    /// Reach sets `N_{iω}` as bitmasks, one vector per scenario.
    pub fn reach_sets(&self) -> Vec<Vec<u32>> {
        self.scenario_seeds
            .iter()
            .map(|&seed| reachability(self.nodes, &self.live_arcs(seed)))
            .collect()
    }

    /// `Σ_ω f_ω(S)` for every subset `S`.
    pub fn spread_table(&self) -> Result<SetTable> {
        self.validate()?;
        let reach = self.reach_sets();
        let n = self.nodes;
        let mut unions = vec![vec![0u32; 1 << n]; reach.len()];
        for (w, r) in reach.iter().enumerate() {
            for mask in 1usize..1 << n {
                let low = mask.trailing_zeros() as usize;
                unions[w][mask] = unions[w][mask & (mask - 1)] | r[low];
            }
        }
        SetTable::from_fn(n, |mask| unions.iter().map(|u| f64::from(u[mask].count_ones())).sum())
    }

    pub fn to_problem(&self) -> Result<OracleProblem> {
        let table = self.spread_table()?;
        let n = self.nodes;
        OracleProblem::new(
            Arc::new(GmeObjective::new(table, self.a.clone(), self.g_kind)),
            BoxBounds::unit(n),
            LinearConstraints::budget(n, self.budget),
        )
    }
}

fn reachability(n: usize, arcs: &[[usize; 2]]) -> Vec<u32> {
    let mut adjacency = vec![Vec::new(); n];
    for &[s, t] in arcs {
        adjacency[s].push(t);
    }
    (0..n)
        .map(|start| {
            let mut seen = 1u32 << start;
            let mut queue = VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                for &w in &adjacency[v] {
                    if seen >> w & 1 == 0 {
                        seen |= 1 << w;
                        queue.push_back(w);
                    }
                }
            }
            seen
        })
        .collect()
}

/// Random directed graph with `min(2|N| + 1, |N|(|N| - 1))` distinct arcs,
/// five scenario seeds, `p_live = 0.1` and `a_i = b / |N|`.
pub fn gen_influence(nodes: usize, budget: f64, g_kind: GKind, seed: u64) -> Result<InfluenceInstance> {
    if nodes == 0 {
        return Err(Error::domain("influence generator needs at least one node"));
    }
    if !(budget > 0.0 && budget.is_finite()) {
        return Err(Error::domain("budget must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs: Vec<[usize; 2]> = (0..nodes)
        .flat_map(|s| (0..nodes).filter(move |&t| t != s).map(move |t| [s, t]))
        .collect();
    pairs.shuffle(&mut rng);
    pairs.truncate((2 * nodes + 1).min(nodes * (nodes - 1)));
    pairs.sort_unstable();
    let scenario_seeds = (0..DEFAULT_SCENARIOS).map(|_| rng.gen()).collect();
    let inst = InfluenceInstance {
        nodes,
        arcs: pairs,
        p_live: DEFAULT_P_LIVE,
        scenario_seeds,
        g_kind,
        budget,
        a: vec![budget / nodes as f64; nodes],
    };
    inst.validate()?;
    Ok(inst)
}
