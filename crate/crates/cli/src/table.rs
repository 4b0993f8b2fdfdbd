//! Per-(solver, n, budget) summaries of a results file.
//!
//! Solved runs contribute to the mean runtime; runs stopped by a limit
//! contribute to the mean gap instead, so a mixed cell reports both.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::record::RunRecord;
use crate::CliError;

#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    pub solver: String,
    pub n: usize,
    pub budget: f64,
    pub runs: usize,
    pub solved: usize,
    pub mean_runtime_s: Option<f64>,
    pub limited: usize,
    /// Mean relative gap over limited runs, in percent.
    pub mean_gap_pct: Option<f64>,
}

fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

pub fn aggregate(records: &[RunRecord]) -> Result<Vec<Cell>, CliError> {
    if records.is_empty() {
        return Err(CliError::Usage("results file has no records".into()));
    }
    let mut groups: BTreeMap<(String, usize, u64), Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        // budgets are non-negative, so the bit pattern sorts like the value
        let key = (r.solver.clone(), r.n, r.budget.abs().to_bits());
        groups.entry(key).or_default().push(r);
    }
    Ok(groups
        .into_values()
        .map(|rs| {
            let solved: Vec<f64> = rs.iter().filter(|r| r.is_solved()).map(|r| r.runtime_s).collect();
            let gaps: Vec<f64> = rs.iter().filter(|r| r.is_limited()).map(|r| 100.0 * r.rel_gap).collect();
            Cell {
                solver: rs[0].solver.clone(),
                n: rs[0].n,
                budget: rs[0].budget,
                runs: rs.len(),
                solved: solved.len(),
                mean_runtime_s: mean(&solved),
                limited: gaps.len(),
                mean_gap_pct: mean(&gaps),
            }
        })
        .collect())
}

pub fn render(cells: &[Cell]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<10} {:>4} {:>8} {:>5} {:>7} {:>12} {:>8} {:>9}",
        "solver", "n", "budget", "runs", "solved", "runtime_s", "limited", "gap"
    );
    let dash = |v: Option<f64>, f: &dyn Fn(f64) -> String| v.map(f).unwrap_or_else(|| "-".into());
    for c in cells {
        let _ = writeln!(
            out,
            "{:<10} {:>4} {:>8} {:>5} {:>7} {:>12} {:>8} {:>9}",
            c.solver,
            c.n,
            c.budget,
            c.runs,
            c.solved,
            dash(c.mean_runtime_s, &|v| format!("{v:.2}")),
            c.limited,
            dash(c.mean_gap_pct, &|v| format!("{v:.1}%")),
        );
    }
    out
}
