use std::fs::OpenOptions;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::CliError;

pub const HEADER: &str = "instance,solver,n,budget,seed,runtime_s,lb,ub,rel_gap,termination,nodes_or_iters";

/// One solver run, as stored in the results CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub instance: String,
    pub solver: String,
    pub n: usize,
    pub budget: f64,
    pub seed: u64,
    pub runtime_s: f64,
    pub lb: f64,
    pub ub: f64,
    pub rel_gap: f64,
    pub termination: String,
    pub nodes_or_iters: u64,
}

impl RunRecord {
    /// Runs whose bounds are final rather than cut short by a limit.
    pub fn is_solved(&self) -> bool {
        matches!(
            self.termination.as_str(),
            "gap" | "rel_gap" | "abs_gap" | "duplicate_cut" | "exhaustive"
        )
    }

    pub fn is_limited(&self) -> bool {
        matches!(
            self.termination.as_str(),
            "time_limit" | "node_limit" | "stall" | "iter_limit"
        )
    }
}

/// Appends `record`, writing the header first when the file is new or empty.
pub fn append(path: &Path, record: &RunRecord) -> Result<(), CliError> {
    let fresh = std::fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let file = OpenOptions::new().create(true).append(true).open(path)?;
    let mut writer = csv::WriterBuilder::new().has_headers(fresh).from_writer(file);
    writer.serialize(record)?;
    writer.flush()?;
    Ok(())
}

pub fn read_all(path: &Path) -> Result<Vec<RunRecord>, CliError> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let header = reader.headers()?.iter().collect::<Vec<_>>().join(",");
    if header != HEADER {
        return Err(CliError::Usage(format!(
            "{} does not have the results header `{HEADER}`",
            path.display()
        )));
    }
    Ok(reader.deserialize().collect::<Result<_, _>>()?)
}

#[cfg(test)]
pub(crate) use tests::record;

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn record(solver: &str, n: usize, budget: f64, runtime: f64, gap: f64, term: &str) -> RunRecord {
        RunRecord {
            instance: "x".into(),
            solver: solver.into(),
            n,
            budget,
            seed: 1,
            runtime_s: runtime,
            lb: 1.0,
            ub: 1.0 + gap,
            rel_gap: gap,
            termination: term.into(),
            nodes_or_iters: 3,
        }
    }

    #[test]
    fn header_is_written_once() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        append(&path, &record("sbb", 2, 1.0, 0.5, 0.01, "gap")).unwrap();
        append(&path, &record("grid", 2, 1.0, 0.25, 0.0, "exhaustive")).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().next().unwrap(), HEADER);
        assert_eq!(text.lines().count(), 3);
        let back = read_all(&path).unwrap();
        assert_eq!(back[1], record("grid", 2, 1.0, 0.25, 0.0, "exhaustive"));
    }

    #[test]
    fn infinite_bounds_survive() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        let mut r = record("sbb", 2, 1.0, 0.5, 0.0, "infeasible");
        r.lb = f64::NEG_INFINITY;
        r.ub = f64::NEG_INFINITY;
        append(&path, &r).unwrap();
        assert_eq!(read_all(&path).unwrap()[0], r);
    }
}

