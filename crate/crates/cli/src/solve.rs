use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use drsub_core::cutplane::{
    approximate_cutting_plane, exact_cutting_plane, ApproxOptions, CutPlaneResult, CutTermination,
    ExactOptions, TraceRow,
};
use drsub_core::instance::Instance;
use drsub_core::sbb::{relative_gap, solve_with_progress, ProgressRow, SbbOptions, SbbTermination};
use drsub_core::verify::grid_maximize;

use crate::args::{SolveArgs, Solver};
use crate::record::{self, RunRecord};
use crate::CliError;

/// How a run ended, which decides the process exit code.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Converged,
    Limit,
    Infeasible,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Converged => 0,
            Outcome::Limit => 2,
            Outcome::Infeasible => 3,
        }
    }
}

struct Run {
    lb: f64,
    ub: f64,
    termination: &'static str,
    count: u64,
    outcome: Outcome,
}

pub fn run(args: &SolveArgs) -> Result<Outcome, CliError> {
    let instance = Instance::read(&args.instance).map_err(|e| CliError::Usage(e.to_string()))?;
    let problem = instance.build_problem()?;
    let start = Instant::now();
    let run = match args.solver {
        Solver::Sbb => run_sbb(&problem, args)?,
        Solver::ApproxCp => {
            let opts = ApproxOptions {
                stall_iters: args.stall,
                subproblem_gap: args.subgap,
                max_iters: args.max_iters.unwrap_or(ApproxOptions::default().max_iters),
            };
            let res = approximate_cutting_plane(&problem, problem.bounds(), &[], &opts)?;
            from_cutting_plane(res, args.trace.as_deref(), problem.dim())?
        }
        Solver::ExactCp => {
            let opts = ExactOptions {
                max_iters: args.max_iters,
                ..ExactOptions::default()
            };
            let res = exact_cutting_plane(&problem, problem.bounds(), args.epsilon, &opts)?;
            from_cutting_plane(res, args.trace.as_deref(), problem.dim())?
        }
        Solver::Grid => match grid_maximize(&problem, args.grid_step) {
            Ok(g) => Run {
                lb: g.best_value,
                ub: g.best_value + g.lipschitz_slack,
                termination: "exhaustive",
                count: g.points_evaluated,
                outcome: Outcome::Converged,
            },
            Err(drsub_core::Error::Infeasible(_)) => Run {
                lb: f64::NEG_INFINITY,
                ub: f64::NEG_INFINITY,
                termination: "infeasible",
                count: 0,
                outcome: Outcome::Infeasible,
            },
            Err(e) => return Err(e.into()),
        },
    };
    let runtime_s = start.elapsed().as_secs_f64();

    let record = RunRecord {
        instance: args
            .instance
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default(),
        solver: args.solver.name().into(),
        n: instance.n,
        budget: instance.budget,
        seed: instance.seed,
        runtime_s,
        lb: run.lb,
        ub: run.ub,
        rel_gap: if run.outcome == Outcome::Infeasible {
            0.0
        } else {
            relative_gap(run.lb, run.ub)
        },
        termination: run.termination.into(),
        nodes_or_iters: run.count,
    };
    record::append(&args.results, &record)?;
    println!(
        "{} {}: lb={} ub={} gap={:.4}% termination={} {}={} time={:.3}s",
        record.instance,
        record.solver,
        record.lb,
        record.ub,
        100.0 * record.rel_gap,
        record.termination,
        if args.solver == Solver::Sbb { "nodes" } else if args.solver == Solver::Grid { "points" } else { "iters" },
        record.nodes_or_iters,
        record.runtime_s
    );
    Ok(run.outcome)
}

fn run_sbb(problem: &drsub_core::OracleProblem, args: &SolveArgs) -> Result<Run, CliError> {
    let opts = SbbOptions {
        rel_gap: args.rel_gap,
        time_limit: (args.time_limit > 0.0).then_some(args.time_limit),
        node_limit: args.node_limit,
        stall_iters: args.stall,
        subproblem_gap: args.subgap,
        max_cut_iters: args.max_iters.unwrap_or(SbbOptions::default().max_cut_iters),
        workers: args.workers,
    };
    let mut trace = match &args.trace {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            writeln!(w, "{}", ProgressRow::CSV_HEADER)?;
            Some(w)
        }
        None => None,
    };
    let mut io_error = None;
    let res = solve_with_progress(problem, &opts, |row| {
        if let Some(w) = trace.as_mut() {
            if let Err(e) = writeln!(w, "{}", row.to_csv()) {
                io_error.get_or_insert(e);
            }
        }
    })?;
    if let Some(e) = io_error {
        return Err(e.into());
    }
    if let Some(mut w) = trace {
        w.flush()?;
    }
    Ok(Run {
        lb: res.best_lb,
        ub: res.best_ub,
        termination: res.termination.as_str(),
        count: res.nodes_explored as u64,
        outcome: match res.termination {
            SbbTermination::Gap => Outcome::Converged,
            SbbTermination::TimeLimit | SbbTermination::NodeLimit => Outcome::Limit,
            SbbTermination::Infeasible => Outcome::Infeasible,
        },
    })
}

fn from_cutting_plane(res: CutPlaneResult, trace: Option<&Path>, dim: usize) -> Result<Run, CliError> {
    if let Some(path) = trace {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "{}", TraceRow::csv_header(dim))?;
        for row in &res.trace {
            writeln!(w, "{}", row.to_csv())?;
        }
        w.flush()?;
    }
    let outcome = match res.termination {
        CutTermination::RelGap | CutTermination::AbsGap | CutTermination::DuplicateCut => Outcome::Converged,
        CutTermination::Stall | CutTermination::IterLimit => Outcome::Limit,
        CutTermination::Infeasible => Outcome::Infeasible,
    };
    Ok(Run {
        lb: res.lower_bound,
        ub: res.upper_bound,
        termination: res.termination.as_str(),
        count: res.iterations as u64,
        outcome,
    })
}
