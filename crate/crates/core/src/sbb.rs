//! Spatial branch-and-bound over sub-rectangles of the problem box.
//!
//! Every node is bounded by the approximate cutting plane, seeded with the
//! cuts of all its ancestors (still valid on the smaller box). The open node
//! with the largest upper bound is split along its longest edge. `BestUB` is
//! the largest bound among open nodes (or `BestLB` once none remain), so it
//! stays a valid global upper bound throughout.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::clock::Stopwatch;
use crate::cutplane::{approximate_cutting_plane, ApproxOptions, CutPlaneResult};
use crate::envelopes::Cut;
use crate::error::{Error, Result};
use crate::model::{BoxBounds, OracleProblem};

/// Relative slack used when pruning against the incumbent.
const PRUNE_SLACK: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct SbbOptions {
    pub rel_gap: f64,
    /// Wall-clock limit in seconds.
    pub time_limit: Option<f64>,
    pub node_limit: Option<usize>,
    pub stall_iters: usize,
    pub subproblem_gap: f64,
    pub max_cut_iters: usize,
    /// Nodes bounded concurrently; 1 keeps the run reproducible.
    pub workers: usize,
}

impl Default for SbbOptions {
    fn default() -> Self {
        SbbOptions {
            rel_gap: 0.05,
            time_limit: Some(3600.0),
            node_limit: None,
            stall_iters: 5,
            subproblem_gap: 0.001,
            max_cut_iters: 500,
            workers: 1,
        }
    }
}

impl SbbOptions {
    fn approx(&self) -> ApproxOptions {
        ApproxOptions {
            stall_iters: self.stall_iters,
            subproblem_gap: self.subproblem_gap,
            max_iters: self.max_cut_iters,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SbbTermination {
    Gap,
    TimeLimit,
    NodeLimit,
    Infeasible,
}

impl SbbTermination {
    pub fn as_str(&self) -> &'static str {
        match self {
            SbbTermination::Gap => "gap",
            SbbTermination::TimeLimit => "time_limit",
            SbbTermination::NodeLimit => "node_limit",
            SbbTermination::Infeasible => "infeasible",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Node {
    pub id: u64,
    pub parent_id: Option<u64>,
    pub bounds: BoxBounds,
    /// Cuts of all ancestors.
    pub inherited_cuts: Arc<Vec<Cut>>,
    /// Cuts generated while bounding this node.
    pub local_cuts: Vec<Cut>,
    pub local_lb: f64,
    pub local_ub: f64,
    pub depth: usize,
    pub incumbent: Vec<f64>,
}

impl Node {
    fn root(bounds: BoxBounds) -> Self {
        Node {
            id: 0,
            parent_id: None,
            bounds,
            inherited_cuts: Arc::new(Vec::new()),
            local_cuts: Vec::new(),
            local_lb: f64::NEG_INFINITY,
            local_ub: f64::INFINITY,
            depth: 0,
            incumbent: Vec::new(),
        }
    }

    fn absorb(&mut self, res: CutPlaneResult) {
        self.local_lb = res.lower_bound;
        self.local_ub = res.upper_bound;
        self.incumbent = res.incumbent;
        self.local_cuts = res.cuts;
    }
}

/// Splits the longest edge (lowest index on ties) at its midpoint. Children
/// get ids `first_id` and `first_id + 1` and inherit every cut of `node`.
pub fn partition(node: &Node, first_id: u64) -> Result<(Node, Node)> {
    let b = &node.bounds;
    let (dim, width) = (0..b.dim())
        .map(|i| (i, b.width(i)))
        .fold((0, 0.0), |best, cur| if cur.1 > best.1 { cur } else { best });
    if !(width > 0.0) {
        return Err(Error::CannotPartition);
    }
    let (lo, hi) = (b.lower()[dim], b.upper()[dim]);
    let mid = 0.5 * (lo + hi);
    let mut cuts = Vec::with_capacity(node.inherited_cuts.len() + node.local_cuts.len());
    cuts.extend(node.inherited_cuts.iter().cloned());
    cuts.extend(node.local_cuts.iter().cloned());
    let cuts = Arc::new(cuts);
    let child = |id, bounds| Node {
        id,
        parent_id: Some(node.id),
        bounds,
        inherited_cuts: Arc::clone(&cuts),
        local_cuts: Vec::new(),
        local_lb: f64::NEG_INFINITY,
        local_ub: node.local_ub,
        depth: node.depth + 1,
        incumbent: Vec::new(),
    };
    Ok((
        child(first_id, b.with_interval(dim, lo, mid)?),
        child(first_id + 1, b.with_interval(dim, mid, hi)?),
    ))
}

/// One bounded node, as written to the progress log.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProgressRow {
    pub node_id: u64,
    pub depth: usize,
    pub parent_id: Option<u64>,
    pub node_ub: f64,
    pub node_lb: f64,
    pub best_lb: f64,
    pub best_ub: f64,
    pub open_nodes: usize,
    pub elapsed_s: f64,
    /// Bound of the parent when the node was created (`+∞` for the root).
    pub parent_ub: f64,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub pruned: bool,
}

impl ProgressRow {
    pub const CSV_HEADER: &'static str =
        "node_id,depth,parent_id,node_ub,node_lb,best_lb,best_ub,open_nodes,elapsed_s";

    pub fn to_csv(&self) -> String {
        let parent = self.parent_id.map(|p| p.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{:.6}",
            self.node_id,
            self.depth,
            parent,
            self.node_ub,
            self.node_lb,
            self.best_lb,
            self.best_ub,
            self.open_nodes,
            self.elapsed_s
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SbbResult {
    pub best_lb: f64,
    pub best_ub: f64,
    pub incumbent: Vec<f64>,
    pub nodes_explored: usize,
    pub wall_time: f64,
    pub termination: SbbTermination,
}

impl SbbResult {
    pub fn rel_gap(&self) -> f64 {
        relative_gap(self.best_lb, self.best_ub)
    }
}

/// `(UB - LB) / max(LB, 1e-12)`; zero when the bounds coincide.
pub fn relative_gap(lb: f64, ub: f64) -> f64 {
    if ub <= lb {
        0.0
    } else {
        (ub - lb) / lb.max(1e-12)
    }
}

/// Max-heap entry: larger upper bound first, then lower id.
struct Open(Node);

impl PartialEq for Open {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Open {}

impl PartialOrd for Open {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Open {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .local_ub
            .total_cmp(&other.0.local_ub)
            .then_with(|| Reverse(self.0.id).cmp(&Reverse(other.0.id)))
    }
}

pub fn solve(problem: &OracleProblem, opts: &SbbOptions) -> Result<SbbResult> {
    solve_with_progress(problem, opts, |_| {})
}

/// Runs branch-and-bound, reporting every bounded node to `progress`.
pub fn solve_with_progress<P: FnMut(&ProgressRow)>(
    problem: &OracleProblem,
    opts: &SbbOptions,
    mut progress: P,
) -> Result<SbbResult> {
    if !(opts.rel_gap >= 0.0) || opts.workers == 0 {
        return Err(Error::domain("rel_gap must be non-negative and workers positive"));
    }
    let clock = Stopwatch::start();
    let root_box = problem.bounds().clone();
    let f_low = problem.value_unchecked(root_box.lower());
    if !f_low.is_finite() {
        return Err(Error::domain("objective is not finite at the lower corner"));
    }
    let approx = opts.approx();
    let pool = if opts.workers > 1 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(opts.workers)
                .build()
                .map_err(|e| Error::domain(format!("cannot start worker pool: {e}")))?,
        )
    } else {
        None
    };

    let mut best_lb = f64::NEG_INFINITY;
    let mut incumbent: Vec<f64> = Vec::new();
    let mut open: BinaryHeap<Open> = BinaryHeap::new();
    let mut next_id = 1u64;
    let mut explored = 0usize;

    let mut batch = vec![Node::root(root_box)];
    loop {
        let results: Vec<Result<CutPlaneResult>> = {
            let bound = |node: &Node| {
                approximate_cutting_plane(problem, &node.bounds, &node.inherited_cuts, &approx)
            };
            match &pool {
                Some(pool) => pool.install(|| batch.par_iter().map(bound).collect()),
                None => batch.iter().map(bound).collect(),
            }
        };
        // siblings not yet absorbed still carry their parent's bound
        let mut pending: Vec<f64> = batch.iter().map(|n| n.local_ub).collect();
        for (k, (mut node, res)) in batch.drain(..).zip(results).enumerate() {
            let res = res?;
            pending[k] = f64::NEG_INFINITY;
            explored += 1;
            let parent_ub = if node.parent_id.is_some() {
                node.local_ub
            } else {
                f64::INFINITY
            };
            let feasible = !res.is_infeasible();
            node.absorb(res);
            if feasible && node.local_lb > best_lb {
                best_lb = node.local_lb;
                incumbent = node.incumbent.clone();
            }
            let keep = feasible && node.local_ub > prune_threshold(best_lb);
            let row = ProgressRow {
                node_id: node.id,
                depth: node.depth,
                parent_id: node.parent_id,
                node_ub: node.local_ub,
                node_lb: node.local_lb,
                best_lb,
                best_ub: 0.0,
                open_nodes: 0,
                elapsed_s: 0.0,
                parent_ub,
                lower: node.bounds.lower().to_vec(),
                upper: node.bounds.upper().to_vec(),
                pruned: !keep,
            };
            if keep {
                open.push(Open(node));
            }
            let waiting = pending.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let best_ub = global_ub(best_lb, &open).max(waiting);
            progress(&ProgressRow {
                best_ub,
                open_nodes: open.len(),
                elapsed_s: clock.elapsed_secs(),
                ..row
            });
        }

        // drop nodes the incumbent has overtaken
        let threshold = prune_threshold(best_lb);
        open.retain(|o| o.0.local_ub > threshold);
        let best_ub = global_ub(best_lb, &open);
        let finish = |termination| SbbResult {
            best_lb,
            best_ub,
            incumbent: incumbent.clone(),
            nodes_explored: explored,
            wall_time: clock.elapsed_secs(),
            termination,
        };
        if open.is_empty() && incumbent.is_empty() {
            return Ok(SbbResult {
                best_lb: f64::NEG_INFINITY,
                best_ub: f64::NEG_INFINITY,
                ..finish(SbbTermination::Infeasible)
            });
        }
        if relative_gap(best_lb, best_ub) <= opts.rel_gap {
            return Ok(finish(SbbTermination::Gap));
        }
        if opts.time_limit.is_some_and(|t| clock.elapsed_secs() >= t) {
            return Ok(finish(SbbTermination::TimeLimit));
        }
        if opts.node_limit.is_some_and(|cap| explored >= cap) {
            return Ok(finish(SbbTermination::NodeLimit));
        }

        while batch.len() < 2 * opts.workers {
            let Some(Open(node)) = open.pop() else { break };
            match partition(&node, next_id) {
                Ok((a, b)) => {
                    next_id += 2;
                    batch.push(a);
                    batch.push(b);
                }
                // a point box is already closed: its bound is F at the point
                Err(Error::CannotPartition) => continue,
                Err(e) => return Err(e),
            }
            if opts.workers == 1 {
                break;
            }
        }
        if batch.is_empty() {
            // only unsplittable boxes were left; their bounds are attained
            let best_ub = global_ub(best_lb, &open);
            return Ok(SbbResult {
                best_ub,
                ..finish(SbbTermination::Gap)
            });
        }
    }
}

fn prune_threshold(best_lb: f64) -> f64 {
    best_lb + PRUNE_SLACK * best_lb.abs()
}

fn global_ub(best_lb: f64, open: &BinaryHeap<Open>) -> f64 {
    open.peek().map_or(best_lb, |o| o.0.local_ub.max(best_lb))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::bilinear;
    use crate::model::LinearConstraints;
    use crate::verify::grid_maximize;

    fn node(lo: Vec<f64>, hi: Vec<f64>) -> Node {
        Node::root(BoxBounds::new(lo, hi).unwrap())
    }

    #[test]
    fn partition_examples() {
        let (a, b) = partition(&node(vec![0.0, 0.0], vec![1.0, 0.5]), 1).unwrap();
        assert_eq!((a.bounds.lower(), a.bounds.upper()), (&[0.0, 0.0][..], &[0.5, 0.5][..]));
        assert_eq!((b.bounds.lower(), b.bounds.upper()), (&[0.5, 0.0][..], &[1.0, 0.5][..]));
        assert_eq!((a.id, b.id, a.parent_id), (1, 2, Some(0)));

        let (a, _) = partition(&node(vec![0.0, 0.0], vec![1.0, 1.0]), 1).unwrap();
        assert_eq!(a.bounds.upper(), &[0.5, 1.0]);

        let (a, b) = partition(&node(vec![0.2, 0.0], vec![0.2, 1.0]), 1).unwrap();
        assert_eq!(a.bounds.upper(), &[0.2, 0.5]);
        assert_eq!(b.bounds.lower(), &[0.2, 0.5]);

        assert!(matches!(
            partition(&node(vec![0.2, 0.3], vec![0.2, 0.3]), 1),
            Err(Error::CannotPartition)
        ));
    }

    #[test]
    fn children_carry_parent_cuts() {
        let p = bilinear(true);
        let mut root = Node::root(p.bounds().clone());
        let res = approximate_cutting_plane(&p, &root.bounds, &[], &ApproxOptions::default()).unwrap();
        let count = res.cuts.len();
        root.absorb(res);
        let (a, b) = partition(&root, 1).unwrap();
        assert_eq!(a.inherited_cuts.len(), count);
        assert!(Arc::ptr_eq(&a.inherited_cuts, &b.inherited_cuts));
        assert_eq!(a.depth, 1);
    }

    #[test]
    fn bilinear_budget() {
        let p = bilinear(true);
        let r = solve(&p, &SbbOptions::default()).unwrap();
        assert_eq!(r.termination, SbbTermination::Gap);
        assert!((0.95..=1.0 + 1e-9).contains(&r.best_lb), "{r:?}");
        assert!(r.best_ub <= 1.05 * r.best_lb);
        assert!(r.best_ub >= 1.0 - 1e-9);
        assert!(p.is_feasible(&r.incumbent, 1e-9));
        assert_eq!(p.evaluate(&r.incumbent).unwrap(), r.best_lb);
    }

    #[test]
    fn concave_closes_at_root() {
        let p = OracleProblem::from_fns(
            2,
            |x| x[0].sqrt() + x[1].sqrt(),
            |x, g| {
                g[0] = 0.5 / x[0].sqrt();
                g[1] = 0.5 / x[1].sqrt();
            },
            BoxBounds::unit(2),
            LinearConstraints::budget(2, 1.0),
        )
        .unwrap();
        let r = solve(&p, &SbbOptions { rel_gap: 0.001, ..SbbOptions::default() }).unwrap();
        let want = 2.0f64.sqrt();
        assert_eq!(r.termination, SbbTermination::Gap);
        assert!(r.best_lb <= want + 1e-9 && r.best_lb >= want / 1.001 - 1e-9, "{r:?}");
        assert!(r.best_ub >= want - 1e-9);
    }

    #[test]
    fn point_box_is_one_node() {
        let p = bilinear(true).with_bounds(BoxBounds::point(&[0.25, 0.5]).unwrap()).unwrap();
        let r = solve(&p, &SbbOptions::default()).unwrap();
        assert_eq!(r.nodes_explored, 1);
        assert_eq!(r.best_lb, 0.25 + 0.5 - 0.125);
        assert_eq!(r.rel_gap(), 0.0);
        assert_eq!(r.termination, SbbTermination::Gap);
    }

    #[test]
    fn infeasible_problem() {
        let p = OracleProblem::from_fns(
            2,
            |x| x[0] + x[1],
            |_, g| g.fill(1.0),
            BoxBounds::unit(2),
            LinearConstraints::new(vec![vec![-1.0, -1.0]], vec![-3.0]).unwrap(),
        )
        .unwrap();
        let r = solve(&p, &SbbOptions::default()).unwrap();
        assert_eq!(r.termination, SbbTermination::Infeasible);
        assert!(r.incumbent.is_empty());
    }

    #[test]
    fn sandwich_and_child_bounds() {
        let p = bilinear(true);
        let grid = grid_maximize(&p, 0.01).unwrap();
        let mut rows = Vec::new();
        let r = solve_with_progress(&p, &SbbOptions { rel_gap: 0.001, ..SbbOptions::default() }, |row| {
            rows.push(row.clone())
        })
        .unwrap();
        assert_eq!(rows.len(), r.nodes_explored);
        for row in &rows {
            assert!(row.best_ub >= grid.best_value - 1e-6);
            assert!(row.best_lb <= grid.best_value + grid.lipschitz_slack);
            assert!(row.node_ub <= row.parent_ub + 1e-7);
            assert!(row.node_lb <= row.node_ub + 1e-7);
        }
    }

    #[test]
    fn node_limit_stops() {
        let p = crate::problems::gen_quadratic(3, 2, 4).unwrap().to_problem().unwrap();
        let r = solve(&p, &SbbOptions { rel_gap: 0.0, node_limit: Some(5), ..SbbOptions::default() }).unwrap();
        assert_eq!(r.termination, SbbTermination::NodeLimit);
        assert!(r.nodes_explored >= 5 && r.nodes_explored <= 6);
        assert!(r.best_lb <= r.best_ub);
    }

    #[test]
    fn parallel_meets_same_contract() {
        let p = crate::problems::gen_quadratic(3, 3, 2).unwrap().to_problem().unwrap();
        let serial = solve(&p, &SbbOptions::default()).unwrap();
        let par = solve(&p, &SbbOptions { workers: 3, ..SbbOptions::default() }).unwrap();
        assert_eq!(par.termination, SbbTermination::Gap);
        assert!(par.rel_gap() <= 0.05);
        assert!(par.best_ub >= serial.best_lb - 1e-9);
        assert!(serial.best_ub >= par.best_lb - 1e-9);
    }
}
