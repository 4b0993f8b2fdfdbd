//! Browser demo bindings. Every export returns a JSON string; failures come
//! back as `{"error": "..."}` so the page never sees a thrown exception.

use drsub_core::cutplane::{approximate_cutting_plane, ApproxOptions};
use drsub_core::envelopes::{envelope_cut, overestimator_value, single_cut_error_bound};
use drsub_core::sbb::{solve_with_progress, SbbOptions};
use drsub_core::{BoxBounds, LinearConstraints, OracleProblem};
use serde::Serialize;
use serde_json::json;
use wasm_bindgen::prelude::wasm_bindgen;

const SAMPLES: usize = 200;

/// Univariate monotone concave test functions offered by the page.
fn univariate(name: &str, lo: f64, hi: f64) -> Result<OracleProblem, String> {
    let bounds = BoxBounds::new(vec![lo], vec![hi]).map_err(|e| e.to_string())?;
    let none = LinearConstraints::none();
    let problem = match name {
        "sqrt" => OracleProblem::from_fns(1, |x| x[0].sqrt(), |x, g| g[0] = 0.5 / x[0].sqrt(), bounds, none),
        "log1p" => OracleProblem::from_fns(1, |x| (4.0 * x[0]).ln_1p(), |x, g| g[0] = 4.0 / (1.0 + 4.0 * x[0]), bounds, none),
        "saturating" => OracleProblem::from_fns(
            1,
            |x| 1.0 - (-3.0 * x[0]).exp(),
            |x, g| g[0] = 3.0 * (-3.0 * x[0]).exp(),
            bounds,
            none,
        ),
        other => return Err(format!("unknown function `{other}`")),
    };
    problem.map_err(|e| e.to_string())
}

fn respond<T: Serialize>(result: Result<T, String>) -> String {
    match result {
        Ok(v) => serde_json::to_string(&v).unwrap_or_else(|e| json!({ "error": e.to_string() }).to_string()),
        Err(e) => json!({ "error": e }).to_string(),
    }
}

#[derive(Serialize)]
struct EnvelopeCurves {
    xs: Vec<f64>,
    f: Vec<f64>,
    overestimator: Vec<f64>,
    envelope: Vec<f64>,
    error_bound: f64,
    max_gap: f64,
    argmax_gap: f64,
}

fn envelope_curves(name: &str, support: f64, lo: f64, hi: f64) -> Result<EnvelopeCurves, String> {
    let p = univariate(name, lo, hi)?;
    let s = [support];
    let cut = envelope_cut(&p, &s, p.bounds()).map_err(|e| e.to_string())?;
    let mut out = EnvelopeCurves {
        xs: Vec::with_capacity(SAMPLES + 1),
        f: Vec::with_capacity(SAMPLES + 1),
        overestimator: Vec::with_capacity(SAMPLES + 1),
        envelope: Vec::with_capacity(SAMPLES + 1),
        error_bound: single_cut_error_bound(&p, &s, p.bounds()).map_err(|e| e.to_string())?,
        max_gap: f64::NEG_INFINITY,
        argmax_gap: lo,
    };
    for i in 0..=SAMPLES {
        let x = [lo + (hi - lo) * i as f64 / SAMPLES as f64];
        let over = overestimator_value(&p, &x, &s).map_err(|e| e.to_string())?;
        let env = cut.value(&x);
        if env - over > out.max_gap {
            out.max_gap = env - over;
            out.argmax_gap = x[0];
        }
        out.xs.push(x[0]);
        out.f.push(p.evaluate(&x).map_err(|e| e.to_string())?);
        out.overestimator.push(over);
        out.envelope.push(env);
    }
    Ok(out)
}

/// `F`, the first-order overestimator and the envelope cut at `support` on
/// `[lo, hi]`, sampled for plotting.
#[wasm_bindgen]
pub fn envelope_explorer(function: &str, support: f64, lo: f64, hi: f64) -> String {
    respond(envelope_curves(function, support, lo, hi))
}

/// `F(x) = f(x1) + weight * f(x2)` on the unit square with `x1 + x2 <= budget`.
fn separable(name: &str, weight: f64, budget: f64) -> Result<OracleProblem, String> {
    if !(weight > 0.0 && weight.is_finite()) {
        return Err("weight must be positive".into());
    }
    let f = univariate(name, 0.0, 1.0)?.objective().clone();
    let g = f.clone();
    OracleProblem::from_fns(
        2,
        move |x| f.value(&x[..1]) + weight * f.value(&x[1..]),
        move |x, out| {
            let mut d = [0.0];
            g.gradient(&x[..1], &mut d);
            out[0] = d[0];
            g.gradient(&x[1..], &mut d);
            out[1] = weight * d[0];
        },
        BoxBounds::unit(2),
        LinearConstraints::budget(2, budget),
    )
    .map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct TraceStep {
    iter: usize,
    lb: f64,
    ub: f64,
    /// LP solution of this iteration, where the next cut is supported.
    point: Vec<f64>,
}

#[derive(Serialize)]
struct Trace {
    steps: Vec<TraceStep>,
    termination: &'static str,
}

fn trace(name: &str, weight: f64, budget: f64, max_iters: usize) -> Result<Trace, String> {
    let p = separable(name, weight, budget)?;
    let opts = ApproxOptions { max_iters: max_iters.max(1), ..ApproxOptions::default() };
    let res = approximate_cutting_plane(&p, p.bounds(), &[], &opts).map_err(|e| e.to_string())?;
    let steps = res
        .trace
        .into_iter()
        .map(|row| TraceStep { iter: row.iter, lb: row.lb, ub: row.ub, point: row.support })
        .collect();
    Ok(Trace { steps, termination: res.termination.as_str() })
}

/// Iterations of the approximate cutting plane on the separable problem.
#[wasm_bindgen]
pub fn cutting_plane_trace(function: &str, weight: f64, budget: f64, max_iters: usize) -> String {
    respond(trace(function, weight, budget, max_iters))
}

#[derive(Serialize)]
struct BoxRow {
    id: u64,
    depth: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
    ub: f64,
    lb: f64,
    pruned: bool,
}

#[derive(Serialize)]
struct SbbRun {
    boxes: Vec<BoxRow>,
    best_lb: f64,
    best_ub: f64,
    incumbent: Vec<f64>,
    nodes: usize,
    termination: &'static str,
}

fn sbb_run(name: &str, weight: f64, budget: f64, rel_gap: f64, node_limit: usize) -> Result<SbbRun, String> {
    let p = separable(name, weight, budget)?;
    let opts = SbbOptions { rel_gap, time_limit: None, node_limit: Some(node_limit.max(1)), ..SbbOptions::default() };
    let mut boxes = Vec::new();
    let res = solve_with_progress(&p, &opts, |row| {
        boxes.push(BoxRow {
            id: row.node_id,
            depth: row.depth,
            lower: row.lower.clone(),
            upper: row.upper.clone(),
            ub: row.node_ub,
            lb: row.node_lb,
            pruned: row.pruned,
        })
    })
    .map_err(|e| e.to_string())?;
    Ok(SbbRun {
        boxes,
        best_lb: res.best_lb,
        best_ub: res.best_ub,
        incumbent: res.incumbent,
        nodes: res.nodes_explored,
        termination: res.termination.as_str(),
    })
}

/// Spatial branch-and-bound boxes for the separable problem.
#[wasm_bindgen]
pub fn sbb_boxes(function: &str, weight: f64, budget: f64, rel_gap: f64, node_limit: usize) -> String {
    respond(sbb_run(function, weight, budget, rel_gap, node_limit))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    fn parse(s: &str) -> Value {
        serde_json::from_str(s).unwrap()
    }

    #[test]
    fn envelope_gap_peaks_at_the_support() {
        let v = parse(&envelope_explorer("sqrt", 0.25, 0.0, 1.0));
        assert!((v["max_gap"].as_f64().unwrap() - 0.1875).abs() < 1e-9);
        assert!((v["argmax_gap"].as_f64().unwrap() - 0.25).abs() < 1e-9);
        assert!((v["error_bound"].as_f64().unwrap() - 0.1875).abs() < 1e-9);
        assert_eq!(v["xs"].as_array().unwrap().len(), SAMPLES + 1);
    }

    #[test]
    fn curves_dominate_the_function() {
        for name in ["sqrt", "log1p", "saturating"] {
            let v = parse(&envelope_explorer(name, 0.4, 0.1, 0.9));
            let f = v["f"].as_array().unwrap();
            for key in ["overestimator", "envelope"] {
                for (a, b) in v[key].as_array().unwrap().iter().zip(f) {
                    assert!(a.as_f64().unwrap() >= b.as_f64().unwrap() - 1e-12, "{name} {key}");
                }
            }
        }
    }

    #[test]
    fn bad_inputs_become_error_objects() {
        assert!(parse(&envelope_explorer("cube", 0.5, 0.0, 1.0))["error"].is_string());
        assert!(parse(&envelope_explorer("sqrt", 2.0, 0.0, 1.0))["error"].is_string());
        assert!(parse(&envelope_explorer("sqrt", 0.5, 1.0, 0.0))["error"].is_string());
        assert!(parse(&cutting_plane_trace("sqrt", -1.0, 1.0, 10))["error"].is_string());
        assert!(parse(&sbb_boxes("sqrt", 1.0, f64::NAN, 0.05, 100))["error"].is_string());
    }

    #[test]
    fn trace_bounds_bracket_the_optimum() {
        // max sqrt(x1) + sqrt(x2) with x1 + x2 <= 1 is sqrt(2)
        let v = parse(&cutting_plane_trace("sqrt", 1.0, 1.0, 100));
        let (mut prev_lb, mut prev_ub) = (f64::NEG_INFINITY, f64::INFINITY);
        for step in v["steps"].as_array().unwrap() {
            let (lb, ub) = (step["lb"].as_f64().unwrap(), step["ub"].as_f64().unwrap());
            assert!(lb <= 2f64.sqrt() + 1e-9 && ub >= 2f64.sqrt() - 1e-9, "{lb} {ub}");
            assert!(lb >= prev_lb && ub <= prev_ub);
            assert_eq!(step["point"].as_array().unwrap().len(), 2);
            (prev_lb, prev_ub) = (lb, ub);
        }
    }

    #[test]
    fn sbb_boxes_bracket_the_optimum() {
        let v = parse(&sbb_boxes("sqrt", 1.0, 1.0, 0.01, 5000));
        let lb = v["best_lb"].as_f64().unwrap();
        let ub = v["best_ub"].as_f64().unwrap();
        assert!(lb <= 2f64.sqrt() + 1e-9 && ub >= 2f64.sqrt() - 1e-9 && lb >= 0.99 * 2f64.sqrt());
        assert_eq!(v["termination"], "gap");
        let boxes = v["boxes"].as_array().unwrap();
        assert_eq!(boxes.len(), v["nodes"].as_u64().unwrap() as usize);
        assert_eq!(boxes[0]["depth"], 0);
    }
}
