//! Python module `tlfacp`: instances go in as JSON text or dicts, reports
//! come back as dicts shaped like the CLI's JSON output.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyList, PyString};
use serde_json::{json, Value};
use tlfacp::descent::Method;
use tlfacp::instance::homogenize;
use tlfacp::io::{parse_point, parse_problem, vector_to_json, AnyProblem, Problem};
use tlfacp::oracle::{global_opt_bruteforce, GlobalOutcome, OracleLimits};
use tlfacp::solve::{solve as run_solve, solve_from_point, RunConfig};
use tlfacp::{is_feasible, objective, Scalar, TropVector};

fn err(e: tlfacp::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

macro_rules! typed {
    ($any:expr, $p:ident => $body:expr) => {
        match $any {
            AnyProblem::Int($p) => $body,
            AnyProblem::Rat($p) => $body,
            AnyProblem::Float($p) => $body,
        }
    };
}

fn load(instance: &Bound<'_, PyAny>) -> PyResult<AnyProblem> {
    let text: String = if let Ok(s) = instance.cast::<PyString>() {
        s.to_str()?.to_owned()
    } else {
        let json = instance.py().import("json")?;
        json.call_method1("dumps", (instance,))?.extract()?
    };
    parse_problem(&text).map_err(err)
}

/// Accepts `"0,-1"` or a sequence whose `None` entries mean `-inf`.
fn point_text(point: &Bound<'_, PyAny>) -> PyResult<String> {
    if let Ok(s) = point.cast::<PyString>() {
        return Ok(s.to_str()?.to_owned());
    }
    let list = PyList::new(point.py(), point.try_iter()?.collect::<PyResult<Vec<_>>>()?)?;
    let mut parts = Vec::with_capacity(list.len());
    for item in list.iter() {
        parts.push(if item.is_none() { "-inf".to_owned() } else { item.str()?.to_str()?.to_owned() });
    }
    Ok(parts.join(","))
}

fn to_py(py: Python<'_>, v: &Value) -> PyResult<Py<PyAny>> {
    let json = py.import("json")?;
    Ok(json.call_method1("loads", (v.to_string(),))?.unbind())
}

fn solve_typed<T: Scalar>(p: &Problem<T>, cfg: &RunConfig, point: Option<&str>) -> tlfacp::Result<Value> {
    let (inst, homog) = match p {
        Problem::Homogeneous(i) => (i.clone(), None),
        Problem::Inhomogeneous(h) => {
            let hm = homogenize(h)?;
            (hm.instance.clone(), Some(hm))
        }
    };
    let report = match point {
        Some(raw) => {
            let x: TropVector<T> = parse_point(raw)?;
            let x = homog.as_ref().map_or(x.clone(), |h| h.lift(&x));
            solve_from_point(&inst, &x, cfg)?
        }
        None => run_solve(&inst, cfg)?,
    };
    let mut out = report.to_json(cfg);
    if let Some(h) = &homog {
        let y = match &report.x {
            Some(x) => h.project(x)?,
            None => None,
        };
        out["original"] = json!({ "x": y.as_ref().map(vector_to_json) });
    }
    Ok(out)
}

fn eval_typed<T: Scalar>(p: &Problem<T>, raw: &str) -> tlfacp::Result<Value> {
    let x: TropVector<T> = parse_point(raw)?;
    let (value, feasible) = match p {
        Problem::Homogeneous(i) => (objective(i, &x)?, is_feasible(i, &x)?),
        Problem::Inhomogeneous(h) => (h.objective(&x)?, h.is_feasible(&x)?),
    };
    Ok(json!({ "value": value.to_json(), "feasible": feasible }))
}

fn global_typed<T: Scalar>(p: &Problem<T>, limits: OracleLimits) -> tlfacp::Result<Value> {
    let inst = match p {
        Problem::Homogeneous(i) => i.clone(),
        Problem::Inhomogeneous(h) => homogenize(h)?.instance,
    };
    let report = global_opt_bruteforce(&inst, limits)?;
    let mut out = json!({ "trees": report.trees, "supports": report.supports });
    match report.outcome {
        GlobalOutcome::Optimum { x, value } => {
            out["status"] = json!("Optimum");
            out["x"] = vector_to_json(&x);
            out["value"] = value.to_json();
        }
        GlobalOutcome::Infeasible => out["status"] = json!("Infeasible"),
        GlobalOutcome::Unbounded { support } => {
            out["status"] = json!("Unbounded");
            out["support"] = json!(support);
        }
        GlobalOutcome::LimitExceeded { trees } => {
            out["status"] = json!("LimitExceeded");
            out["trees"] = json!(trees);
        }
    }
    Ok(out)
}

/// Descend to a local optimum; `point` picks the start instead of the
/// greatest feasible point.
#[pyfunction]
#[pyo3(signature = (instance, method = "auto", max_iter = 100_000, subgraph_cap = tlfacp::mincut::DEFAULT_SUBGRAPH_CAP, point = None))]
fn solve(
    py: Python<'_>,
    instance: &Bound<'_, PyAny>,
    method: &str,
    max_iter: u64,
    subgraph_cap: usize,
    point: Option<&Bound<'_, PyAny>>,
) -> PyResult<Py<PyAny>> {
    let problem = load(instance)?;
    let method: Method = method.parse().map_err(err)?;
    let cfg = RunConfig { method, max_iter, subgraph_cap, ..RunConfig::default() };
    let point = point.map(point_text).transpose()?;
    let out = py
        .detach(|| typed!(&problem, p => solve_typed(p, &cfg, point.as_deref())))
        .map_err(err)?;
    to_py(py, &out)
}

/// Objective value and feasibility at `point`.
#[pyfunction]
fn evaluate(py: Python<'_>, instance: &Bound<'_, PyAny>, point: &Bound<'_, PyAny>) -> PyResult<Py<PyAny>> {
    let problem = load(instance)?;
    let raw = point_text(point)?;
    let out = typed!(&problem, p => eval_typed(p, &raw)).map_err(err)?;
    to_py(py, &out)
}

/// Exhaustive global optimum for small instances.
#[pyfunction]
#[pyo3(signature = (instance, max_trees = 1_000_000, jobs = 1))]
fn global_optimum(py: Python<'_>, instance: &Bound<'_, PyAny>, max_trees: u64, jobs: usize) -> PyResult<Py<PyAny>> {
    let problem = load(instance)?;
    let limits = OracleLimits { max_trees, jobs: jobs.max(1), ..Default::default() };
    let out = py.detach(|| typed!(&problem, p => global_typed(p, limits))).map_err(err)?;
    to_py(py, &out)
}

#[pymodule(name = "tlfacp")]
fn tlfacp_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(global_optimum, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
