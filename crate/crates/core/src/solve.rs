//! End-to-end solve: validation, a feasible start, support restriction,
//! component split and one descent per component.

use serde_json::{json, Value};

use crate::descent::{descent_solve, descent_solve_tree, Certificate, DescentConfig, DescentStatus, Engine, Method, Step};
use crate::error::{Error, Result};
use crate::feasibility::{normalize, solve_feasibility, FeasibilityStatus};
use crate::instance::{objective, split_components, validate, Instance};
use crate::io::vector_to_json;
use crate::mincut::DEFAULT_SUBGRAPH_CAP;
use crate::scalar::Scalar;
use crate::tangent::ConnectMove;
use crate::trop::{support, TropVector};

/// Solver settings, echoed into every report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub method: Method,
    pub max_iter: u64,
    pub subgraph_cap: usize,
    /// Float-mode comparison tolerance; `None` keeps the instance's own.
    pub tol: Option<f64>,
    pub seed: u64,
    pub jobs: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            method: Method::Auto,
            max_iter: 100_000,
            subgraph_cap: DEFAULT_SUBGRAPH_CAP,
            tol: None,
            seed: 0,
            jobs: 1,
        }
    }
}

impl RunConfig {
    pub fn descent(&self) -> DescentConfig {
        DescentConfig { method: self.method, max_iter: self.max_iter, subgraph_cap: self.subgraph_cap }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "method": self.method.as_str(),
            "maxIter": self.max_iter,
            "subgraphCap": self.subgraph_cap,
            "tol": self.tol,
            "seed": self.seed,
            "jobs": self.jobs,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveStatus {
    LocalOptimum,
    /// Columns whose joint decrease lowers the objective without bound.
    Unbounded { direction: Vec<usize> },
    /// No feasible point keeps the listed columns finite.
    Infeasible { missing: Vec<usize> },
    IterationLimit,
    CapExceeded { subgraphs: u64 },
    DegeneracyDetected,
}

impl SolveStatus {
    pub fn name(&self) -> &'static str {
        match self {
            SolveStatus::LocalOptimum => "LocalOptimum",
            SolveStatus::Unbounded { .. } => "Unbounded",
            SolveStatus::Infeasible { .. } => "Infeasible",
            SolveStatus::IterationLimit => "IterationLimit",
            SolveStatus::CapExceeded { .. } => "CapExceeded",
            SolveStatus::DegeneracyDetected => "DegeneracyDetected",
        }
    }

    /// Process exit code: 0 optimum, 2 infeasible, 3 unbounded, 4 limits.
    pub fn exit_code(&self) -> i32 {
        match self {
            SolveStatus::LocalOptimum => 0,
            SolveStatus::Infeasible { .. } => 2,
            SolveStatus::Unbounded { .. } => 3,
            _ => 4,
        }
    }
}

/// Descent on one connected piece of the restricted instance. Step columns
/// and points are local to the piece; `cols` maps them back.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentRun<T> {
    pub cols: Vec<usize>,
    pub status: DescentStatus,
    pub x: TropVector<T>,
    pub value: T,
    pub iterations: u64,
    pub trace: Vec<Step<T>>,
    pub connect_moves: Vec<ConnectMove<T>>,
    pub fallbacks: u32,
    pub bound_violations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveReport<T> {
    pub status: SolveStatus,
    /// Final point, normalized, `-inf` outside the support.
    pub x: Option<TropVector<T>>,
    pub value: Option<T>,
    pub iterations: u64,
    pub feasibility_iterations: u64,
    pub components: Vec<ComponentRun<T>>,
}

impl<T: Scalar> SolveReport<T> {
    pub fn fallbacks(&self) -> u32 {
        self.components.iter().map(|c| c.fallbacks).sum()
    }

    pub fn bound_violations(&self) -> Vec<String> {
        self.components.iter().flat_map(|c| c.bound_violations.iter().cloned()).collect()
    }

    pub fn to_json(&self, cfg: &RunConfig) -> Value {
        let mut status = json!({ "kind": self.status.name() });
        match &self.status {
            SolveStatus::Unbounded { direction } => status["direction"] = json!(direction),
            SolveStatus::Infeasible { missing } => status["missing"] = json!(missing),
            SolveStatus::CapExceeded { subgraphs } => status["subgraphs"] = json!(subgraphs),
            _ => {}
        }
        let components: Vec<Value> = self.components.iter().map(component_json).collect();
        json!({
            "status": status,
            "x": self.x.as_ref().map(vector_to_json),
            "value": self.value.as_ref().map(Scalar::to_json),
            "iterations": self.iterations,
            "feasibilityIterations": self.feasibility_iterations,
            "fallbacks": self.fallbacks(),
            "components": components,
            "config": cfg.to_json(),
        })
    }
}

fn component_json<T: Scalar>(c: &ComponentRun<T>) -> Value {
    let global = |cols: &[usize]| cols.iter().map(|&j| c.cols[j]).collect::<Vec<_>>();
    let certificate = match &c.status {
        DescentStatus::LocalOptimum(Certificate::MinCut { capacities, degree }) => {
            json!({ "kind": "MinCut", "capacities": capacities, "degree": degree })
        }
        DescentStatus::LocalOptimum(Certificate::Tree { removable }) => {
            json!({ "kind": "Tree", "removable": removable })
        }
        _ => Value::Null,
    };
    let trace: Vec<Value> = c
        .trace
        .iter()
        .map(|s| {
            json!({
                "engine": match s.engine { Engine::Tree => "tree", Engine::Mincut => "mincut" },
                "J": global(&s.cols),
                "mu": s.mu,
                "delta": s.delta.to_json(),
                "cut": s.cut_capacity,
                "value": s.value.to_json(),
                "ops": s.ops,
            })
        })
        .collect();
    let moves: Vec<Value> = c
        .connect_moves
        .iter()
        .map(|m| json!({ "J": global(&m.cols), "mu": m.mu, "delta": m.delta.to_json() }))
        .collect();
    json!({
        "cols": c.cols,
        "status": descent_status_name(&c.status),
        "certificate": certificate,
        "value": c.value.to_json(),
        "iterations": c.iterations,
        "trace": trace,
        "connectMoves": moves,
        "fallbacks": c.fallbacks,
        "boundViolations": c.bound_violations,
    })
}

pub fn descent_status_name(s: &DescentStatus) -> &'static str {
    match s {
        DescentStatus::LocalOptimum(_) => "LocalOptimum",
        DescentStatus::Unbounded { .. } => "Unbounded",
        DescentStatus::IterationLimit => "IterationLimit",
        DescentStatus::CapExceeded { .. } => "CapExceeded",
        DescentStatus::DegeneracyDetected => "DegeneracyDetected",
    }
}

/// Solve from the greatest feasible point of the instance.
pub fn solve<T: Scalar>(inst: &Instance<T>, cfg: &RunConfig) -> Result<SolveReport<T>> {
    let owned;
    let inst = match cfg.tol {
        Some(tol) => {
            owned = inst.clone().with_tol(tol);
            &owned
        }
        None => inst,
    };
    inst.check_balanced()?;
    validate(inst)?;
    let feas = solve_feasibility(inst, &inst.required_support())?;
    let mut report = SolveReport {
        status: SolveStatus::LocalOptimum,
        x: None,
        value: None,
        iterations: 0,
        feasibility_iterations: feas.iterations,
        components: Vec::new(),
    };
    let x0 = match feas.status {
        FeasibilityStatus::Feasible(x) => x,
        FeasibilityStatus::InfeasibleForSupport { missing, .. } => {
            report.status = SolveStatus::Infeasible { missing };
            return Ok(report);
        }
        FeasibilityStatus::IterationLimit { .. } => {
            report.status = SolveStatus::IterationLimit;
            return Ok(report);
        }
    };
    solve_from(inst, &x0, cfg, report)
}

/// Solve from a given feasible point; entries at `-inf` stay there.
pub fn solve_from_point<T: Scalar>(inst: &Instance<T>, x0: &TropVector<T>, cfg: &RunConfig) -> Result<SolveReport<T>> {
    let inst = match cfg.tol {
        Some(tol) => inst.clone().with_tol(tol),
        None => inst.clone(),
    };
    inst.check_balanced()?;
    validate(&inst)?;
    if x0.len() != inst.n() {
        return Err(Error::DimensionMismatch { expected: inst.n(), got: x0.len() });
    }
    if !crate::instance::is_feasible(&inst, x0)? {
        return Err(Error::InvalidParams(format!("starting point {x0} is infeasible")));
    }
    objective(&inst, x0)?;
    let report = SolveReport {
        status: SolveStatus::LocalOptimum,
        x: None,
        value: None,
        iterations: 0,
        feasibility_iterations: 0,
        components: Vec::new(),
    };
    solve_from(&inst, x0, cfg, report)
}

fn solve_from<T: Scalar>(
    inst: &Instance<T>,
    x0: &TropVector<T>,
    cfg: &RunConfig,
    mut report: SolveReport<T>,
) -> Result<SolveReport<T>> {
    let cols = support(x0);
    let inside = |j: &usize| cols.binary_search(j).is_ok();
    let mut c_rows = Vec::new();
    for k in 0..inst.p() {
        if inst.c().row(k).iter().any(|(j, _)| inside(j)) {
            c_rows.push(k);
        } else if inst.mu_plus()[k] > 0 {
            // every feasible point leaves this weighted row at -inf
            report.status = SolveStatus::Infeasible { missing: vec![] };
            return Ok(report);
        }
    }
    let a_rows: Vec<usize> =
        (0..inst.m()).filter(|&i| inst.a_minus().row(i).iter().any(|(j, _)| inside(j))).collect();
    let sub = inst.restrict(&cols, &c_rows, &a_rows)?;
    let comps = split_components(&sub)?;

    // the restricted instance stays balanced, so an unbalanced piece comes
    // with one whose μ⁻ side is heavier; raising all of it is a ray
    if let Some(c) = comps.iter().find(|c| c.instance.degree() > c.instance.degree_plus()) {
        let direction = c.cols.iter().map(|&j| cols[j]).collect();
        report.x = Some(normalize(x0)?);
        report.value = Some(objective(inst, x0)?);
        report.status = SolveStatus::Unbounded { direction };
        return Ok(report);
    }

    let mut x = x0.clone();
    let mut limit: Option<SolveStatus> = None;
    let mut unbounded: Option<Vec<usize>> = None;
    for comp in &comps {
        let start = comp.project(&TropVector::new(cols.iter().map(|&j| x0[j].clone()).collect()));
        let run = match cfg.method {
            Method::Mincut => descent_solve(&comp.instance, &start, cfg.descent())?,
            Method::Tree | Method::Auto => descent_solve_tree(&comp.instance, &start, cfg.descent())?,
        };
        let global: Vec<usize> = comp.cols.iter().map(|&j| cols[j]).collect();
        for (k, &j) in global.iter().enumerate() {
            x.set(j, run.x[k].clone());
        }
        report.iterations += run.iterations;
        match &run.status {
            DescentStatus::LocalOptimum(_) => {}
            DescentStatus::Unbounded { direction } => {
                unbounded.get_or_insert_with(|| direction.iter().map(|&j| global[j]).collect());
            }
            DescentStatus::IterationLimit => {
                limit.get_or_insert(SolveStatus::IterationLimit);
            }
            DescentStatus::CapExceeded { subgraphs } => {
                limit.get_or_insert(SolveStatus::CapExceeded { subgraphs: *subgraphs });
            }
            DescentStatus::DegeneracyDetected => {
                limit.get_or_insert(SolveStatus::DegeneracyDetected);
            }
        }
        report.components.push(ComponentRun {
            cols: global,
            status: run.status,
            x: run.x,
            value: run.value,
            iterations: run.iterations,
            trace: run.trace,
            connect_moves: run.connect_moves,
            fallbacks: run.fallbacks,
            bound_violations: run.bound_violations,
        });
    }
    let x = normalize(&x)?;
    report.value = Some(objective(inst, &x)?);
    report.x = Some(x);
    report.status = match (unbounded, limit) {
        (Some(direction), _) => SolveStatus::Unbounded { direction },
        (None, Some(s)) => s,
        (None, None) => SolveStatus::LocalOptimum,
    };
    Ok(report)
}
