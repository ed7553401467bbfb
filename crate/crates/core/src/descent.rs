//! The descent loop: find a feasible descent direction, step to the next
//! tightness, repeat until a local optimum or an unbounded ray.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::feasibility::normalize;
use crate::instance::{is_feasible, objective, Instance};
use crate::mincut::{find_direction_mincut_in, MincutMode, MincutOutcome, DEFAULT_SUBGRAPH_CAP};
use crate::scalar::{NumMode, Scalar};
use crate::tangent::{build_tangent, make_connected, ConnectMove, ConnectedResult, Direction};
use crate::tree::{find_direction_tree_in, TreeOutcome};
use crate::trop::{Extent, TropVector};

/// Per-iteration work of the tree method stays below this multiple of
/// `r = r_A + r_C` on a connected instance: building the tangent digraph
/// costs at most `2r`, the subtree pass `8r`, reading off a side `2r` and
/// the step size `r`.
pub const TREE_OPS_FACTOR: u64 = 13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Tree method, switching to min-cut for good once a cycle shows up.
    Auto,
    Tree,
    Mincut,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Auto => "auto",
            Method::Tree => "tree",
            Method::Mincut => "mincut",
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Method::Auto),
            "tree" => Ok(Method::Tree),
            "mincut" => Ok(Method::Mincut),
            other => Err(Error::InvalidParams(format!("unknown method {other:?}"))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DescentConfig {
    pub method: Method,
    pub max_iter: u64,
    pub subgraph_cap: usize,
}

impl Default for DescentConfig {
    fn default() -> Self {
        DescentConfig { method: Method::Auto, max_iter: 100_000, subgraph_cap: DEFAULT_SUBGRAPH_CAP }
    }
}

/// The engine that produced a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Engine {
    Tree,
    Mincut,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step<T> {
    pub engine: Engine,
    pub cols: Vec<usize>,
    pub mu: i64,
    pub delta: T,
    /// Minimum cut of the subgraph that produced the direction.
    pub cut_capacity: Option<u64>,
    /// Point reached, normalized.
    pub x: TropVector<T>,
    pub value: T,
    /// Primitive operations spent on this iteration (tree engine only).
    pub ops: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Certificate {
    /// Every member of the subgraph family has minimum cut `D`.
    MinCut { capacities: Vec<u64>, degree: u64 },
    /// No removable edge of the spanning tree has a negative rate.
    Tree { removable: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DescentStatus {
    LocalOptimum(Certificate),
    Unbounded { direction: Vec<usize> },
    IterationLimit,
    CapExceeded { subgraphs: u64 },
    /// Tree method only: the tangent digraph stopped being a tree.
    DegeneracyDetected,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DescentRun<T> {
    pub status: DescentStatus,
    /// Last point, normalized.
    pub x: TropVector<T>,
    pub value: T,
    pub iterations: u64,
    pub trace: Vec<Step<T>>,
    pub connect_moves: Vec<ConnectMove<T>>,
    /// Switches from the tree engine to min-cut.
    pub fallbacks: u32,
    /// Range, objective, iteration or operation bounds that failed at tree
    /// points. Empty on every correct run.
    pub bound_violations: Vec<String>,
}

/// Min-cut descent from a feasible point.
pub fn descent_solve<T: Scalar>(inst: &Instance<T>, x0: &TropVector<T>, cfg: DescentConfig) -> Result<DescentRun<T>> {
    run(inst, x0, DescentConfig { method: Method::Mincut, ..cfg })
}

/// Tree descent from a feasible point; with `Method::Auto` a detected cycle
/// hands over to the min-cut engine.
pub fn descent_solve_tree<T: Scalar>(
    inst: &Instance<T>,
    x0: &TropVector<T>,
    cfg: DescentConfig,
) -> Result<DescentRun<T>> {
    let method = if cfg.method == Method::Mincut { Method::Tree } else { cfg.method };
    run(inst, x0, DescentConfig { method, ..cfg })
}

struct Bounds<T> {
    range: T,
    value: T,
    iterations: Option<u64>,
    ops: u64,
}

fn bounds<T: Scalar>(inst: &Instance<T>) -> Result<Bounds<T>> {
    let n = inst.n() as i64;
    let m = inst.max_abs()?;
    let d = inst.degree() as i64;
    let over = || Error::Overflow;
    let range = m.checked_mul_int(2 * (n - 1)).ok_or_else(over)?;
    let value = m.checked_mul_int(2 * n - 1).and_then(|v| v.checked_mul_int(d)).ok_or_else(over)?;
    let iterations = match T::MODE {
        NumMode::Int => {
            let m = m.to_f64() as u64;
            Some((4 * n as u64 - 2).saturating_mul(m).saturating_mul(d as u64))
        }
        _ => None,
    };
    let ops = TREE_OPS_FACTOR * (inst.r_a() + inst.r_c()) as u64;
    Ok(Bounds { range, value, iterations, ops })
}

fn check_tree_point<T: Scalar>(x: &TropVector<T>, value: &T, b: &Bounds<T>, out: &mut Vec<String>) -> Result<()> {
    if let (Some(hi), Some(lo)) = (x.max_finite(), x.min_finite()) {
        let range = hi.checked_sub(lo).ok_or(Error::Overflow)?;
        if range.exceeds(&b.range, 0.0) {
            out.push(format!("range {range} exceeds {} at {x}", b.range));
        }
    }
    if value.checked_abs().ok_or(Error::Overflow)?.exceeds(&b.value, 0.0) {
        out.push(format!("|f| = |{value}| exceeds {} at {x}", b.value));
    }
    Ok(())
}

fn run<T: Scalar>(inst: &Instance<T>, x0: &TropVector<T>, cfg: DescentConfig) -> Result<DescentRun<T>> {
    inst.check_balanced()?;
    if x0.len() != inst.n() {
        return Err(Error::DimensionMismatch { expected: inst.n(), got: x0.len() });
    }
    if !x0.is_all_finite() {
        return Err(Error::InvalidParams("descent needs a starting point with finite entries".into()));
    }
    if !is_feasible(inst, x0)? {
        return Err(Error::InvalidParams(format!("starting point {x0} is infeasible")));
    }
    let b = bounds(inst)?;
    let mut x = normalize(x0)?;
    let mut engine = if cfg.method == Method::Mincut { Engine::Mincut } else { Engine::Tree };
    let mut out = DescentRun {
        status: DescentStatus::IterationLimit,
        value: objective(inst, &x)?,
        x: x.clone(),
        iterations: 0,
        trace: Vec::new(),
        connect_moves: Vec::new(),
        fallbacks: 0,
        bound_violations: Vec::new(),
    };
    let finish = |mut out: DescentRun<T>, x: TropVector<T>, status| -> Result<DescentRun<T>> {
        out.value = objective(inst, &x)?;
        out.x = x;
        out.status = status;
        if let (Some(limit), true) = (b.iterations, out.fallbacks == 0 && cfg.method != Method::Mincut) {
            if out.iterations > limit {
                out.bound_violations.push(format!("{} iterations exceed {limit}", out.iterations));
            }
        }
        Ok(out)
    };

    loop {
        let mut g = build_tangent(inst, &x)?;
        let mut ops = g.build_ops();
        if engine == Engine::Tree && !g.is_connected() {
            match make_connected(inst, &x)? {
                ConnectedResult::Unbounded { x: y, direction } => {
                    return finish(out, normalize(&y)?, DescentStatus::Unbounded { direction });
                }
                ConnectedResult::Connected { x: y, moves } => {
                    x = normalize(&y)?;
                    out.connect_moves.extend(moves);
                    g = build_tangent(inst, &x)?;
                    ops = g.build_ops();
                }
            }
        }
        if out.iterations >= cfg.max_iter {
            return finish(out, x, DescentStatus::IterationLimit);
        }
        let (direction, cut_capacity): (Direction<T>, Option<u64>) = match engine {
            Engine::Tree => {
                let value = objective(inst, &x)?;
                let (outcome, tree_ops) = find_direction_tree_in(inst, &g, &x)?;
                ops += tree_ops;
                match outcome {
                    TreeOutcome::DegeneracyDetected if cfg.method == Method::Auto => {
                        engine = Engine::Mincut;
                        out.fallbacks += 1;
                        continue;
                    }
                    TreeOutcome::DegeneracyDetected => return finish(out, x, DescentStatus::DegeneracyDetected),
                    TreeOutcome::LocallyOptimal { removable } => {
                        check_tree_point(&x, &value, &b, &mut out.bound_violations)?;
                        return finish(out, x, DescentStatus::LocalOptimum(Certificate::Tree { removable }));
                    }
                    TreeOutcome::Found { direction, .. } => {
                        check_tree_point(&x, &value, &b, &mut out.bound_violations)?;
                        if ops > b.ops {
                            out.bound_violations.push(format!("{ops} operations exceed {}", b.ops));
                        }
                        (direction, None)
                    }
                }
            }
            Engine::Mincut => match find_direction_mincut_in(inst, &g, &x, MincutMode::FirstHit, cfg.subgraph_cap)? {
                MincutOutcome::CapExceeded { subgraphs } => {
                    return finish(out, x, DescentStatus::CapExceeded { subgraphs });
                }
                MincutOutcome::LocallyOptimal { capacities } => {
                    let cert = Certificate::MinCut { capacities, degree: inst.degree() };
                    return finish(out, x, DescentStatus::LocalOptimum(cert));
                }
                MincutOutcome::Found { direction, cut, .. } => (direction, Some(cut.capacity)),
            },
        };
        let Direction { cols, mu, delta } = direction;
        let delta = match delta {
            Extent::Infinity => return finish(out, x, DescentStatus::Unbounded { direction: cols }),
            Extent::Finite(d) => d,
        };
        let before = objective(inst, &x)?;
        let next = normalize(&x.shifted(&cols, &delta)?)?;
        let value = objective(inst, &next)?;
        if !before.exceeds(&value, 0.0) {
            return Err(Error::Internal(format!("step along {cols:?} did not decrease the objective")));
        }
        x = next;
        out.iterations += 1;
        out.trace.push(Step {
            engine,
            cols,
            mu,
            delta,
            cut_capacity,
            x: x.clone(),
            value,
            ops: if engine == Engine::Tree { ops } else { 0 },
        });
    }
}
