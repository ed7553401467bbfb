//! Plain-text renderings. Columns print 1-based, matching the DOT labels.

use std::fmt::Write;

use tlfacp::descent::{Certificate, DescentStatus, Engine};
use tlfacp::solve::{RunConfig, SolveReport, SolveStatus};
use tlfacp::{Scalar, TropVector};

pub fn set(cols: &[usize]) -> String {
    let items: Vec<String> = cols.iter().map(|j| (j + 1).to_string()).collect();
    format!("{{{}}}", items.join(", "))
}

pub fn solve<T: Scalar>(r: &SolveReport<T>, cfg: &RunConfig, original: Option<&TropVector<T>>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "status: {}", r.status.name());
    match &r.status {
        SolveStatus::Unbounded { direction } => {
            let _ = writeln!(s, "unbounded along: {}", set(direction));
        }
        SolveStatus::Infeasible { missing } => {
            let _ = writeln!(s, "cannot keep finite: {}", set(missing));
        }
        SolveStatus::CapExceeded { subgraphs } => {
            let _ = writeln!(s, "subgraph family size: {subgraphs}");
        }
        _ => {}
    }
    if let Some(x) = &r.x {
        let _ = writeln!(s, "x: {x}");
    }
    if let Some(y) = original {
        let _ = writeln!(s, "original x: {y}");
    }
    if let Some(v) = &r.value {
        let _ = writeln!(s, "value: {v}");
    }
    let _ = writeln!(
        s,
        "iterations: {} (feasibility {})\nmethod: {}, fallbacks: {}",
        r.iterations,
        r.feasibility_iterations,
        cfg.method,
        r.fallbacks()
    );
    for c in &r.components {
        if r.components.len() > 1 {
            let _ = writeln!(s, "component {}:", set(&c.cols));
        }
        for (i, step) in c.trace.iter().enumerate() {
            let cols: Vec<usize> = step.cols.iter().map(|&j| c.cols[j]).collect();
            let engine = match step.engine {
                Engine::Tree => "tree",
                Engine::Mincut => "mincut",
            };
            let _ = write!(
                s,
                "  {:>4}  {engine:<6}  J = {}  mu = {}  delta = {}  value = {}",
                i + 1,
                set(&cols),
                step.mu,
                step.delta,
                step.value
            );
            if let Some(cut) = step.cut_capacity {
                let _ = write!(s, "  cut = {cut}");
            }
            s.push('\n');
        }
        match &c.status {
            DescentStatus::LocalOptimum(Certificate::MinCut { capacities, degree }) => {
                let _ = writeln!(s, "  certificate: every min cut equals D = {degree} ({} subgraphs)", capacities.len());
            }
            DescentStatus::LocalOptimum(Certificate::Tree { removable }) => {
                let _ = writeln!(s, "  certificate: spanning tree, {removable} removable edges, none descending");
            }
            _ => {}
        }
    }
    for v in r.bound_violations() {
        let _ = writeln!(s, "warning: {v}");
    }
    s
}
