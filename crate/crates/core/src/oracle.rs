//! Exhaustive reference engines: global optimum over spanning trees of the
//! pattern graph, local optimality over all column subsets, and the exact
//! transportation optimum for unconstrained instances.

use std::time::{Duration, Instant};

use crate::descent::{descent_solve_tree, DescentConfig, DescentStatus};
use crate::error::{Error, Result};
use crate::feasibility::{normalize, solve_feasibility};
use crate::instance::{is_feasible, objective, split_components, Instance};
use crate::scalar::Scalar;
use crate::tangent::{build_tangent, is_feasible_direction_mask, mu_rate, reconstruct_from_tree, TangentEdge};
use crate::trop::{ExtScalar, TropMatrix, TropVector};

pub use crate::generate::min_cover_size as min_set_cover_bruteforce;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLimits {
    /// Spanning trees examined over the whole search.
    pub max_trees: u64,
    /// Largest `n` for subset enumeration.
    pub subset_cap: usize,
    /// Worker threads for evaluating trees.
    pub jobs: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits { max_trees: 1_000_000, subset_cap: 20, jobs: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LocalVerdict {
    LocallyOptimal,
    /// A feasible descent direction.
    NotLocal(Vec<usize>),
}

fn subsets_of(support: &[usize]) -> impl Iterator<Item = Vec<usize>> + '_ {
    (1u64..1 << support.len()).map(move |mask| {
        support.iter().enumerate().filter(|(b, _)| mask >> b & 1 == 1).map(|(_, &j)| j).collect()
    })
}

fn check_subset_cap(n: usize, cap: usize) -> Result<()> {
    if n > cap.min(63) {
        return Err(Error::CapExceeded(cap));
    }
    Ok(())
}

/// Tests every nonempty `J ⊆ supp(x)` against both direction properties.
pub fn local_opt_check<T: Scalar>(inst: &Instance<T>, x: &TropVector<T>, cap: usize) -> Result<LocalVerdict> {
    let support = crate::trop::support(x);
    check_subset_cap(support.len(), cap)?;
    let g = build_tangent(inst, x)?;
    let mut inside = vec![false; inst.n()];
    for cols in subsets_of(&support) {
        cols.iter().for_each(|&j| inside[j] = true);
        let hit = mu_rate(inst, &g, &cols) < 0 && is_feasible_direction_mask(&g, &cols, &inside);
        cols.iter().for_each(|&j| inside[j] = false);
        if hit {
            return Ok(LocalVerdict::NotLocal(cols));
        }
    }
    Ok(LocalVerdict::LocallyOptimal)
}

/// Every feasible descent direction at `x`, in subset-mask order.
pub fn enumerate_directions<T: Scalar>(inst: &Instance<T>, x: &TropVector<T>, cap: usize) -> Result<Vec<Vec<usize>>> {
    let support = crate::trop::support(x);
    check_subset_cap(support.len(), cap)?;
    let g = build_tangent(inst, x)?;
    let mut inside = vec![false; inst.n()];
    let mut out = Vec::new();
    for cols in subsets_of(&support) {
        cols.iter().for_each(|&j| inside[j] = true);
        let hit = mu_rate(inst, &g, &cols) < 0 && is_feasible_direction_mask(&g, &cols, &inside);
        cols.iter().for_each(|&j| inside[j] = false);
        if hit {
            out.push(cols);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TransportOutcome<T> {
    /// Maximum total cost with the flow on each `(k, j)` pair carrying any.
    Optimal { value: T, flow: Vec<(usize, usize, u64)> },
    Infeasible,
}

/// Maximum-cost transportation from supplies `μ⁺` (rows of `C`) to demands
/// `μ⁻` (columns) along finite entries, by successive longest augmenting
/// paths with Bellman–Ford on the residual network.
pub fn transport_opt<T: Scalar>(c: &TropMatrix<T>, mu_plus: &[u64], mu_minus: &[u64]) -> Result<TransportOutcome<T>> {
    let (p, n) = (c.rows(), c.cols());
    if mu_plus.len() != p {
        return Err(Error::DimensionMismatch { expected: p, got: mu_plus.len() });
    }
    if mu_minus.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: mu_minus.len() });
    }
    let (plus, minus): (u64, u64) = (mu_plus.iter().sum(), mu_minus.iter().sum());
    if plus != minus {
        return Err(Error::Unbalanced { plus, minus });
    }
    // vertices: s, rows, columns, t
    let (s, t) = (0, p + n + 1);
    let mut cap = Vec::new();
    let mut cost: Vec<T> = Vec::new();
    let mut pairs = Vec::new();
    let mut add = |a: usize, b: usize, k: u64, w: T, to: &mut Vec<(usize, usize)>, cost: &mut Vec<T>| {
        to.push((a, b));
        cap.push(k);
        cost.push(w.clone());
        to.push((b, a));
        cap.push(0);
        cost.push(w.checked_neg().expect("negating a finite cost"));
    };
    let mut edges_to = Vec::new();
    for (k, &mu) in mu_plus.iter().enumerate() {
        add(s, 1 + k, mu, T::zero(), &mut edges_to, &mut cost);
    }
    for (j, &mu) in mu_minus.iter().enumerate() {
        add(1 + p + j, t, mu, T::zero(), &mut edges_to, &mut cost);
    }
    for k in 0..p {
        for (j, w) in c.row(k) {
            pairs.push((edges_to.len(), k, *j));
            add(1 + k, 1 + p + j, plus, w.clone(), &mut edges_to, &mut cost);
        }
    }
    let nv = p + n + 2;
    let mut sent = 0u64;
    let mut value = T::zero();
    while sent < plus {
        let mut dist: Vec<Option<T>> = vec![None; nv];
        let mut via = vec![usize::MAX; nv];
        dist[s] = Some(T::zero());
        for _ in 0..nv {
            let mut changed = false;
            for (e, &(a, b)) in edges_to.iter().enumerate() {
                if cap[e] == 0 {
                    continue;
                }
                let Some(da) = &dist[a] else { continue };
                let cand = da.checked_add(&cost[e]).ok_or(Error::Overflow)?;
                if dist[b].as_ref().is_none_or(|db| cand > *db) {
                    dist[b] = Some(cand);
                    via[b] = e;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let Some(gain) = dist[t].clone() else {
            return Ok(TransportOutcome::Infeasible);
        };
        let mut push = u64::MAX;
        let mut v = t;
        while v != s {
            let e = via[v];
            push = push.min(cap[e]);
            v = edges_to[e].0;
        }
        let mut v = t;
        while v != s {
            let e = via[v];
            cap[e] -= push;
            cap[e ^ 1] += push;
            v = edges_to[e].0;
        }
        sent += push;
        let push = i64::try_from(push).map_err(|_| Error::Overflow)?;
        value = value.checked_add(&gain.checked_mul_int(push).ok_or(Error::Overflow)?).ok_or(Error::Overflow)?;
    }
    let flow = pairs
        .into_iter()
        .filter(|&(e, _, _)| cap[e + 1] > 0)
        .map(|(e, k, j)| (k, j, cap[e + 1]))
        .collect();
    Ok(TransportOutcome::Optimal { value, flow })
}

/// Union-find with undo, for the branching enumeration.
struct RollbackUf {
    parent: Vec<usize>,
    size: Vec<usize>,
    history: Vec<usize>,
}

impl RollbackUf {
    fn new(n: usize) -> Self {
        RollbackUf { parent: (0..n).collect(), size: vec![1; n], history: Vec::new() }
    }

    fn find(&self, mut v: usize) -> usize {
        while self.parent[v] != v {
            v = self.parent[v];
        }
        v
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
        self.history.push(b);
        true
    }

    fn undo(&mut self) {
        let b = self.history.pop().expect("undo without union");
        let a = self.parent[b];
        self.size[a] -= self.size[b];
        self.parent[b] = b;
    }
}

/// Calls `visit` with the edge indices of every spanning tree of the
/// multigraph, in include-before-exclude branching order. Stops with
/// `CapExceeded` after `limit` trees; `visit` returning `false` stops early.
/// Returns the number of trees visited.
pub fn enumerate_spanning_trees(
    vertices: usize,
    edges: &[(usize, usize)],
    limit: u64,
    mut visit: impl FnMut(&[usize]) -> bool,
) -> Result<u64> {
    struct Search<'a, F> {
        vertices: usize,
        edges: &'a [(usize, usize)],
        limit: u64,
        count: u64,
        chosen: Vec<usize>,
        uf: RollbackUf,
        visit: F,
        stopped: bool,
    }

    impl<F: FnMut(&[usize]) -> bool> Search<'_, F> {
        /// Whether the chosen edges together with `edges[from..]` connect.
        fn connected_with(&self, from: usize) -> bool {
            let mut uf = RollbackUf::new(self.vertices);
            let mut parts = self.vertices;
            for e in self.chosen.iter().copied().chain(from..self.edges.len()) {
                let (a, b) = self.edges[e];
                if uf.union(a, b) {
                    parts -= 1;
                }
            }
            parts <= 1
        }

        fn go(&mut self, idx: usize) -> Result<()> {
            if self.stopped {
                return Ok(());
            }
            if self.chosen.len() + 1 == self.vertices {
                self.count += 1;
                if self.count > self.limit {
                    return Err(Error::CapExceeded(self.limit as usize));
                }
                if !(self.visit)(&self.chosen) {
                    self.stopped = true;
                }
                return Ok(());
            }
            if idx == self.edges.len() {
                return Ok(());
            }
            let (a, b) = self.edges[idx];
            if self.uf.union(a, b) {
                self.chosen.push(idx);
                self.go(idx + 1)?;
                self.chosen.pop();
                self.uf.undo();
            }
            if self.connected_with(idx + 1) {
                self.go(idx + 1)?;
            }
            Ok(())
        }
    }

    if vertices == 0 {
        return Ok(0);
    }
    let mut search = Search {
        vertices,
        edges,
        limit,
        count: 0,
        chosen: Vec::new(),
        uf: RollbackUf::new(vertices),
        visit: &mut visit,
        stopped: false,
    };
    if !search.connected_with(0) {
        return Ok(0);
    }
    search.go(0)?;
    Ok(search.count)
}

/// Pattern-graph edges labelled as the tight edge they would be: objective
/// entries as `E1`, constraint entries as `E3` when the `A⁺` coefficient
/// carries the maximum and `E2` otherwise.
pub fn pattern_edges<T: Scalar>(inst: &Instance<T>) -> Vec<TangentEdge> {
    let mut out = Vec::with_capacity(inst.r_a() + inst.r_c());
    for k in 0..inst.p() {
        out.extend(inst.c().row(k).iter().map(|(j, _)| TangentEdge::e1(k, *j)));
    }
    for i in 0..inst.m() {
        for (j, a) in inst.a().row(i) {
            let plus = inst.a_plus().get(i, *j);
            out.push(if plus == ExtScalar::Finite(a.clone()) { TangentEdge::e3(*j, i) } else { TangentEdge::e2(i, *j) });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GlobalOutcome<T> {
    Optimum { x: TropVector<T>, value: T },
    Infeasible,
    /// Some support admits feasible points of arbitrarily small value.
    Unbounded { support: Vec<usize> },
    LimitExceeded { trees: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlobalReport<T> {
    pub outcome: GlobalOutcome<T>,
    pub trees: u64,
    pub supports: u64,
    pub elapsed: Duration,
}

enum Piece<T> {
    Optimum(TropVector<T>, T),
    Infeasible,
    Unbounded,
}

fn evaluate_tree<T: Scalar>(inst: &Instance<T>, labels: &[TangentEdge], tree: &[usize]) -> Result<Option<(TropVector<T>, T)>> {
    let edges: Vec<TangentEdge> = tree.iter().map(|&e| labels[e]).collect();
    let x = match reconstruct_from_tree(inst, &edges, (0, T::zero())) {
        Ok(x) => x,
        Err(Error::InconsistentTree(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    if !is_feasible(inst, &x)? {
        return Ok(None);
    }
    let value = objective(inst, &x)?;
    Ok(Some((normalize(&x)?, value)))
}

fn better<T: Scalar>(a: &(TropVector<T>, T), b: &(TropVector<T>, T)) -> bool {
    a.1 < b.1 || (a.1 == b.1 && a.0.entries() < b.0.entries())
}

fn component_optimum<T: Scalar>(
    inst: &Instance<T>,
    balanced: bool,
    limits: &OracleLimits,
    trees: &mut u64,
) -> Result<Piece<T>> {
    let full: Vec<usize> = (0..inst.n()).collect();
    let feasible = || -> Result<bool> { Ok(solve_feasibility(inst, &full)?.solution().is_some()) };
    if !balanced {
        return Ok(if feasible()? { Piece::Unbounded } else { Piece::Infeasible });
    }
    let labels = pattern_edges(inst);
    let g0 = build_tangent(inst, &TropVector::zeros(inst.n()))?;
    let ends: Vec<(usize, usize)> = labels.iter().map(|e| g0.endpoints(e)).collect();
    let remaining = limits.max_trees.saturating_sub(*trees);
    let mut best: Option<(TropVector<T>, T)> = None;
    let mut batch: Vec<Vec<usize>> = Vec::new();
    let mut failure: Option<Error> = None;
    let jobs = limits.jobs.max(1);
    let flush = |batch: &mut Vec<Vec<usize>>, best: &mut Option<(TropVector<T>, T)>| -> Result<()> {
        let results = par_map(batch, jobs, |tree| evaluate_tree(inst, &labels, tree));
        for r in results {
            if let Some(cand) = r? {
                if best.as_ref().is_none_or(|b| better(&cand, b)) {
                    *best = Some(cand);
                }
            }
        }
        batch.clear();
        Ok(())
    };
    let counted = enumerate_spanning_trees(g0.vertex_count(), &ends, remaining, |tree| {
        batch.push(tree.to_vec());
        if batch.len() >= 4096 {
            if let Err(e) = flush(&mut batch, &mut best) {
                failure = Some(e);
                return false;
            }
        }
        true
    });
    let counted = match counted {
        Ok(c) => c,
        Err(Error::CapExceeded(_)) => {
            *trees = limits.max_trees + 1;
            return Err(Error::CapExceeded(limits.max_trees as usize));
        }
        Err(e) => return Err(e),
    };
    if let Some(e) = failure {
        return Err(e);
    }
    flush(&mut batch, &mut best)?;
    *trees += counted;
    let Some((x, value)) = best else {
        return Ok(if feasible()? { Piece::Unbounded } else { Piece::Infeasible });
    };
    // a bounded component attains its minimum at a tree point, so a descent
    // from the best tree point may only escape when the component is unbounded
    let run = descent_solve_tree(inst, &x, DescentConfig::default())?;
    match run.status {
        DescentStatus::Unbounded { .. } => return Ok(Piece::Unbounded),
        DescentStatus::LocalOptimum(_) if run.value < value => return Ok(Piece::Unbounded),
        DescentStatus::LocalOptimum(_) => {}
        other => return Err(Error::Internal(format!("boundedness check did not finish: {other:?}"))),
    }
    Ok(Piece::Optimum(x, value))
}

fn par_map<I: Sync, O: Send>(items: &[I], jobs: usize, f: impl Fn(&I) -> O + Sync) -> Vec<O> {
    if jobs <= 1 || items.len() < 2 * jobs {
        return items.iter().map(f).collect();
    }
    let chunk = items.len().div_ceil(jobs);
    std::thread::scope(|scope| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|part| {
                let f = &f;
                scope.spawn(move || part.iter().map(f).collect::<Vec<O>>())
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("oracle worker panicked")).collect()
    })
}

/// Global minimum by enumerating, for every support containing the columns
/// with `μ⁻_j > 0`, the spanning trees of each connected piece of the
/// restricted pattern graph.
pub fn global_opt_bruteforce<T: Scalar>(inst: &Instance<T>, limits: OracleLimits) -> Result<GlobalReport<T>> {
    let start = Instant::now();
    let n = inst.n();
    let required = inst.required_support();
    let optional: Vec<usize> = (0..n).filter(|j| !required.contains(j)).collect();
    check_subset_cap(optional.len(), limits.subset_cap)?;
    let mut trees = 0u64;
    let mut supports = 0u64;
    let mut best: Option<(TropVector<T>, T)> = None;
    let report = |outcome, trees, supports| GlobalReport { outcome, trees, supports, elapsed: start.elapsed() };

    'supports: for mask in 0u64..1 << optional.len() {
        let mut cols: Vec<usize> = required.clone();
        cols.extend(optional.iter().enumerate().filter(|(b, _)| mask >> b & 1 == 1).map(|(_, &j)| j));
        cols.sort_unstable();
        let inside = |j: &usize| cols.binary_search(j).is_ok();
        let mut c_rows = Vec::new();
        for k in 0..inst.p() {
            if inst.c().row(k).iter().any(|(j, _)| inside(j)) {
                c_rows.push(k);
            } else if inst.mu_plus()[k] > 0 {
                continue 'supports;
            }
        }
        let mut a_rows = Vec::new();
        for i in 0..inst.m() {
            let minus = inst.a_minus().row(i).iter().any(|(j, _)| inside(j));
            let plus = inst.a_plus().row(i).iter().any(|(j, _)| inside(j));
            match (plus, minus) {
                (_, false) => {}
                (false, true) => continue 'supports,
                (true, true) => a_rows.push(i),
            }
        }
        supports += 1;
        let sub = inst.restrict(&cols, &c_rows, &a_rows)?;
        let mut x = TropVector::neg_inf(n);
        let mut total = T::zero();
        let mut unbounded = false;
        for comp in split_components(&sub)? {
            let piece = match component_optimum(&comp.instance, comp.balanced, &limits, &mut trees) {
                Err(Error::CapExceeded(_)) => {
                    return Ok(report(GlobalOutcome::LimitExceeded { trees }, trees, supports));
                }
                other => other?,
            };
            match piece {
                Piece::Infeasible => continue 'supports,
                Piece::Unbounded => unbounded = true,
                Piece::Optimum(y, v) => {
                    for (k, &j) in comp.cols.iter().enumerate() {
                        x.set(cols[j], y[k].clone());
                    }
                    total = total.checked_add(&v).ok_or(Error::Overflow)?;
                }
            }
        }
        if unbounded {
            return Ok(report(GlobalOutcome::Unbounded { support: cols }, trees, supports));
        }
        let cand = (x, total);
        if best.as_ref().is_none_or(|b| better(&cand, b)) {
            best = Some(cand);
        }
    }
    let outcome = match best {
        Some((x, value)) => GlobalOutcome::Optimum { x, value },
        None => GlobalOutcome::Infeasible,
    };
    Ok(report(outcome, trees, supports))
}
