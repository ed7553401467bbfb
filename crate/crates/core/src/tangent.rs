//! Tangent digraph at a point and the local analysis built on it.
//!
//! The digraph has one vertex per objective row (`U`), per column (`V`) and
//! per constraint row (`W`). Its edges record which terms attain each row
//! maximum:
//!
//! - `E1`: `(u_k, j)` when `(C⊗x)_k = c_{k,j} + x_j`,
//! - `E2`: `(w_i, j)` when `(A⊗x)_i = a⁻_{i,j} + x_j`,
//! - `E3`: `(j, w_i)` when `(A⊗x)_i = a⁺_{i,j} + x_j`.
//!
//! A column subset `J` is a feasible descent direction exactly when every
//! `E2` edge entering `J` has its constraint row fed by an `E3` edge from
//! `J`, and the rate `μ(J,x)` is negative.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::instance::{is_feasible, Instance, UnionFind};
use crate::scalar::Scalar;
use crate::trop::{term, ExtScalar, Extent, TropVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EdgeKind {
    E1,
    E2,
    E3,
}

/// `row` is `k` for `E1` and `i` for `E2`/`E3`; `col` is the column `j`.
///
/// The derived order (kind, row, column) is the deterministic edge order
/// used everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TangentEdge {
    pub kind: EdgeKind,
    pub row: usize,
    pub col: usize,
}

impl TangentEdge {
    pub fn e1(k: usize, j: usize) -> Self {
        TangentEdge { kind: EdgeKind::E1, row: k, col: j }
    }

    pub fn e2(i: usize, j: usize) -> Self {
        TangentEdge { kind: EdgeKind::E2, row: i, col: j }
    }

    pub fn e3(j: usize, i: usize) -> Self {
        TangentEdge { kind: EdgeKind::E3, row: i, col: j }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TangentDigraph<T> {
    n: usize,
    m: usize,
    p: usize,
    edges: Vec<TangentEdge>,
    /// `u_k → j` targets per objective row.
    u_out: Vec<Vec<usize>>,
    /// Objective rows with an `E1` edge into `j`.
    v_from_u: Vec<Vec<usize>>,
    /// Constraint rows with an `E2` edge into `j`.
    v_from_w: Vec<Vec<usize>>,
    /// Columns with an `E3` edge into `w_i`.
    w_in: Vec<Vec<usize>>,
    cx: Vec<ExtScalar<T>>,
    ax: Vec<ExtScalar<T>>,
    build_ops: u64,
}

impl<T: Scalar> TangentDigraph<T> {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// All edges in (kind, row, column) order.
    pub fn edges(&self) -> &[TangentEdge] {
        &self.edges
    }

    pub fn edges_of(&self, kind: EdgeKind) -> impl Iterator<Item = &TangentEdge> {
        self.edges.iter().filter(move |e| e.kind == kind)
    }

    /// Cached `(C ⊗ x)_k`.
    pub fn objective_row_max(&self) -> &[ExtScalar<T>] {
        &self.cx
    }

    /// Cached `(A ⊗ x)_i`.
    pub fn constraint_row_max(&self) -> &[ExtScalar<T>] {
        &self.ax
    }

    /// Term evaluations spent building the digraph.
    pub fn build_ops(&self) -> u64 {
        self.build_ops
    }

    pub fn u_out(&self, k: usize) -> &[usize] {
        &self.u_out[k]
    }

    /// `N_V⁻(w_i, x)`.
    pub fn w_in(&self, i: usize) -> &[usize] {
        &self.w_in[i]
    }

    /// `N_W⁻(j, x)`.
    pub fn w_lower(&self, j: usize) -> &[usize] {
        &self.v_from_w[j]
    }

    /// `N_U(J, x)`, sorted.
    pub fn neighbors_u(&self, cols: &[usize]) -> Vec<usize> {
        let mut hit = vec![false; self.p];
        for &j in cols {
            for &k in &self.v_from_u[j] {
                hit[k] = true;
            }
        }
        (0..self.p).filter(|&k| hit[k]).collect()
    }

    pub fn vertex_count(&self) -> usize {
        self.p + self.n + self.m
    }

    /// Undirected vertex ids: `U` first, then `V`, then `W`.
    pub fn u_vertex(&self, k: usize) -> usize {
        k
    }

    pub fn v_vertex(&self, j: usize) -> usize {
        self.p + j
    }

    pub fn w_vertex(&self, i: usize) -> usize {
        self.p + self.n + i
    }

    /// Endpoints as undirected vertex ids: `(row vertex, column vertex)`.
    pub fn endpoints(&self, e: &TangentEdge) -> (usize, usize) {
        let row = match e.kind {
            EdgeKind::E1 => self.u_vertex(e.row),
            EdgeKind::E2 | EdgeKind::E3 => self.w_vertex(e.row),
        };
        (row, self.v_vertex(e.col))
    }

    /// Component label per undirected vertex, labels numbered in order of
    /// first appearance.
    pub fn component_labels(&self) -> (Vec<usize>, usize) {
        let mut uf = UnionFind::new(self.vertex_count());
        for e in &self.edges {
            let (a, b) = self.endpoints(e);
            uf.union(a, b);
        }
        let mut label = vec![usize::MAX; self.vertex_count()];
        let mut root_label = vec![usize::MAX; self.vertex_count()];
        let mut count = 0;
        for v in 0..self.vertex_count() {
            let r = uf.find(v);
            if root_label[r] == usize::MAX {
                root_label[r] = count;
                count += 1;
            }
            label[v] = root_label[r];
        }
        (label, count)
    }

    pub fn is_connected(&self) -> bool {
        self.component_labels().1 <= 1
    }

    pub fn is_spanning_tree(&self) -> bool {
        self.edges.len() + 1 == self.vertex_count() && self.is_connected()
    }

    /// Graphviz rendering with `u1.., v1.., w1..` vertex names.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph tangent {\n  rankdir=LR;\n");
        for k in 0..self.p {
            let _ = writeln!(s, "  u{} [shape=box];", k + 1);
        }
        for j in 0..self.n {
            let _ = writeln!(s, "  v{} [shape=circle];", j + 1);
        }
        for i in 0..self.m {
            let _ = writeln!(s, "  w{} [shape=diamond];", i + 1);
        }
        for e in &self.edges {
            let (r, c) = (e.row + 1, e.col + 1);
            let _ = match e.kind {
                EdgeKind::E1 => writeln!(s, "  u{r} -> v{c} [label=\"E1\", color=blue];"),
                EdgeKind::E2 => writeln!(s, "  w{r} -> v{c} [label=\"E2\", color=red, style=dashed];"),
                EdgeKind::E3 => writeln!(s, "  v{c} -> w{r} [label=\"E3\", color=darkgreen];"),
            };
        }
        s.push_str("}\n");
        s
    }
}

pub fn build_tangent<T: Scalar>(inst: &Instance<T>, x: &TropVector<T>) -> Result<TangentDigraph<T>> {
    if x.len() != inst.n() {
        return Err(Error::DimensionMismatch { expected: inst.n(), got: x.len() });
    }
    let (n, m, p, tol) = (inst.n(), inst.m(), inst.p(), inst.tol());
    let mut g = TangentDigraph {
        n,
        m,
        p,
        edges: Vec::new(),
        u_out: vec![Vec::new(); p],
        v_from_u: vec![Vec::new(); n],
        v_from_w: vec![Vec::new(); n],
        w_in: vec![Vec::new(); m],
        cx: Vec::with_capacity(p),
        ax: Vec::with_capacity(m),
        build_ops: 0,
    };
    let mut ops = 0u64;
    for k in 0..p {
        let row = inst.c().row(k);
        let max = inst.c().row_max(k, x)?;
        ops += 2 * row.len() as u64;
        if max.is_finite() {
            for (j, c) in row {
                if term(c, &x[*j])?.tied(&max, tol) {
                    g.edges.push(TangentEdge::e1(k, *j));
                    g.u_out[k].push(*j);
                    g.v_from_u[*j].push(k);
                }
            }
        }
        g.cx.push(max);
    }
    let mut e2 = Vec::new();
    let mut e3 = Vec::new();
    for i in 0..m {
        let max = inst.a().row_max(i, x)?;
        ops += (inst.a().row(i).len() + inst.a_plus().row(i).len() + inst.a_minus().row(i).len()) as u64;
        if max.is_finite() {
            for (j, a) in inst.a_minus().row(i) {
                if term(a, &x[*j])?.tied(&max, tol) {
                    e2.push(TangentEdge::e2(i, *j));
                    g.v_from_w[*j].push(i);
                }
            }
            for (j, a) in inst.a_plus().row(i) {
                if term(a, &x[*j])?.tied(&max, tol) {
                    e3.push(TangentEdge::e3(*j, i));
                    g.w_in[i].push(*j);
                }
            }
        }
        g.ax.push(max);
    }
    g.edges.extend(e2);
    g.edges.extend(e3);
    g.build_ops = ops;
    Ok(g)
}

/// Smallest positive gap between two finite terms of any row of `A` or `C`.
pub fn epsilon<T: Scalar>(inst: &Instance<T>, x: &TropVector<T>) -> Result<Extent<T>> {
    let tol = inst.tol();
    let mut best = Extent::Infinity;
    for mat in [inst.a(), inst.c()] {
        for r in 0..mat.rows() {
            let mut terms: Vec<T> = Vec::new();
            for (j, q) in mat.row(r) {
                if let ExtScalar::Finite(t) = term(q, &x[*j])? {
                    terms.push(t);
                }
            }
            terms.sort();
            for w in terms.windows(2) {
                let gap = w[1].checked_sub(&w[0]).ok_or(Error::Overflow)?;
                if gap.is_positive(tol) {
                    best = best.min_with(gap);
                }
            }
        }
    }
    Ok(best)
}

/// `μ(J,x) = Σ_{u_k ∈ N_U(J)} μ⁺_k − Σ_{j∈J} μ⁻_j`.
pub fn mu_rate<T: Scalar>(inst: &Instance<T>, g: &TangentDigraph<T>, cols: &[usize]) -> i64 {
    let plus: u64 = g.neighbors_u(cols).iter().map(|&k| inst.mu_plus()[k]).sum();
    let minus: u64 = cols.iter().map(|&j| inst.mu_minus()[j]).sum();
    plus as i64 - minus as i64
}

fn mask(n: usize, cols: &[usize]) -> Vec<bool> {
    let mut m = vec![false; n];
    for &j in cols {
        m[j] = true;
    }
    m
}

/// Every constraint row with an `E2` edge into `J` has an `E3` edge from `J`.
pub fn is_feasible_direction<T: Scalar>(g: &TangentDigraph<T>, cols: &[usize]) -> bool {
    let inside = mask(g.n, cols);
    is_feasible_direction_mask(g, cols, &inside)
}

pub(crate) fn is_feasible_direction_mask<T: Scalar>(g: &TangentDigraph<T>, cols: &[usize], inside: &[bool]) -> bool {
    cols.iter().all(|&j| g.v_from_w[j].iter().all(|&i| g.w_in[i].iter().any(|&jj| inside[jj])))
}

pub fn is_descent_direction<T: Scalar>(inst: &Instance<T>, g: &TangentDigraph<T>, cols: &[usize]) -> bool {
    mu_rate(inst, g, cols) < 0
}

/// A column subset with its rate and step size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Direction<T> {
    pub cols: Vec<usize>,
    pub mu: i64,
    pub delta: Extent<T>,
}

impl<T: Scalar> Direction<T> {
    pub fn at(inst: &Instance<T>, g: &TangentDigraph<T>, x: &TropVector<T>, cols: Vec<usize>) -> Result<Self> {
        let mu = mu_rate(inst, g, &cols);
        let delta = step_size(inst, x, &cols)?;
        Ok(Direction { cols, mu, delta })
    }
}

/// Largest uniform increase along `χ_J` before a new tight term appears.
///
/// Rows where either the inside or the outside maximum is `-inf`, or where
/// the gap is not positive, impose no bound.
pub fn step_size<T: Scalar>(inst: &Instance<T>, x: &TropVector<T>, cols: &[usize]) -> Result<Extent<T>> {
    let mut ops = 0;
    step_size_counted(inst, x, cols, &mut ops)
}

pub(crate) fn step_size_counted<T: Scalar>(
    inst: &Instance<T>,
    x: &TropVector<T>,
    cols: &[usize],
    ops: &mut u64,
) -> Result<Extent<T>> {
    let inside = mask(inst.n(), cols);
    let tol = inst.tol();
    let mut best = Extent::Infinity;
    for mat in [inst.a(), inst.c()] {
        for r in 0..mat.rows() {
            let mut in_max = ExtScalar::NegInf;
            let mut out_max = ExtScalar::NegInf;
            for (j, q) in mat.row(r) {
                let t = term(q, &x[*j])?;
                let slot = if inside[*j] { &mut in_max } else { &mut out_max };
                if t > *slot {
                    *slot = t;
                }
            }
            *ops += mat.row(r).len() as u64;
            if let (ExtScalar::Finite(o), ExtScalar::Finite(i)) = (&out_max, &in_max) {
                let gap = o.checked_sub(i).ok_or(Error::Overflow)?;
                if gap.is_positive(tol) {
                    best = best.min_with(gap);
                }
            }
        }
    }
    Ok(best)
}

/// One move performed while connecting the tangent digraph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConnectMove<T> {
    pub cols: Vec<usize>,
    pub mu: i64,
    pub delta: T,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConnectedResult<T> {
    Connected { x: TropVector<T>, moves: Vec<ConnectMove<T>> },
    /// `J` has negative rate and infinite step: the objective is unbounded.
    Unbounded { x: TropVector<T>, direction: Vec<usize> },
}

/// Move along whole components of the tangent digraph until it is connected,
/// never increasing the objective.
pub fn make_connected<T: Scalar>(inst: &Instance<T>, x: &TropVector<T>) -> Result<ConnectedResult<T>> {
    inst.check_balanced()?;
    let n = inst.n();
    let mut x = x.clone();
    let mut moves = Vec::new();
    let limit = inst.n() + inst.m() + inst.p() + 1;
    for _ in 0..limit {
        let g = build_tangent(inst, &x)?;
        let (label, count) = g.component_labels();
        if count <= 1 {
            return Ok(ConnectedResult::Connected { x, moves });
        }
        let first = label[g.v_vertex(0)];
        let (side, rest): (Vec<usize>, Vec<usize>) = (0..n).partition(|&j| label[g.v_vertex(j)] == first);
        if rest.is_empty() {
            return Err(Error::Internal("tangent digraph has a component without columns".into()));
        }
        let mu_side = mu_rate(inst, &g, &side);
        let mu_rest = mu_rate(inst, &g, &rest);
        let candidates = if mu_side < 0 {
            vec![(side, mu_side)]
        } else if mu_rest < 0 {
            vec![(rest, mu_rest)]
        } else {
            vec![(side, mu_side), (rest, mu_rest)]
        };
        let mut moved = false;
        for (cols, mu) in candidates {
            match step_size(inst, &x, &cols)? {
                Extent::Finite(delta) => {
                    x = x.shifted(&cols, &delta)?;
                    moves.push(ConnectMove { cols, mu, delta });
                    moved = true;
                    break;
                }
                Extent::Infinity if mu < 0 => {
                    return Ok(ConnectedResult::Unbounded { x, direction: cols });
                }
                Extent::Infinity => {}
            }
        }
        if !moved {
            return Err(Error::Internal(
                "no finite connecting move; the pattern graph is disconnected".into(),
            ));
        }
        debug_assert!(is_feasible(inst, &x)?);
    }
    Err(Error::Internal("make_connected did not converge".into()))
}

fn edge_coef<T: Scalar>(inst: &Instance<T>, e: &TangentEdge) -> Result<T> {
    let v = match e.kind {
        EdgeKind::E1 => inst.c().get(e.row, e.col),
        EdgeKind::E2 => inst.a_minus().get(e.row, e.col),
        EdgeKind::E3 => inst.a_plus().get(e.row, e.col),
    };
    v.finite()
        .cloned()
        .ok_or_else(|| Error::InconsistentTree(format!("edge {e:?} has no finite coefficient")))
}

/// Recover `x` from a tree of tight terms, starting at `x_{anchor.0} = anchor.1`.
pub fn reconstruct_from_tree<T: Scalar>(
    inst: &Instance<T>,
    tree: &[TangentEdge],
    anchor: (usize, T),
) -> Result<TropVector<T>> {
    let (n, p) = (inst.n(), inst.p());
    let rowv = |e: &TangentEdge| match e.kind {
        EdgeKind::E1 => e.row,
        _ => p + e.row,
    };
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n]; // column -> (row vertex, edge idx)
    let mut radj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); p + inst.m()];
    let mut coefs = Vec::with_capacity(tree.len());
    for (idx, e) in tree.iter().enumerate() {
        if e.col >= n || (e.kind == EdgeKind::E1 && e.row >= p) || (e.kind != EdgeKind::E1 && e.row >= inst.m()) {
            return Err(Error::InconsistentTree(format!("edge {e:?} out of range")));
        }
        coefs.push(edge_coef(inst, e)?);
        adj[e.col].push((rowv(e), idx));
        radj[rowv(e)].push((e.col, idx));
    }
    let mut xv: Vec<Option<T>> = vec![None; n];
    let mut yv: Vec<Option<T>> = vec![None; p + inst.m()];
    xv[anchor.0] = Some(anchor.1);
    let mut stack = vec![anchor.0];
    while let Some(j) = stack.pop() {
        let xj = xv[j].clone().expect("visited columns are assigned");
        for &(r, idx) in &adj[j] {
            let y = coefs[idx].checked_add(&xj).ok_or(Error::Overflow)?;
            match &yv[r] {
                Some(prev) if !prev.tied(&y, inst.tol()) => {
                    return Err(Error::InconsistentTree(format!("row vertex {r} gets {prev} and {y}")));
                }
                Some(_) => continue,
                None => yv[r] = Some(y.clone()),
            }
            for &(jj, idx2) in &radj[r] {
                let v = y.checked_sub(&coefs[idx2]).ok_or(Error::Overflow)?;
                match &xv[jj] {
                    Some(prev) if !prev.tied(&v, inst.tol()) => {
                        return Err(Error::InconsistentTree(format!("column {jj} gets {prev} and {v}")));
                    }
                    Some(_) => {}
                    None => {
                        xv[jj] = Some(v);
                        stack.push(jj);
                    }
                }
            }
        }
    }
    xv.into_iter()
        .enumerate()
        .map(|(j, v)| {
            v.map(ExtScalar::Finite)
                .ok_or_else(|| Error::InconsistentTree(format!("column {j} is not reached")))
        })
        .collect::<Result<Vec<_>>>()
        .map(TropVector::new)
}

/// Cycle test on the underlying undirected multigraph.
pub fn has_cycle<T: Scalar>(g: &TangentDigraph<T>) -> bool {
    let mut uf = UnionFind::new(g.vertex_count());
    g.edges.iter().any(|e| {
        let (a, b) = g.endpoints(e);
        !uf.union(a, b)
    })
}
