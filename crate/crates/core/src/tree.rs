//! Direction finding on spanning-tree tangent digraphs.
//!
//! When the tangent digraph is a spanning tree, removing one edge splits it
//! in two. The side holding the edge's `U`/`W` endpoint yields the candidate
//! direction `J = V(𝒯)`, which is feasible unless the edge was the only
//! `E3` edge into its constraint vertex, and whose rate is the subtree sum
//! `Σ μ⁺(U(𝒯)) − Σ μ⁻(V(𝒯))`. One bottom-up pass computes every sum.

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::scalar::Scalar;
use crate::tangent::{
    build_tangent, has_cycle, make_connected, step_size_counted, ConnectMove, ConnectedResult, Direction, EdgeKind,
    TangentDigraph, TangentEdge,
};
use crate::trop::TropVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeStat {
    pub edge: TangentEdge,
    /// Member of `E°(x)`.
    pub removable: bool,
    /// `μ(𝒯(e,x))`.
    pub mu: i64,
    /// `|V(𝒯(e,x))|`.
    pub columns: usize,
    /// Whether `𝒯(e,x)` is the subtree below the row endpoint (otherwise
    /// it is the complement of the subtree below the column endpoint).
    row_below: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeAnalysis {
    /// One entry per tangent edge, in edge order.
    pub edges: Vec<EdgeStat>,
    /// Parent edge index of each undirected vertex; `None` at the root.
    pub parent: Vec<Option<usize>>,
    pub root: usize,
    children: Vec<Vec<usize>>,
    endpoints: Vec<(usize, usize)>,
    /// Vertex and edge visits.
    pub ops: u64,
}

impl TreeAnalysis {
    pub fn removable(&self) -> impl Iterator<Item = &EdgeStat> {
        self.edges.iter().filter(|s| s.removable)
    }

    /// `V(𝒯(e,x))` for the edge at `idx`, sorted.
    pub fn side_columns<T: Scalar>(&self, g: &TangentDigraph<T>, idx: usize) -> Vec<usize> {
        let stat = &self.edges[idx];
        let (row, col) = self.endpoints[idx];
        let top = if stat.row_below { row } else { col };
        let mut below = vec![false; g.vertex_count()];
        let mut stack = vec![top];
        while let Some(v) = stack.pop() {
            below[v] = true;
            stack.extend(self.children[v].iter().copied());
        }
        (0..g.n()).filter(|&j| below[g.v_vertex(j)] == stat.row_below).collect()
    }
}

/// Subtree rates for every edge of a spanning-tree tangent digraph.
pub fn subtree_stats<T: Scalar>(inst: &Instance<T>, g: &TangentDigraph<T>) -> Result<TreeAnalysis> {
    if !g.is_spanning_tree() {
        return Err(Error::NotATree);
    }
    let nv = g.vertex_count();
    let endpoints: Vec<(usize, usize)> = g.edges().iter().map(|e| g.endpoints(e)).collect();
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nv];
    for (idx, &(a, b)) in endpoints.iter().enumerate() {
        adj[a].push((b, idx));
        adj[b].push((a, idx));
    }
    let root = g.v_vertex(0);
    let mut parent = vec![None; nv];
    let mut children = vec![Vec::new(); nv];
    let mut order = Vec::with_capacity(nv);
    let mut seen = vec![false; nv];
    seen[root] = true;
    order.push(root);
    let mut head = 0;
    while head < order.len() {
        let v = order[head];
        head += 1;
        for &(w, idx) in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                parent[w] = Some(idx);
                children[v].push(w);
                order.push(w);
            }
        }
    }
    let weight = |v: usize| -> (i64, usize) {
        if v < g.p() {
            (inst.mu_plus()[v] as i64, 0)
        } else if v < g.p() + g.n() {
            (-(inst.mu_minus()[v - g.p()] as i64), 1)
        } else {
            (0, 0)
        }
    };
    let mut sub: Vec<(i64, usize)> = (0..nv).map(weight).collect();
    for &v in order.iter().rev() {
        if let Some(idx) = parent[v] {
            let (a, b) = endpoints[idx];
            let up = if a == v { b } else { a };
            sub[up].0 += sub[v].0;
            sub[up].1 += sub[v].1;
        }
    }
    let total = sub[root];
    let edges = g
        .edges()
        .iter()
        .enumerate()
        .map(|(idx, e)| {
            let (row, col) = endpoints[idx];
            let row_below = parent[row] == Some(idx);
            let (mu, columns) = if row_below {
                sub[row]
            } else {
                (total.0 - sub[col].0, total.1 - sub[col].1)
            };
            let removable = match e.kind {
                EdgeKind::E1 | EdgeKind::E2 => true,
                EdgeKind::E3 => g.w_in(e.row).len() >= 2,
            };
            EdgeStat { edge: *e, removable, mu, columns, row_below }
        })
        .collect();
    let ops = 2 * (nv + g.edges().len()) as u64;
    Ok(TreeAnalysis { edges, parent, root, children, endpoints, ops })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TreeOutcome<T> {
    Found { direction: Direction<T>, edge: TangentEdge },
    /// No removable edge has a negative subtree rate.
    LocallyOptimal { removable: usize },
    /// The tangent digraph has a cycle, so the instance is degenerate.
    DegeneracyDetected,
}

/// Scan `E°(x)` for the most negative subtree rate, ties broken by edge
/// order. Subtrees with no column or with every column are skipped.
pub fn find_direction_tree<T: Scalar>(inst: &Instance<T>, x: &TropVector<T>) -> Result<TreeOutcome<T>> {
    let g = build_tangent(inst, x)?;
    find_direction_tree_in(inst, &g, x).map(|(o, _)| o)
}

pub(crate) fn find_direction_tree_in<T: Scalar>(
    inst: &Instance<T>,
    g: &TangentDigraph<T>,
    x: &TropVector<T>,
) -> Result<(TreeOutcome<T>, u64)> {
    if has_cycle(g) {
        return Ok((TreeOutcome::DegeneracyDetected, 0));
    }
    let analysis = subtree_stats(inst, g)?;
    let mut ops = analysis.ops;
    let best = analysis
        .edges
        .iter()
        .enumerate()
        .filter(|(_, s)| s.removable && s.mu < 0 && s.columns > 0 && s.columns < g.n())
        .min_by_key(|(_, s)| (s.mu, s.edge));
    let Some((idx, stat)) = best else {
        return Ok((TreeOutcome::LocallyOptimal { removable: analysis.removable().count() }, ops));
    };
    let cols = analysis.side_columns(g, idx);
    ops += g.vertex_count() as u64;
    let delta = step_size_counted(inst, x, &cols, &mut ops)?;
    let direction = Direction { cols, mu: stat.mu, delta };
    Ok((TreeOutcome::Found { direction, edge: stat.edge }, ops))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TreeifyOutcome<T> {
    Tree { x: TropVector<T>, moves: Vec<ConnectMove<T>> },
    Unbounded { x: TropVector<T>, direction: Vec<usize> },
    DegeneracyDetected { x: TropVector<T>, moves: Vec<ConnectMove<T>> },
}

/// Connect the tangent digraph and check that the result is a tree.
pub fn treeify_initial<T: Scalar>(inst: &Instance<T>, x: &TropVector<T>) -> Result<TreeifyOutcome<T>> {
    match make_connected(inst, x)? {
        ConnectedResult::Unbounded { x, direction } => Ok(TreeifyOutcome::Unbounded { x, direction }),
        ConnectedResult::Connected { x, moves } => {
            if build_tangent(inst, &x)?.is_spanning_tree() {
                Ok(TreeifyOutcome::Tree { x, moves })
            } else {
                Ok(TreeifyOutcome::DegeneracyDetected { x, moves })
            }
        }
    }
}
