//! Direction finding by minimum s-t cuts.
//!
//! For every way of keeping exactly one incoming `E3` edge per constraint
//! vertex, the tangent digraph is extended with a source feeding each `u_k`
//! (capacity `μ⁺_k`) and a sink fed by each column `j` (capacity `μ⁻_j`);
//! internal edges get capacity `D = Σ μ⁻`. The point is a local optimum iff
//! every such network has minimum cut `D`; otherwise the columns on the sink
//! side of a smaller cut form a feasible descent direction.

use crate::error::{Error, Result};
use crate::flow::FlowNetwork;
use crate::instance::Instance;
use crate::scalar::Scalar;
use crate::tangent::{build_tangent, is_feasible_direction, mu_rate, step_size, Direction, TangentDigraph};
use crate::trop::TropVector;

pub const DEFAULT_SUBGRAPH_CAP: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Vertex {
    Source,
    Sink,
    U(usize),
    V(usize),
    W(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtendedDigraph {
    p: usize,
    n: usize,
    m: usize,
    degree: u64,
    /// Column kept as the `E3` predecessor of each `w_i`.
    choice: Vec<Option<usize>>,
    net: FlowNetwork,
}

impl ExtendedDigraph {
    pub fn build<T: Scalar>(inst: &Instance<T>, g: &TangentDigraph<T>, choice: Vec<Option<usize>>) -> Self {
        let (p, n, m) = (g.p(), g.n(), g.m());
        let degree = inst.degree();
        let mut h = ExtendedDigraph { p, n, m, degree, choice, net: FlowNetwork::new(p + n + m + 2) };
        for k in 0..p {
            h.net.add_edge(h.id(Vertex::Source), h.id(Vertex::U(k)), inst.mu_plus()[k]);
        }
        for j in 0..n {
            h.net.add_edge(h.id(Vertex::V(j)), h.id(Vertex::Sink), inst.mu_minus()[j]);
        }
        for e in g.edges() {
            let (a, b) = match e.kind {
                crate::tangent::EdgeKind::E1 => (Vertex::U(e.row), Vertex::V(e.col)),
                crate::tangent::EdgeKind::E2 => (Vertex::W(e.row), Vertex::V(e.col)),
                crate::tangent::EdgeKind::E3 if h.choice[e.row] == Some(e.col) => (Vertex::V(e.col), Vertex::W(e.row)),
                crate::tangent::EdgeKind::E3 => continue,
            };
            h.net.add_edge(h.id(a), h.id(b), degree);
        }
        h
    }

    pub fn id(&self, v: Vertex) -> usize {
        match v {
            Vertex::Source => 0,
            Vertex::Sink => 1,
            Vertex::U(k) => 2 + k,
            Vertex::V(j) => 2 + self.p + j,
            Vertex::W(i) => 2 + self.p + self.n + i,
        }
    }

    pub fn vertex(&self, id: usize) -> Vertex {
        match id {
            0 => Vertex::Source,
            1 => Vertex::Sink,
            i if i < 2 + self.p => Vertex::U(i - 2),
            i if i < 2 + self.p + self.n => Vertex::V(i - 2 - self.p),
            i => Vertex::W(i - 2 - self.p - self.n),
        }
    }

    pub fn degree(&self) -> u64 {
        self.degree
    }

    pub fn choice(&self) -> &[Option<usize>] {
        &self.choice
    }

    /// `(from, to, capacity)` in insertion order.
    pub fn edges(&self) -> Vec<(Vertex, Vertex, u64)> {
        (0..self.net.edge_count())
            .map(|e| {
                let (a, b) = self.net.endpoints(e);
                (self.vertex(a), self.vertex(b), self.net.capacity(e))
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CutResult {
    pub capacity: u64,
    pub flow_value: u64,
    pub source_side: Vec<Vertex>,
    pub sink_side: Vec<Vertex>,
    /// Edge flows of the maximum flow: `(from, to, flow)`.
    pub flows: Vec<(Vertex, Vertex, u64)>,
}

impl CutResult {
    /// `T ∩ V`.
    pub fn sink_columns(&self) -> Vec<usize> {
        self.sink_side
            .iter()
            .filter_map(|v| match v {
                Vertex::V(j) => Some(*j),
                _ => None,
            })
            .collect()
    }
}

/// Minimum cut whose source side is everything reachable from `s` in the
/// residual network of a maximum flow.
pub fn min_cut(h: &ExtendedDigraph) -> CutResult {
    let (s, t) = (h.id(Vertex::Source), h.id(Vertex::Sink));
    let flow = h.net.max_flow(s, t);
    let mut capacity = 0;
    let mut flows = Vec::with_capacity(h.net.edge_count());
    for e in 0..h.net.edge_count() {
        let (a, b) = h.net.endpoints(e);
        if flow.source_side[a] && !flow.source_side[b] {
            capacity += h.net.capacity(e);
        }
        flows.push((h.vertex(a), h.vertex(b), flow.flows[e]));
    }
    let (src, snk): (Vec<usize>, Vec<usize>) = (0..h.net.vertex_count()).partition(|&v| flow.source_side[v]);
    CutResult {
        capacity,
        flow_value: flow.value,
        source_side: src.into_iter().map(|v| h.vertex(v)).collect(),
        sink_side: snk.into_iter().map(|v| h.vertex(v)).collect(),
        flows,
    }
}

/// Number of members of the subgraph family, saturating.
pub fn subgraph_count<T: Scalar>(g: &TangentDigraph<T>) -> u64 {
    (0..g.m()).fold(1u64, |acc, i| acc.saturating_mul(g.w_in(i).len().max(1) as u64))
}

/// Iterates the subgraph choices lexicographically by `(i, source column)`.
pub struct SubgraphChoices<'a, T> {
    g: &'a TangentDigraph<T>,
    digits: Option<Vec<usize>>,
}

impl<T: Scalar> Iterator for SubgraphChoices<'_, T> {
    type Item = Vec<Option<usize>>;

    fn next(&mut self) -> Option<Self::Item> {
        let digits = self.digits.as_mut()?;
        let out = (0..self.g.m()).map(|i| self.g.w_in(i).get(digits[i]).copied()).collect();
        // advance the mixed-radix counter, last row fastest
        let mut i = self.g.m();
        loop {
            if i == 0 {
                self.digits = None;
                break;
            }
            i -= 1;
            let radix = self.g.w_in(i).len().max(1);
            digits[i] += 1;
            if digits[i] < radix {
                break;
            }
            digits[i] = 0;
        }
        Some(out)
    }
}

pub fn subgraph_choices<T: Scalar>(g: &TangentDigraph<T>) -> SubgraphChoices<'_, T> {
    SubgraphChoices { g, digits: Some(vec![0; g.m()]) }
}

/// All members of the family, or `CapExceeded` with the family size.
pub fn enumerate_subgraphs<T: Scalar>(
    inst: &Instance<T>,
    g: &TangentDigraph<T>,
    cap: usize,
) -> Result<Vec<ExtendedDigraph>> {
    let count = subgraph_count(g);
    if count > cap as u64 {
        return Err(Error::CapExceeded(cap));
    }
    Ok(subgraph_choices(g).map(|c| ExtendedDigraph::build(inst, g, c)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MincutMode {
    /// Stop at the first subgraph with a cut below `D`.
    FirstHit,
    /// Evaluate every subgraph; report the first hit if there is one.
    CertifyAll,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MincutOutcome<T> {
    Found {
        direction: Direction<T>,
        /// Index of the subgraph in enumeration order.
        subgraph: u64,
        cut: CutResult,
        /// Cut capacities of the subgraphs evaluated.
        capacities: Vec<u64>,
    },
    LocallyOptimal {
        capacities: Vec<u64>,
    },
    CapExceeded {
        subgraphs: u64,
    },
}

pub fn find_direction_mincut<T: Scalar>(
    inst: &Instance<T>,
    x: &TropVector<T>,
    mode: MincutMode,
    cap: usize,
) -> Result<MincutOutcome<T>> {
    let g = build_tangent(inst, x)?;
    find_direction_mincut_in(inst, &g, x, mode, cap)
}

pub(crate) fn find_direction_mincut_in<T: Scalar>(
    inst: &Instance<T>,
    g: &TangentDigraph<T>,
    x: &TropVector<T>,
    mode: MincutMode,
    cap: usize,
) -> Result<MincutOutcome<T>> {
    let count = subgraph_count(g);
    if count > cap as u64 {
        return Ok(MincutOutcome::CapExceeded { subgraphs: count });
    }
    let d = inst.degree();
    let mut capacities = Vec::new();
    let mut hit: Option<(u64, CutResult)> = None;
    for (idx, choice) in subgraph_choices(g).enumerate() {
        let h = ExtendedDigraph::build(inst, g, choice);
        let cut = min_cut(&h);
        if cut.flow_value != cut.capacity || cut.capacity > d {
            return Err(Error::Internal(format!(
                "max-flow certificate failed: flow {} vs cut {}",
                cut.flow_value, cut.capacity
            )));
        }
        capacities.push(cut.capacity);
        if cut.capacity < d && hit.is_none() {
            hit = Some((idx as u64, cut));
            if mode == MincutMode::FirstHit {
                break;
            }
        }
    }
    let Some((subgraph, cut)) = hit else {
        return Ok(MincutOutcome::LocallyOptimal { capacities });
    };
    let cols = cut.sink_columns();
    let mu = mu_rate(inst, g, &cols);
    if cols.is_empty() || mu >= 0 || !is_feasible_direction(g, &cols) {
        return Err(Error::Internal(format!("cut below D gave a non-descent set {cols:?} (rate {mu})")));
    }
    let delta = step_size(inst, x, &cols)?;
    Ok(MincutOutcome::Found { direction: Direction { cols, mu, delta }, subgraph, cut, capacities })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::fixtures::{i1, i4, m, v};
    use crate::tangent::build_tangent;
    use crate::trop::{Extent, TropMatrix};

    #[test]
    fn i4_cuts() {
        let inst = i4();
        let g = build_tangent(&inst, &v(&[1, 0])).unwrap();
        let hs = enumerate_subgraphs(&inst, &g, 10).unwrap();
        assert_eq!(hs.len(), 1);
        assert_eq!(min_cut(&hs[0]).capacity, 2);

        let g = build_tangent(&inst, &v(&[0, 0])).unwrap();
        let hs = enumerate_subgraphs(&inst, &g, 10).unwrap();
        let cut = min_cut(&hs[0]);
        assert_eq!(cut.capacity, 1);
        assert_eq!(cut.sink_columns(), vec![0]);
    }

    #[test]
    fn i4_cuts_match_brute_force() {
        let inst = i4();
        for x in [v(&[0, 0]), v(&[1, 0]), v(&[3, 0])] {
            let g = build_tangent(&inst, &x).unwrap();
            let h = &enumerate_subgraphs(&inst, &g, 10).unwrap()[0];
            let edges = h.edges();
            let inner = h.net.vertex_count() - 2;
            let best = (0u32..1 << inner)
                .map(|mask| {
                    let side = |v: Vertex| match v {
                        Vertex::Source => true,
                        Vertex::Sink => false,
                        other => mask >> (h.id(other) - 2) & 1 == 1,
                    };
                    edges.iter().filter(|(a, b, _)| side(*a) && !side(*b)).map(|e| e.2).sum::<u64>()
                })
                .min()
                .unwrap();
            assert_eq!(min_cut(h).capacity, best);
        }
    }

    #[test]
    fn family_sizes() {
        // one constraint vertex with two tight E3 predecessors, another with three
        let e = Some(0);
        let inst = Instance::new(
            m(3, vec![vec![e, e, None], vec![e, e, e]]),
            m(3, vec![vec![None, None, e], vec![None, None, None]]),
            m(3, vec![vec![e, e, e]]),
            vec![3],
            vec![1, 1, 1],
        )
        .unwrap();
        let g = build_tangent(&inst, &v(&[0, 0, 0])).unwrap();
        assert_eq!(subgraph_count(&g), 6);
        assert_eq!(enumerate_subgraphs(&inst, &g, 10).unwrap().len(), 6);
        assert_eq!(enumerate_subgraphs(&inst, &g, 5), Err(Error::CapExceeded(5)));
        let choices: Vec<_> = subgraph_choices(&g).collect();
        assert_eq!(choices[0], vec![Some(0), Some(0)]);
        assert_eq!(choices[1], vec![Some(0), Some(1)]);
        assert_eq!(choices[5], vec![Some(1), Some(2)]);
    }

    #[test]
    fn unconstrained_is_single_subgraph() {
        let inst = Instance::new(
            TropMatrix::neg_inf(0, 2),
            TropMatrix::neg_inf(0, 2),
            m(2, vec![vec![Some(0), Some(0)]]),
            vec![2],
            vec![1, 1],
        )
        .unwrap();
        let g = build_tangent(&inst, &v(&[0, 0])).unwrap();
        assert_eq!(enumerate_subgraphs(&inst, &g, 10).unwrap().len(), 1);
    }

    #[test]
    fn disjoint_stars_have_empty_cut() {
        let inst = i4();
        let g = build_tangent(&inst, &v(&[0, 0])).unwrap();
        let mut bare = ExtendedDigraph::build(&inst, &g, vec![None]);
        bare.net = FlowNetwork::new(bare.net.vertex_count());
        bare.net.add_edge(0, bare.id(Vertex::U(0)), 2);
        bare.net.add_edge(bare.id(Vertex::V(0)), 1, 1);
        bare.net.add_edge(bare.id(Vertex::V(1)), 1, 1);
        let cut = min_cut(&bare);
        assert_eq!((cut.capacity, cut.flow_value), (0, 0));
        assert_eq!(cut.source_side, vec![Vertex::Source, Vertex::U(0)]);
    }

    #[test]
    fn direction_at_i4_origin() {
        match find_direction_mincut(&i4(), &v(&[0, 0]), MincutMode::FirstHit, 100).unwrap() {
            MincutOutcome::Found { direction, cut, .. } => {
                assert_eq!(direction.cols, vec![0]);
                assert_eq!(direction.mu, -1);
                assert_eq!(direction.delta, Extent::Finite(1));
                assert_eq!(cut.capacity, 1);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(
            find_direction_mincut(&i4(), &v(&[1, 0]), MincutMode::CertifyAll, 100).unwrap(),
            MincutOutcome::LocallyOptimal { capacities: vec![2] }
        );
    }

    #[test]
    fn degenerate_point_is_optimal() {
        assert!(matches!(
            find_direction_mincut(&i1(), &v(&[0, 0]), MincutMode::CertifyAll, 100).unwrap(),
            MincutOutcome::LocallyOptimal { .. }
        ));
    }
}
