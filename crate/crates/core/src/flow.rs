//! Shortest-augmenting-path maximum flow (Edmonds–Karp) on small networks.

use std::collections::VecDeque;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowNetwork {
    heads: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<u64>,
}

/// Maximum flow with the source side of a minimum cut.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaxFlow {
    pub value: u64,
    /// Flow on each edge, in insertion order.
    pub flows: Vec<u64>,
    /// Vertices reachable from the source in the final residual network.
    pub source_side: Vec<bool>,
}

impl FlowNetwork {
    pub fn new(vertices: usize) -> Self {
        FlowNetwork { heads: vec![Vec::new(); vertices], to: Vec::new(), cap: Vec::new() }
    }

    pub fn vertex_count(&self) -> usize {
        self.heads.len()
    }

    pub fn edge_count(&self) -> usize {
        self.to.len() / 2
    }

    /// Returns the edge index.
    pub fn add_edge(&mut self, from: usize, to: usize, cap: u64) -> usize {
        let idx = self.to.len();
        self.heads[from].push(idx);
        self.to.push(to);
        self.cap.push(cap);
        self.heads[to].push(idx + 1);
        self.to.push(from);
        self.cap.push(0);
        idx / 2
    }

    pub fn endpoints(&self, edge: usize) -> (usize, usize) {
        (self.to[2 * edge + 1], self.to[2 * edge])
    }

    pub fn capacity(&self, edge: usize) -> u64 {
        self.cap[2 * edge]
    }

    pub fn max_flow(&self, s: usize, t: usize) -> MaxFlow {
        let mut residual = self.cap.clone();
        let nv = self.vertex_count();
        let mut value = 0u64;
        let mut via = vec![usize::MAX; nv];
        loop {
            via.iter_mut().for_each(|v| *v = usize::MAX);
            let mut seen = vec![false; nv];
            seen[s] = true;
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                if u == t {
                    break;
                }
                for &e in &self.heads[u] {
                    let w = self.to[e];
                    if !seen[w] && residual[e] > 0 {
                        seen[w] = true;
                        via[w] = e;
                        queue.push_back(w);
                    }
                }
            }
            if !seen[t] {
                let flows = (0..self.edge_count()).map(|e| residual[2 * e + 1]).collect();
                return MaxFlow { value, flows, source_side: seen };
            }
            let mut push = u64::MAX;
            let mut v = t;
            while v != s {
                let e = via[v];
                push = push.min(residual[e]);
                v = self.to[e ^ 1];
            }
            let mut v = t;
            while v != s {
                let e = via[v];
                residual[e] -= push;
                residual[e ^ 1] += push;
                v = self.to[e ^ 1];
            }
            value += push;
        }
    }
}
