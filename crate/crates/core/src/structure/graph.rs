use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{OtError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphKind {
    Support,
    Tight,
    GGamma,
}

/// Bipartite graph on `m` source nodes and `n` target nodes. Edges are
/// `(source, target)` pairs kept sorted and unique.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportGraph {
    pub m: usize,
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
    pub kind: GraphKind,
}

/// Connected component: source indices and target indices, both sorted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Component {
    pub sources: Vec<usize>,
    pub targets: Vec<usize>,
}

struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// False when `a` and `b` were already joined.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}

impl SupportGraph {
    pub fn new(m: usize, n: usize, mut edges: Vec<(usize, usize)>, kind: GraphKind) -> Result<Self> {
        if let Some(&(i, j)) = edges.iter().find(|(i, j)| *i >= m || *j >= n) {
            return Err(OtError::InvalidInput(format!("edge ({i}, {j}) outside a {m} x {n} graph")));
        }
        edges.sort_unstable();
        edges.dedup();
        Ok(Self { m, n, edges, kind })
    }

    pub fn contains(&self, e: (usize, usize)) -> bool {
        self.edges.binary_search(&e).is_ok()
    }

    pub fn is_subgraph_of(&self, other: &SupportGraph) -> bool {
        self.m == other.m && self.n == other.n && self.edges.iter().all(|e| other.contains(*e))
    }

    /// Node ids: sources `0..m`, targets `m..m+n`.
    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.m + self.n];
        for &(i, j) in &self.edges {
            adj[i].push(self.m + j);
            adj[self.m + j].push(i);
        }
        adj
    }

    /// Forest test by union-find.
    pub fn is_acyclic(&self) -> bool {
        let mut uf = UnionFind::new(self.m + self.n);
        self.edges.iter().all(|&(i, j)| uf.union(i, self.m + j))
    }

    /// Nodes with no incident edge: `(sources, targets)`.
    pub fn isolated(&self) -> (Vec<usize>, Vec<usize>) {
        let adj = self.adjacency();
        (
            (0..self.m).filter(|&i| adj[i].is_empty()).collect(),
            (0..self.n).filter(|&j| adj[self.m + j].is_empty()).collect(),
        )
    }

    /// Components over all `m + n` nodes, ordered by their smallest node id.
    pub fn components(&self) -> Vec<Component> {
        let adj = self.adjacency();
        let mut seen = vec![false; self.m + self.n];
        let mut out = Vec::new();
        for start in 0..self.m + self.n {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut queue = VecDeque::from([start]);
            let mut comp = Component {
                sources: Vec::new(),
                targets: Vec::new(),
            };
            while let Some(u) = queue.pop_front() {
                if u < self.m {
                    comp.sources.push(u);
                } else {
                    comp.targets.push(u - self.m);
                }
                for &w in &adj[u] {
                    if !seen[w] {
                        seen[w] = true;
                        queue.push_back(w);
                    }
                }
            }
            comp.sources.sort_unstable();
            comp.targets.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() == 1
    }

    /// One simple cycle as a node walk `[s, t, s', t', ...]` in node ids
    /// (sources `< m`), or `None` for a forest.
    pub(crate) fn find_cycle_nodes(&self) -> Option<Vec<usize>> {
        let adj = self.adjacency();
        let total = self.m + self.n;
        let mut parent = vec![usize::MAX; total];
        let mut depth = vec![usize::MAX; total];
        for root in 0..total {
            if depth[root] != usize::MAX {
                continue;
            }
            depth[root] = 0;
            let mut stack = vec![root];
            while let Some(u) = stack.pop() {
                for &w in &adj[u] {
                    if w == parent[u] {
                        continue;
                    }
                    if depth[w] == usize::MAX {
                        depth[w] = depth[u] + 1;
                        parent[w] = u;
                        stack.push(w);
                    } else {
                        // non-tree edge u-w closes a cycle through their common ancestor
                        let (mut a, mut b) = (u, w);
                        let (mut left, mut right) = (vec![a], vec![b]);
                        while depth[a] > depth[b] {
                            a = parent[a];
                            left.push(a);
                        }
                        while depth[b] > depth[a] {
                            b = parent[b];
                            right.push(b);
                        }
                        while a != b {
                            a = parent[a];
                            b = parent[b];
                            left.push(a);
                            right.push(b);
                        }
                        right.pop();
                        right.reverse();
                        left.extend(right);
                        return Some(left);
                    }
                }
            }
        }
        None
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("graph serialises")
    }

    pub fn from_json_value(v: serde_json::Value) -> Result<Self> {
        let g: Self = serde_json::from_value(v).map_err(|e| OtError::InvalidInput(format!("bad graph JSON: {e}")))?;
        Self::new(g.m, g.n, g.edges, g.kind)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(m: usize, n: usize, e: &[(usize, usize)]) -> SupportGraph {
        SupportGraph::new(m, n, e.to_vec(), GraphKind::Support).unwrap()
    }

    #[test]
    fn four_cycle_detected() {
        let k22 = g(2, 2, &[(0, 0), (0, 1), (1, 0), (1, 1)]);
        assert!(!k22.is_acyclic());
        let c = k22.find_cycle_nodes().unwrap();
        assert_eq!(c.len(), 4);
        assert!(k22.is_connected());
    }

    #[test]
    fn path_is_forest() {
        let p = g(2, 2, &[(0, 0), (1, 0), (1, 1)]);
        assert!(p.is_acyclic());
        assert!(p.find_cycle_nodes().is_none());
        assert!(p.is_connected());
    }

    #[test]
    fn matching_has_two_components() {
        let p = g(2, 2, &[(0, 0), (1, 1)]);
        let c = p.components();
        assert_eq!(c.len(), 2);
        assert_eq!(c[0], Component { sources: vec![0], targets: vec![0] });
    }

    #[test]
    fn isolated_nodes_listed() {
        let p = g(2, 3, &[(0, 0), (1, 1)]);
        assert_eq!(p.isolated(), (vec![], vec![2]));
    }

    #[test]
    fn json_round_trip() {
        let p = g(2, 2, &[(1, 1), (0, 0)]);
        let v = p.to_json_value();
        assert_eq!(v["kind"], "support");
        assert_eq!(SupportGraph::from_json_value(v).unwrap(), p);
    }

    #[test]
    fn out_of_range_edge_rejected() {
        assert!(SupportGraph::new(1, 1, vec![(0, 1)], GraphKind::Tight).is_err());
    }
}
