use super::csr::Csr;
use super::GraphError;

/// Undirected, unweighted simple graph on nodes `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adj: Csr,
    edge_count: usize,
}

impl Graph {
    /// Builds a graph, rejecting self-loops, duplicate edges and out-of-range endpoints.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(GraphError::DanglingReplica(u.max(v)));
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
        }
        let adj = Csr::from_undirected(n, edges);
        for u in 0..n {
            if adj.neighbors(u).windows(2).any(|w| w[0] == w[1]) {
                let v = adj.neighbors(u).windows(2).find(|w| w[0] == w[1]).unwrap()[0];
                return Err(GraphError::DuplicateEdge(u.min(v), u.max(v)));
            }
        }
        Ok(Self {
            adj,
            edge_count: edges.len(),
        })
    }

    /// Like [`Graph::from_edges`] but silently drops duplicates and self-loops.
    pub fn from_edges_dedup(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut norm: Vec<(usize, usize)> = edges
            .iter()
            .filter(|(u, v)| u != v)
            .map(|&(u, v)| (u.min(v), u.max(v)))
            .collect();
        norm.sort_unstable();
        norm.dedup();
        let adj = Csr::from_undirected(n, &norm);
        Self {
            adj,
            edge_count: norm.len(),
        }
    }

    pub(crate) fn from_csr(adj: Csr) -> Self {
        let edge_count = adj.nnz() / 2;
        Self { adj, edge_count }
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn neighbors(&self, n: usize) -> &[usize] {
        self.adj.neighbors(n)
    }

    pub fn degree(&self, n: usize) -> usize {
        self.adj.degree(n)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj.contains(u, v)
    }

    /// Edges `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.adj.undirected_edges()
    }

    pub fn adjacency(&self) -> &Csr {
        &self.adj
    }

    pub fn density(&self) -> f64 {
        let n = self.node_count() as f64;
        if n < 2.0 {
            return 0.0;
        }
        2.0 * self.edge_count as f64 / (n * (n - 1.0))
    }
}
