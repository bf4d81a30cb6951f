//! Undirected, unweighted, connected graphs and the random families used in
//! the experiments.

mod generate;
mod io;

use std::collections::VecDeque;
use std::fmt;

use num_rational::Rational64;

use crate::error::GraphError;

pub use generate::{generate, GraphFamily};
pub use io::{load, parse_edge_list, save, to_edge_list};

pub type NodeId = usize;

/// Symmetric adjacency with sorted neighbor lists. Construction validates that
/// the graph is simple and connected, so every `Graph` value satisfies both.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    adjacency: Vec<Vec<NodeId>>,
}

impl Graph {
    /// Builds a graph from an undirected edge list. Each edge must appear once.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (NodeId, NodeId)>,
    {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        let mut adjacency = vec![Vec::new(); n];
        for (u, v) in edges {
            for id in [u, v] {
                if id >= n {
                    return Err(GraphError::NodeOutOfRange { id, n });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for (u, list) in adjacency.iter_mut().enumerate() {
            list.sort_unstable();
            if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
                return Err(GraphError::DuplicateEdge(u.min(w[0]), u.max(w[0])));
            }
        }
        Self::from_sorted_adjacency(adjacency)
    }

    /// Adjacency lists must already be sorted, symmetric and loop-free.
    pub(crate) fn from_sorted_adjacency(adjacency: Vec<Vec<NodeId>>) -> Result<Self, GraphError> {
        let g = Graph { adjacency };
        if let Some(component) = g.unreachable_component() {
            return Err(GraphError::Disconnected { component });
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.adjacency.len()
    }

    pub fn neighbors(&self, i: NodeId) -> &[NodeId] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: NodeId) -> usize {
        self.adjacency[i].len()
    }

    pub fn degrees(&self) -> impl Iterator<Item = usize> + '_ {
        self.adjacency.iter().map(Vec::len)
    }

    pub fn edge_count(&self) -> usize {
        self.degrees().sum::<usize>() / 2
    }

    /// Each undirected edge once, as `(u, v)` with `u < v`, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, adj)| adj.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.adjacency[u].binary_search(&v).is_ok()
    }

    /// Exact mean degree `2|E| / n`.
    pub fn average_degree(&self) -> Rational64 {
        Rational64::new(2 * self.edge_count() as i64, self.n() as i64)
    }

    pub fn max_degree(&self) -> usize {
        self.degrees().max().unwrap_or(0)
    }

    /// BFS distances from `source`; `usize::MAX` marks unreachable nodes.
    pub fn bfs_distances(&self, source: NodeId) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.n()];
        let mut queue = VecDeque::new();
        self.bfs_into(source, &mut dist, &mut queue);
        dist
    }

    fn bfs_into(&self, source: NodeId, dist: &mut [usize], queue: &mut VecDeque<NodeId>) -> usize {
        dist.fill(usize::MAX);
        queue.clear();
        dist[source] = 0;
        queue.push_back(source);
        let mut far = 0;
        while let Some(u) = queue.pop_front() {
            let du = dist[u];
            far = du;
            for &v in &self.adjacency[u] {
                if dist[v] == usize::MAX {
                    dist[v] = du + 1;
                    queue.push_back(v);
                }
            }
        }
        far
    }

    /// Eccentricity of every node (exact, one BFS per node).
    pub fn eccentricities(&self) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.n()];
        let mut queue = VecDeque::with_capacity(self.n());
        (0..self.n())
            .map(|s| self.bfs_into(s, &mut dist, &mut queue))
            .collect()
    }

    /// Longest shortest path over all pairs.
    ///
    /// Exact, by fringe upper bounding (iFUB) from a highest-degree node: the
    /// eccentricities of BFS layers are examined from the outermost inwards
    /// until the lower bound meets the upper bound. Usually a handful of BFS
    /// runs instead of `n`.
    pub fn diameter(&self) -> usize {
        let n = self.n();
        let mut dist = vec![usize::MAX; n];
        let mut queue = VecDeque::with_capacity(n);
        let root = (0..n)
            .max_by_key(|&i| (self.degree(i), std::cmp::Reverse(i)))
            .unwrap_or(0);
        let ecc_root = self.bfs_into(root, &mut dist, &mut queue);
        let mut layers = vec![Vec::new(); ecc_root + 1];
        for (v, &d) in dist.iter().enumerate() {
            layers[d].push(v);
        }
        let mut lower = ecc_root;
        let mut i = ecc_root;
        while i > 0 && 2 * i > lower {
            for &v in &layers[i] {
                lower = lower.max(self.bfs_into(v, &mut dist, &mut queue));
            }
            if lower > 2 * (i - 1) {
                break;
            }
            i -= 1;
        }
        lower
    }

    fn unreachable_component(&self) -> Option<Vec<NodeId>> {
        let dist = self.bfs_distances(0);
        let first = dist.iter().position(|&d| d == usize::MAX)?;
        let from_first = self.bfs_distances(first);
        Some(
            from_first
                .iter()
                .enumerate()
                .filter(|(_, &d)| d != usize::MAX)
                .map(|(i, _)| i)
                .collect(),
        )
    }
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph")
            .field("n", &self.n())
            .field("edges", &self.edge_count())
            .finish()
    }
}

pub fn diameter(g: &Graph) -> usize {
    g.diameter()
}

pub fn average_degree(g: &Graph) -> Rational64 {
    g.average_degree()
}
