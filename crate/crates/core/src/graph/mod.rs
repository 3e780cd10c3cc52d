//! Undirected simple graphs stored as packed upper-triangular bits.
//!
//! A pair `{i, j}` with `i < j` maps to a single bit, so a graph on `n`
//! nodes costs `n(n-1)/16` bytes. Node ids are dense `0..n`.

mod edge_list;

pub use edge_list::{read_edge_list, read_labeled_edge_list, write_edge_list, LabeledGraph};

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("line {line}: malformed token `{token}`")]
    Parse { line: usize, token: String },
    #[error("line {line}: self-loop on node {node}")]
    SelfLoop { line: usize, node: usize },
    #[error("line {line}: node id {node} out of range for n = {n}")]
    OutOfRange { line: usize, node: usize, n: usize },
    #[error("graph must have at least one node")]
    Empty,
    #[error("io error: {0}")]
    Io(String),
}

/// Index of the unordered pair `{i, j}` (`i < j`) in lexicographic order.
#[inline]
pub fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

/// Number of unordered pairs on `n` nodes.
#[inline]
pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Iterates unordered pairs `(i, j)`, `i < j`, in lexicographic order.
pub fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
}

#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    bits: Vec<u64>,
    edge_count: usize,
}

impl std::fmt::Debug for Graph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Graph")
            .field("n", &self.n)
            .field("edges", &self.edge_count)
            .finish()
    }
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        let words = pair_count(n).div_ceil(64);
        Self {
            n,
            bits: vec![0; words],
            edge_count: 0,
        }
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Self::empty(n);
        for (i, j) in pairs(n) {
            g.set_edge(i, j);
        }
        g
    }

    /// Builds a graph from node pairs; duplicates and reversed pairs collapse.
    ///
    /// Panics on self-loops or ids `>= n`; use [`read_edge_list`] for
    /// untrusted input.
    pub fn from_edges<I>(n: usize, edges: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut g = Self::empty(n);
        for (a, b) in edges {
            assert!(a != b, "self-loop on node {a}");
            assert!(a < n && b < n, "node id out of range");
            g.set_edge(a.min(b), a.max(b));
        }
        g
    }

    /// Builds a graph from one presence flag per pair in lexicographic order.
    pub(crate) fn from_pair_flags(n: usize, flags: impl IntoIterator<Item = bool>) -> Self {
        let mut g = Self::empty(n);
        let mut count = 0;
        for (idx, present) in flags.into_iter().enumerate() {
            if present {
                g.bits[idx / 64] |= 1u64 << (idx % 64);
                count += 1;
            }
        }
        g.edge_count = count;
        g
    }

    fn set_edge(&mut self, i: usize, j: usize) {
        let idx = pair_index(self.n, i, j);
        let (w, b) = (idx / 64, idx % 64);
        if self.bits[w] & (1u64 << b) == 0 {
            self.bits[w] |= 1u64 << b;
            self.edge_count += 1;
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        if i == j {
            return false;
        }
        let idx = pair_index(self.n, i.min(j), i.max(j));
        self.bits[idx / 64] >> (idx % 64) & 1 == 1
    }

    /// Edges `(i, j)` with `i < j` in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        pairs(self.n)
            .enumerate()
            .filter(|(idx, _)| self.bits[idx / 64] >> (idx % 64) & 1 == 1)
            .map(|(_, e)| e)
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0usize; self.n];
        for (i, j) in self.edges() {
            deg[i] += 1;
            deg[j] += 1;
        }
        deg
    }

    /// Sorted adjacency lists.
    pub fn neighbor_lists(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for (i, j) in self.edges() {
            adj[i].push(j);
            adj[j].push(i);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    pub fn summarize(&self) -> DegreeSummary {
        let degrees = self.degrees();
        let m2 = degrees.iter().map(|&d| (d * d.saturating_sub(1) / 2) as u64).sum();
        let triangles = count_triangles(&self.neighbor_lists(), &degrees);
        DegreeSummary {
            m1: self.edge_count as u64,
            m2,
            triangles,
            degrees,
        }
    }
}

/// Degree-based summaries of a graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeSummary {
    pub degrees: Vec<usize>,
    /// Edge count.
    pub m1: u64,
    /// Wedge (2-star) count, `sum_i C(D_i, 2)`.
    pub m2: u64,
    pub triangles: u64,
}

// Each edge intersects the neighbor sets of its endpoints, walking the
// sparser side and probing the denser one; the `k > j` filter counts every
// triangle once.
fn count_triangles(adj: &[Vec<usize>], degrees: &[usize]) -> u64 {
    let mut count = 0u64;
    for (i, nbrs) in adj.iter().enumerate() {
        for &j in nbrs.iter().filter(|&&j| j > i) {
            let (small, large) = if degrees[i] <= degrees[j] {
                (&adj[i], &adj[j])
            } else {
                (&adj[j], &adj[i])
            };
            count += small
                .iter()
                .filter(|&&k| k > j && large.binary_search(&k).is_ok())
                .count() as u64;
        }
    }
    count
}
