//! Vertex-weighted conflict graphs and exact maximum-weight independent set
//! solvers.
//!
//! A [`WeightedGraph`] is the MWIS instance: every vertex carries a real
//! weight and every edge forbids selecting both endpoints. Two independent
//! exact solvers live in [`mwis`]: a branch-and-bound search used as the
//! classical baseline and a plain subset enumeration used as a test oracle.

mod format;
mod mwis;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use format::{parse_graph, GraphFile};
pub use mwis::{mwis_exact, mwis_exact_with, mwis_exhaustive, MwisBudget, EXHAUSTIVE_LIMIT};

/// Absolute tolerance used when comparing total weights for ties.
pub const WEIGHT_TOL: f64 = 1e-12;

/// Undirected simple graph with a real weight on every vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GraphFile", into = "GraphFile")]
pub struct WeightedGraph {
    weights: Vec<f64>,
    /// Normalized `(i, j)` with `i < j`, sorted, no duplicates.
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl WeightedGraph {
    /// Builds a graph, rejecting self-loops, out-of-range endpoints and
    /// non-finite weights. Duplicate edges (in either orientation) are an
    /// error as well.
    pub fn new(weights: Vec<f64>, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let n = weights.len();
        if let Some(i) = weights.iter().position(|w| !w.is_finite()) {
            return Err(Error::input(format!("weight of vertex {i} is not finite")));
        }
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::input(format!(
                    "edge ({a}, {b}) references a vertex outside [0, {n})"
                )));
            }
            if a == b {
                return Err(Error::input(format!("self-loop on vertex {a}")));
            }
            let e = (a.min(b), a.max(b));
            if !set.insert(e) {
                return Err(Error::input(format!("duplicate edge ({}, {})", e.0, e.1)));
            }
        }
        let edges: Vec<_> = set.into_iter().collect();
        let mut adjacency = vec![Vec::new(); n];
        for &(a, b) in &edges {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(Self { weights, edges, adjacency })
    }

    /// Graph with no edges.
    pub fn edgeless(weights: Vec<f64>) -> Result<Self> {
        Self::new(weights, std::iter::empty())
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, v: usize) -> f64 {
        self.weights[v]
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        a < self.n() && self.adjacency[a].binary_search(&b).is_ok()
    }

    pub fn max_weight(&self) -> Option<f64> {
        self.weights.iter().copied().reduce(f64::max)
    }

    /// Checks that `s` only names vertices of this graph.
    pub fn check_set(&self, s: &VertexSet) -> Result<()> {
        match s.iter().find(|&v| v >= self.n()) {
            Some(v) => Err(Error::input(format!(
                "vertex {v} outside graph with {} vertices",
                self.n()
            ))),
            None => Ok(()),
        }
    }

    /// True iff no edge has both endpoints in `s`.
    pub fn is_independent(&self, s: &VertexSet) -> Result<bool> {
        self.check_set(s)?;
        Ok(s.iter()
            .all(|v| self.adjacency[v].iter().all(|u| !s.contains(*u))))
    }

    /// Sum of the weights of the selected vertices.
    pub fn total_weight(&self, s: &VertexSet) -> Result<f64> {
        self.check_set(s)?;
        Ok(s.iter().map(|v| self.weights[v]).sum())
    }

    /// Restriction to the vertices with strictly positive weight.
    ///
    /// Returns the reduced graph and, for every vertex of it, the index it had
    /// in `self`.
    pub fn drop_nonpositive(&self) -> (WeightedGraph, Vec<usize>) {
        let keep: Vec<usize> = (0..self.n()).filter(|&v| self.weights[v] > 0.0).collect();
        self.induced(&keep)
    }

    /// Subgraph induced by `vertices` (which must be sorted and in range).
    /// The second value maps new indices back to the original ones.
    pub fn induced(&self, vertices: &[usize]) -> (WeightedGraph, Vec<usize>) {
        let mut local = vec![usize::MAX; self.n()];
        for (i, &v) in vertices.iter().enumerate() {
            local[v] = i;
        }
        let weights = vertices.iter().map(|&v| self.weights[v]).collect();
        let edges: Vec<_> = self
            .edges
            .iter()
            .filter(|(a, b)| local[*a] != usize::MAX && local[*b] != usize::MAX)
            .map(|&(a, b)| (local[a], local[b]))
            .collect();
        let g = WeightedGraph::new(weights, edges).expect("induced subgraph of a valid graph");
        (g, vertices.to_vec())
    }

    /// Connected components, each as a sorted vertex list, ordered by their
    /// smallest vertex.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut stack = vec![start];
            let mut comp = Vec::new();
            while let Some(v) = stack.pop() {
                comp.push(v);
                for &u in &self.adjacency[v] {
                    if !seen[u] {
                        seen[u] = true;
                        stack.push(u);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Greedy repair: while some edge has both endpoints selected, drop the
    /// endpoint with the lower weight (the higher index on equal weight).
    pub fn repair(&self, s: &VertexSet) -> Result<VertexSet> {
        self.check_set(s)?;
        let mut selected: Vec<bool> = vec![false; self.n()];
        for v in s.iter() {
            selected[v] = true;
        }
        for &(a, b) in &self.edges {
            if selected[a] && selected[b] {
                let drop = if self.weights[a] < self.weights[b] { a } else { b };
                selected[drop] = false;
            }
        }
        Ok(VertexSet::from_iter((0..self.n()).filter(|&v| selected[v])))
    }
}

/// A subset of vertex indices (the vertices with `x_i = 1`).
///
/// Stored sorted, so the derived ordering is the lexicographic order of the
/// sorted index sequences, which is the tie-break order of the exact solvers.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexSet(Vec<usize>);

impl VertexSet {
    pub fn new() -> Self {
        Self(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// Re-indexes through `map` (e.g. the map returned by
    /// [`WeightedGraph::drop_nonpositive`]).
    pub fn remap(&self, map: &[usize]) -> VertexSet {
        VertexSet::from_iter(self.iter().map(|v| map[v]))
    }
}

impl FromIterator<usize> for VertexSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut v: Vec<usize> = iter.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Self(v)
    }
}

impl<const N: usize> From<[usize; N]> for VertexSet {
    fn from(a: [usize; N]) -> Self {
        a.into_iter().collect()
    }
}
