//! Weighted undirected graphs observed over an ordered series of time slices.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashSet};

use crate::error::{Error, Result};

/// A node of the shared universe.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeInfo {
    pub id: String,
    pub label: String,
}

impl NodeInfo {
    pub fn new(id: impl Into<String>) -> Self {
        let id = id.into();
        Self { label: id.clone(), id }
    }
}

/// Undirected edge between universe indices `a < b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
}

/// One observation of the graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Slice {
    time: String,
    edges: Vec<Edge>,
    present: BTreeSet<usize>,
}

impl Slice {
    /// Builds a slice; edge endpoints are added to `present` and edges are
    /// stored with `a < b`, sorted.
    pub fn new(
        time: impl Into<String>,
        edges: impl IntoIterator<Item = (usize, usize, f64)>,
        present: impl IntoIterator<Item = usize>,
    ) -> Result<Self> {
        let time = time.into();
        let mut present: BTreeSet<usize> = present.into_iter().collect();
        let mut out = Vec::new();
        let mut seen = HashSet::new();
        for (u, v, weight) in edges {
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop on node {u} in slice `{time}`")));
            }
            if !(weight.is_finite() && weight > 0.0) {
                return Err(Error::InvalidGraph(format!("non-positive weight {weight} in slice `{time}`")));
            }
            let (a, b) = if u < v { (u, v) } else { (v, u) };
            if !seen.insert((a, b)) {
                return Err(Error::InvalidGraph(format!("duplicate edge {a}-{b} in slice `{time}`")));
            }
            present.insert(a);
            present.insert(b);
            out.push(Edge { a, b, weight });
        }
        out.sort_by_key(|e| (e.a, e.b));
        Ok(Self { time, edges: out, present })
    }

    pub fn time(&self) -> &str {
        &self.time
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn present(&self) -> &BTreeSet<usize> {
        &self.present
    }

    pub fn is_present(&self, node: usize) -> bool {
        self.present.contains(&node)
    }

    pub fn weight(&self, u: usize, v: usize) -> Option<f64> {
        let key = if u < v { (u, v) } else { (v, u) };
        self.edges.binary_search_by_key(&key, |e| (e.a, e.b)).ok().map(|i| self.edges[i].weight)
    }

    /// Present nodes in ascending order plus an adjacency list over their
    /// local (0-based) positions.
    pub fn local_adjacency(&self) -> (Vec<usize>, Vec<Vec<(usize, f64)>>) {
        let nodes: Vec<usize> = self.present.iter().copied().collect();
        let local = |g: usize| nodes.binary_search(&g).expect("edge endpoint is present");
        let mut adj = vec![Vec::new(); nodes.len()];
        for e in &self.edges {
            let (i, j) = (local(e.a), local(e.b));
            adj[i].push((j, e.weight));
            adj[j].push((i, e.weight));
        }
        (nodes, adj)
    }
}

/// Compares time (or node) labels: numerically when both parse as numbers,
/// otherwise lexicographically.
pub fn label_order(a: &str, b: &str) -> Ordering {
    match (a.trim().parse::<f64>(), b.trim().parse::<f64>()) {
        (Ok(x), Ok(y)) => x.total_cmp(&y).then_with(|| a.cmp(b)),
        _ => a.cmp(b),
    }
}

/// Sorts labels numerically if every label is numeric, lexicographically
/// otherwise.
pub fn sort_labels(labels: &mut [String]) {
    if labels.iter().all(|l| l.trim().parse::<f64>().is_ok()) {
        labels.sort_by(|a, b| label_order(a, b));
    } else {
        labels.sort();
    }
}

/// An ordered sequence of slices over a shared node universe.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSlicedGraph {
    nodes: Vec<NodeInfo>,
    slices: Vec<Slice>,
}

impl TimeSlicedGraph {
    pub fn new(nodes: Vec<NodeInfo>, slices: Vec<Slice>) -> Result<Self> {
        let mut ids = HashSet::new();
        for n in &nodes {
            if !ids.insert(n.id.as_str()) {
                return Err(Error::InvalidGraph(format!("duplicate node id `{}`", n.id)));
            }
        }
        for s in &slices {
            if let Some(&bad) = s.present.iter().find(|&&i| i >= nodes.len()) {
                return Err(Error::InvalidGraph(format!("slice `{}` references unknown node {bad}", s.time)));
            }
        }
        let all_numeric = slices.iter().all(|s| s.time.trim().parse::<f64>().is_ok());
        for w in slices.windows(2) {
            let ord = if all_numeric { label_order(&w[0].time, &w[1].time) } else { w[0].time.cmp(&w[1].time) };
            if ord != Ordering::Less {
                return Err(Error::InvalidGraph(format!(
                    "time labels not strictly increasing: `{}` then `{}`",
                    w[0].time, w[1].time
                )));
            }
        }
        Ok(Self { nodes, slices })
    }

    pub fn nodes(&self) -> &[NodeInfo] {
        &self.nodes
    }

    pub fn slices(&self) -> &[Slice] {
        &self.slices
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.id == id)
    }
}
