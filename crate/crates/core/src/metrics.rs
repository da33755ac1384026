//! Betweenness centrality per slice and its development over time.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, VecDeque};

use serde::Serialize;

use crate::data::{Slice, TimeSlicedGraph};
use crate::error::{Error, Result};
use crate::layout::DistanceTransform;

/// Relative tolerance under which two weighted path lengths count as equal.
const TIE_EPSILON: f64 = 1e-12;

/// Default rise in normalized betweenness that flags a node.
pub const DEFAULT_SPIKE_THRESHOLD: f64 = 0.1;

/// How path lengths are measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PathMetric {
    /// Hop counts; weights ignored.
    #[default]
    Hops,
    /// Edge lengths from the transformed weights.
    Weighted(DistanceTransform),
}

#[derive(Clone, Copy, PartialEq)]
struct Pending {
    dist: f64,
    node: usize,
}

impl Eq for Pending {}

impl Ord for Pending {
    fn cmp(&self, other: &Self) -> Ordering {
        other.dist.total_cmp(&self.dist).then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn same_length(a: f64, b: f64) -> bool {
    (a - b).abs() <= TIE_EPSILON * a.abs().max(b.abs())
}

/// Single-source shortest paths: visit order, path counts and predecessors.
fn shortest_path_dag(
    adj: &[Vec<(usize, f64)>],
    source: usize,
    weighted: bool,
) -> (Vec<usize>, Vec<f64>, Vec<Vec<usize>>) {
    let n = adj.len();
    let mut order = Vec::with_capacity(n);
    let mut sigma = vec![0.0; n];
    let mut preds = vec![Vec::new(); n];
    let mut dist = vec![f64::INFINITY; n];
    sigma[source] = 1.0;
    dist[source] = 0.0;
    if !weighted {
        let mut queue = VecDeque::from([source]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &(w, _) in &adj[v] {
                if dist[w].is_infinite() {
                    dist[w] = dist[v] + 1.0;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1.0 {
                    sigma[w] += sigma[v];
                    preds[w].push(v);
                }
            }
        }
        return (order, sigma, preds);
    }
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::from([Pending { dist: 0.0, node: source }]);
    while let Some(Pending { dist: dv, node: v }) = heap.pop() {
        if done[v] || dv > dist[v] {
            continue;
        }
        done[v] = true;
        order.push(v);
        for &(w, len) in &adj[v] {
            if done[w] {
                continue;
            }
            let cand = dv + len;
            if dist[w].is_finite() && same_length(cand, dist[w]) {
                sigma[w] += sigma[v];
                preds[w].push(v);
            } else if cand < dist[w] {
                dist[w] = cand;
                sigma[w] = sigma[v];
                preds[w] = vec![v];
                heap.push(Pending { dist: cand, node: w });
            }
        }
    }
    (order, sigma, preds)
}

/// Raw shortest-path betweenness of every present node of an undirected
/// slice (Brandes accumulation). Each unordered pair `{s, t}` contributes
/// `σ_st(v) / σ_st` to every intermediate `v`.
pub fn betweenness_centrality(slice: &Slice, metric: PathMetric) -> Result<BTreeMap<usize, f64>> {
    let (nodes, adj) = slice.local_adjacency();
    if nodes.is_empty() {
        return Err(Error::EmptySlice(slice.time().to_string()));
    }
    let (adj, weighted) = match metric {
        PathMetric::Hops => (adj, false),
        PathMetric::Weighted(transform) => {
            let adj = adj
                .into_iter()
                .map(|nbrs| nbrs.into_iter().map(|(j, w)| Ok((j, transform.apply(w)?))).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()?;
            (adj, true)
        }
    };
    let n = nodes.len();
    let mut score = vec![0.0; n];
    for s in 0..n {
        let (order, sigma, preds) = shortest_path_dag(&adj, s, weighted);
        let mut delta = vec![0.0; n];
        for &w in order.iter().rev() {
            for &v in &preds[w] {
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            }
            if w != s {
                score[w] += delta[w];
            }
        }
    }
    // every unordered pair was counted from both ends
    Ok(nodes.into_iter().zip(score.into_iter().map(|x| x / 2.0)).collect())
}

/// Divides raw undirected betweenness by `(n−1)(n−2)/2`.
pub fn normalize_betweenness(raw: &BTreeMap<usize, f64>) -> BTreeMap<usize, f64> {
    let n = raw.len() as f64;
    let pairs = (n - 1.0) * (n - 2.0) / 2.0;
    raw.iter().map(|(&k, &v)| (k, if pairs > 0.0 { v / pairs } else { 0.0 })).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SliceCentrality {
    pub time: String,
    pub raw: BTreeMap<usize, f64>,
    pub normalized: BTreeMap<usize, f64>,
}

/// A node whose normalized betweenness rose by more than the threshold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpikeFlag {
    pub node: usize,
    /// Index of the slice where the rise is observed.
    pub slice: usize,
    pub from: f64,
    pub to: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CentralitySeries {
    pub slices: Vec<SliceCentrality>,
    pub flags: Vec<SpikeFlag>,
    pub threshold: f64,
}

impl CentralitySeries {
    pub fn flagged_in(&self, slice: usize) -> impl Iterator<Item = usize> + '_ {
        self.flags.iter().filter(move |f| f.slice == slice).map(|f| f.node)
    }
}

/// Betweenness per slice plus flags for nodes whose normalized value rises
/// by more than `spike_threshold` from one slice to the next. A node absent
/// from the earlier slice counts as 0 there.
pub fn centrality_series(
    graph: &TimeSlicedGraph,
    spike_threshold: f64,
    metric: PathMetric,
) -> Result<CentralitySeries> {
    if graph.slices().is_empty() {
        return Err(Error::EmptySeries);
    }
    let slices = graph
        .slices()
        .iter()
        .map(|s| {
            let raw = betweenness_centrality(s, metric)
                .map_err(|e| Error::InSlice { label: s.time().to_string(), source: Box::new(e) })?;
            let normalized = normalize_betweenness(&raw);
            Ok(SliceCentrality { time: s.time().to_string(), raw, normalized })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut flags = Vec::new();
    for (t, w) in slices.windows(2).enumerate() {
        for (&node, &to) in &w[1].normalized {
            let from = w[0].normalized.get(&node).copied().unwrap_or(0.0);
            if to - from > spike_threshold {
                flags.push(SpikeFlag { node, slice: t + 1, from, to });
            }
        }
    }
    Ok(CentralitySeries { slices, flags, threshold: spike_threshold })
}
