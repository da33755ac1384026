use crate::error::{Error, Result};

/// Symmetric target dissimilarities between the nodes of one slice.
///
/// `nodes` holds universe indices; entries are addressed by local position.
/// Unreachable pairs carry no distance.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    nodes: Vec<usize>,
    values: Vec<f64>,
}

impl DistanceMatrix {
    /// Builds a matrix from full rows, with `f64::INFINITY` (or `None` via
    /// [`DistanceMatrix::from_options`]) marking unreachable pairs.
    pub fn from_rows(nodes: Vec<usize>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = nodes.len();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidDistances(format!("expected a {n}x{n} matrix")));
        }
        let mut sorted = nodes.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != n {
            return Err(Error::InvalidDistances("duplicate node in index list".into()));
        }
        let values: Vec<f64> = rows.into_iter().flatten().collect();
        for i in 0..n {
            if values[i * n + i] != 0.0 {
                return Err(Error::InvalidDistances(format!("non-zero diagonal at {i}")));
            }
            for j in (i + 1)..n {
                let (a, b) = (values[i * n + j], values[j * n + i]);
                if a != b && !(a.is_infinite() && b.is_infinite()) {
                    return Err(Error::InvalidDistances(format!("asymmetric entry ({i}, {j}): {a} vs {b}")));
                }
                if a.is_nan() || a == f64::NEG_INFINITY || (a.is_finite() && a <= 0.0) {
                    return Err(Error::InvalidDistances(format!("entry ({i}, {j}) = {a} is not a positive distance")));
                }
            }
        }
        Ok(Self { nodes, values })
    }

    pub fn from_options(nodes: Vec<usize>, rows: Vec<Vec<Option<f64>>>) -> Result<Self> {
        let rows = rows.into_iter().map(|r| r.into_iter().map(|d| d.unwrap_or(f64::INFINITY)).collect()).collect();
        Self::from_rows(nodes, rows)
    }

    /// Pairwise Euclidean distances between points; node `i` gets index `i`.
    pub fn euclidean(points: &[Vec<f64>]) -> Result<Self> {
        let n = points.len();
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| points[i].iter().zip(&points[j]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
                    .collect()
            })
            .collect();
        Self::from_rows((0..n).collect(), rows)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    /// Distance between local positions `i` and `j`, `None` if unreachable.
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        let d = self.values[i * self.nodes.len() + j];
        d.is_finite().then_some(d)
    }

    pub fn is_reachable(&self, i: usize, j: usize) -> bool {
        self.get(i, j).is_some()
    }
}
