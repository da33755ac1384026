use serde::Serialize;

use crate::data::{DistanceMatrix, Positions};
use crate::error::{Error, Result};

/// Static and temporal stress of a layout.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StressReport {
    /// Per frame: `Σ_{i<j} (1/d²)(‖x_i − x_j‖ − d)²` over reachable pairs.
    pub static_terms: Vec<f64>,
    /// Per frame Kruskal stress-1.
    pub stress1: Vec<f64>,
    /// `ω Σ_t Σ_i ‖x_i,t − x_i,t+1‖²`.
    pub temporal_term: f64,
    /// The temporal sum without the ω factor.
    pub displacement: f64,
    pub total: f64,
    /// Total stress before the first sweep and after every sweep.
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl StressReport {
    pub fn static_total(&self) -> f64 {
        self.static_terms.iter().sum()
    }
}

pub(crate) fn dist(pos: &[f64], dims: usize, i: usize, j: usize) -> f64 {
    let (a, b) = (&pos[i * dims..(i + 1) * dims], &pos[j * dims..(j + 1) * dims]);
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Weighted raw stress and Kruskal stress-1 of flat positions.
pub(crate) fn frame_stress(pos: &[f64], dims: usize, d: &DistanceMatrix) -> (f64, f64) {
    let n = d.len();
    let (mut raw, mut num, mut den) = (0.0, 0.0, 0.0);
    for i in 0..n {
        for j in (i + 1)..n {
            let Some(dij) = d.get(i, j) else { continue };
            let e = dist(pos, dims, i, j);
            let r = e - dij;
            raw += r * r / (dij * dij);
            num += r * r;
            den += e * e;
        }
    }
    let stress1 = if num == 0.0 {
        0.0
    } else if den == 0.0 {
        f64::INFINITY
    } else {
        (num / den).sqrt()
    };
    (raw, stress1)
}

/// Flattens the positions of the matrix's nodes, in matrix order.
pub(crate) fn flatten(positions: &Positions, d: &DistanceMatrix) -> Result<(Vec<f64>, usize)> {
    let first = d
        .nodes()
        .first()
        .and_then(|n| positions.get(n))
        .ok_or_else(|| Error::MissingPosition(d.nodes().first().map_or("?".into(), |n| n.to_string())))?;
    let dims = first.len();
    let mut flat = Vec::with_capacity(d.len() * dims);
    for node in d.nodes() {
        let p = positions.get(node).ok_or_else(|| Error::MissingPosition(node.to_string()))?;
        if p.len() != dims {
            return Err(Error::MissingPosition(format!("{node} (expected {dims} coordinates)")));
        }
        flat.extend_from_slice(p);
    }
    Ok((flat, dims))
}

/// Static stress of one layout against target distances. Each unordered
/// pair is counted once; unreachable pairs are skipped.
pub fn static_stress(positions: &Positions, d: &DistanceMatrix) -> Result<StressReport> {
    let (flat, dims) = flatten(positions, d)?;
    let (raw, s1) = frame_stress(&flat, dims, d);
    Ok(StressReport {
        static_terms: vec![raw],
        stress1: vec![s1],
        temporal_term: 0.0,
        displacement: 0.0,
        total: raw,
        trace: vec![raw],
        iterations: 0,
        converged: true,
    })
}
