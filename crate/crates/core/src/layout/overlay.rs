//! Latent constructs (principal eigenvectors of the variable correlation
//! matrix) placed into a layout of the variables.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::data::ContingencyTensor;
use crate::error::{Error, Result};

const MAX_POWER_ITERATIONS: usize = 10_000;
const POWER_TOLERANCE: f64 = 1e-13;
const DEGENERACY_GAP: f64 = 1e-8;
const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct Eigenpair {
    pub value: f64,
    /// Unit vector; the largest-magnitude entry is positive.
    pub vector: Vec<f64>,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ComponentStatus {
    Ok,
    /// Eigenvalue (numerically) repeated: the direction is not unique.
    Degenerate,
    /// Eigenvalue (numerically) zero.
    RankDeficient,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Construct {
    pub label: String,
    pub eigenvalue: f64,
    /// Barycenter of the variable positions weighted by squared loadings.
    pub position: Vec<f64>,
    pub loadings: Vec<(String, f64)>,
    pub status: ComponentStatus,
}

/// Pearson correlations between the columns (second axis) of a two-axis
/// tensor, observations along the first axis. A constant column gets zero
/// correlation with everything, itself included.
pub fn correlation_matrix(tensor: &ContingencyTensor) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let axes = tensor.axes();
    if axes.len() != 2 {
        return Err(Error::WrongArity { expected: 2, actual: axes.len() });
    }
    let (rows, cols) = (axes[0].len(), axes[1].len());
    let values = tensor.dense_values();
    let column = |j: usize| -> Vec<f64> { (0..rows).map(|i| values[i * cols + j]).collect() };
    let centered: Vec<Vec<f64>> = (0..cols)
        .map(|j| {
            let c = column(j);
            let mean = c.iter().sum::<f64>() / rows as f64;
            c.into_iter().map(|x| x - mean).collect()
        })
        .collect();
    let norms: Vec<f64> = centered.iter().map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
    let mut corr = vec![vec![0.0; cols]; cols];
    for a in 0..cols {
        for b in a..cols {
            if norms[a] == 0.0 || norms[b] == 0.0 {
                continue;
            }
            let r = if a == b {
                1.0
            } else {
                let dot: f64 = centered[a].iter().zip(&centered[b]).map(|(x, y)| x * y).sum();
                (dot / (norms[a] * norms[b])).clamp(-1.0, 1.0)
            };
            corr[a][b] = r;
            corr[b][a] = r;
        }
    }
    Ok((axes[1].labels().to_vec(), corr))
}

fn matvec(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn orient(v: &mut [f64]) {
    let lead = v.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
    if lead < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Leading `k` eigenpairs of a symmetric positive semi-definite matrix by
/// power iteration with Hotelling deflation.
pub fn power_iteration(matrix: &[Vec<f64>], k: usize) -> Vec<Eigenpair> {
    let n = matrix.len();
    let mut m: Vec<Vec<f64>> = matrix.to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut out = Vec::with_capacity(k.min(n));
    for _ in 0..k.min(n) {
        let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..1.5)).collect();
        let s = norm(&v);
        v.iter_mut().for_each(|x| *x /= s);
        let mut converged = false;
        for _ in 0..MAX_POWER_ITERATIONS {
            let w = matvec(&m, &v);
            let len = norm(&w);
            if len <= RANK_TOLERANCE {
                converged = true;
                break;
            }
            let next: Vec<f64> = w.iter().map(|x| x / len).collect();
            let change = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            v = next;
            if change < POWER_TOLERANCE {
                converged = true;
                break;
            }
        }
        let value: f64 = v.iter().zip(matvec(&m, &v)).map(|(a, b)| a * b).sum();
        orient(&mut v);
        for (i, row) in m.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x -= value * v[i] * v[j];
            }
        }
        out.push(Eigenpair { value, vector: v, converged });
    }
    out
}

/// Places the top `k` constructs of the variable correlation matrix into a
/// layout of the variables. `positions` is keyed by variable label.
pub fn eigenvector_overlay(
    tensor: &ContingencyTensor,
    positions: &BTreeMap<String, Vec<f64>>,
    k: usize,
) -> Result<Vec<Construct>> {
    if k == 0 {
        return Err(Error::InvalidConfig("need at least one component".into()));
    }
    let (labels, corr) = correlation_matrix(tensor)?;
    let points: Vec<&Vec<f64>> = labels
        .iter()
        .map(|l| positions.get(l).ok_or_else(|| Error::MissingPosition(l.clone())))
        .collect::<Result<_>>()?;
    let dims = points[0].len();
    // One extra pair to judge whether the k-th eigenvalue is repeated.
    let pairs = power_iteration(&corr, (k + 1).min(labels.len()));
    let scale = corr.iter().enumerate().map(|(i, r)| r[i]).sum::<f64>().max(1.0);
    let mut out = Vec::with_capacity(k.min(labels.len()));
    for (c, pair) in pairs.iter().enumerate().take(k) {
        let gap_tol = DEGENERACY_GAP * pair.value.abs().max(1.0);
        let repeated = [c.checked_sub(1), Some(c + 1)]
            .into_iter()
            .flatten()
            .filter_map(|o| pairs.get(o))
            .any(|o| (o.value - pair.value).abs() <= gap_tol);
        let status = if pair.value <= RANK_TOLERANCE * scale {
            ComponentStatus::RankDeficient
        } else if repeated || !pair.converged {
            ComponentStatus::Degenerate
        } else {
            ComponentStatus::Ok
        };
        let weights: Vec<f64> = pair.vector.iter().map(|l| l * l).collect();
        let total: f64 = weights.iter().sum();
        let position =
            (0..dims).map(|d| points.iter().zip(&weights).map(|(p, w)| w * p[d]).sum::<f64>() / total).collect();
        out.push(Construct {
            label: format!("C{}", c + 1),
            eigenvalue: pair.value,
            position,
            loadings: labels.iter().cloned().zip(pair.vector.iter().copied()).collect(),
            status,
        });
    }
    Ok(out)
}
