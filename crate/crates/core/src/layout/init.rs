//! Starting configurations for the majorization solver.

use nalgebra::{DMatrix, Matrix3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::DistanceMatrix;

/// Size of the seeded offset added to a classical start, relative to the
/// largest finite distance. Keeps coincident points apart.
const CLASSICAL_JITTER: f64 = 1e-6;

/// Seeded start position of a node, uniform in the unit square (or cube).
/// It depends only on the seed and the node index, so every frame and
/// every static solve starts a node at the same place.
pub(crate) fn initial_point(seed: u64, node: usize, dims: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(node as u64);
    (0..dims).map(|_| rng.gen::<f64>()).collect()
}

pub(crate) fn reentry_point(seed: u64, node: usize, frame: usize, last: &[f64], scale: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    rng.set_stream(((frame as u64) << 32) | node as u64);
    last.iter().map(|x| x + scale * rng.gen_range(-1.0..1.0)).collect()
}

/// Classical (Torgerson) scaling of `d` into `dims` coordinates, flattened
/// in local node order. Unreachable pairs are treated as twice the largest
/// finite distance. Exact for Euclidean input, up to rigid motion.
pub(crate) fn classical_scaling(d: &DistanceMatrix, dims: usize, seed: u64) -> Vec<f64> {
    let n = d.len();
    let longest = (0..n).flat_map(|i| (0..n).filter_map(move |j| d.get(i, j))).fold(0.0, f64::max);
    let longest = if longest > 0.0 { longest } else { 1.0 };
    let sq = DMatrix::from_fn(n, n, |i, j| d.get(i, j).unwrap_or(2.0 * longest).powi(2));
    let row_means: Vec<f64> = (0..n).map(|i| sq.row(i).mean()).collect();
    let grand = sq.mean();
    let b = DMatrix::from_fn(n, n, |i, j| -0.5 * (sq[(i, j)] - row_means[i] - row_means[j] + grand));
    let eig = b.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &c| eig.eigenvalues[c].total_cmp(&eig.eigenvalues[a]));
    let mut out = vec![0.0; n * dims];
    for (k, &e) in order.iter().take(dims).enumerate() {
        let lambda = eig.eigenvalues[e];
        if lambda <= 0.0 {
            continue;
        }
        for i in 0..n {
            out[i * dims + k] = eig.eigenvectors[(i, e)] * lambda.sqrt();
        }
    }
    for (i, &node) in d.nodes().iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(node as u64);
        for x in &mut out[i * dims..(i + 1) * dims] {
            *x += CLASSICAL_JITTER * longest * rng.gen_range(-1.0..1.0);
        }
    }
    out
}

/// Moves `points` by the rotation/reflection and translation that best
/// matches `reference` over the given `(point, reference)` index pairs.
/// With no pairs nothing happens; with one pair only translation applies.
pub(crate) fn align_to(points: &mut [f64], reference: &[f64], pairs: &[(usize, usize)], dims: usize) {
    if pairs.is_empty() {
        return;
    }
    let m = pairs.len() as f64;
    let mut pc = [0.0; 3];
    let mut rc = [0.0; 3];
    for &(i, j) in pairs {
        for k in 0..dims {
            pc[k] += points[i * dims + k] / m;
            rc[k] += reference[j * dims + k] / m;
        }
    }
    let mut cross = Matrix3::<f64>::zeros();
    for &(i, j) in pairs {
        for a in 0..dims {
            for b in 0..dims {
                cross[(a, b)] += (reference[j * dims + a] - rc[a]) * (points[i * dims + b] - pc[b]);
            }
        }
    }
    let rotation = if pairs.len() > 1 {
        let sub = cross.view((0, 0), (dims, dims)).into_owned();
        let svd = sub.svd(true, true);
        match (svd.u, svd.v_t) {
            (Some(u), Some(v_t)) => u * v_t,
            _ => DMatrix::identity(dims, dims),
        }
    } else {
        DMatrix::identity(dims, dims)
    };
    for p in points.chunks_mut(dims) {
        let centered: Vec<f64> = (0..dims).map(|k| p[k] - pc[k]).collect();
        for a in 0..dims {
            p[a] = rc[a] + (0..dims).map(|b| rotation[(a, b)] * centered[b]).sum::<f64>();
        }
    }
}
