//! Block-coordinate stress majorization.
//!
//! Each node update minimizes the quadratic majorant of the objective in
//! that node's coordinates with everything else held fixed:
//!
//! ```text
//! x_i ← ( Σ_j w_ij (x_j + d_ij (x_i − x_j)/‖x_i − x_j‖) + ω Σ_s x_i,s ) / ( Σ_j w_ij + ω·|s| )
//! ```
//!
//! with `w_ij = 1/d_ij²` and `s` ranging over the adjacent frames where the
//! node is also present. Every update is a descent step, so the stress
//! never increases between sweeps. Frames are swept alternately forward and
//! backward, so each frame is optimized against both its predecessor and
//! its successor.

use std::collections::HashMap;

use crate::data::{AnimationTrack, DistanceMatrix, Frame, Positions, SolverMeta, TimeSlicedGraph};
use crate::error::{Error, Result};
use crate::layout::distances::graph_distances;
use crate::layout::init::{align_to, classical_scaling, initial_point, reentry_point};
use crate::layout::stress::{dist, frame_stress, StressReport};
use crate::layout::{Initialization, LayoutConfig};

/// Offset of a reappearing node from its last known position.
const REENTRY_JITTER: f64 = 1e-3;

struct FrameState<'a> {
    d: &'a DistanceMatrix,
    pos: Vec<f64>,
    /// Local index of the same node in the previous / next frame.
    prev: Vec<Option<usize>>,
    next: Vec<Option<usize>>,
}

struct Solver<'a> {
    frames: Vec<FrameState<'a>>,
    dims: usize,
    omega: f64,
}

impl<'a> Solver<'a> {
    fn new(matrices: &'a [DistanceMatrix], config: &LayoutConfig, warm: Option<&Positions>) -> Self {
        let dims = config.dimensions;
        let mut frames: Vec<FrameState<'a>> = Vec::with_capacity(matrices.len());
        let mut last_seen: HashMap<usize, Vec<f64>> = HashMap::new();
        for (t, d) in matrices.iter().enumerate() {
            let local: HashMap<usize, usize> = d.nodes().iter().enumerate().map(|(i, &g)| (g, i)).collect();
            let prev: Vec<Option<usize>> = match frames.last() {
                Some(p) => {
                    let plocal: HashMap<usize, usize> = p.d.nodes().iter().enumerate().map(|(i, &g)| (g, i)).collect();
                    d.nodes().iter().map(|g| plocal.get(g).copied()).collect()
                }
                None => vec![None; d.len()],
            };
            if let Some(p) = frames.last_mut() {
                p.next = p.d.nodes().iter().map(|g| local.get(g).copied()).collect();
            }
            let pos = match config.initialization {
                Initialization::Uniform => {
                    let mut pos = Vec::with_capacity(d.len() * dims);
                    for (i, &node) in d.nodes().iter().enumerate() {
                        let point = if let Some(w) = warm.and_then(|w| w.get(&node)).filter(|w| w.len() == dims) {
                            w.clone()
                        } else if let Some(j) = prev[i] {
                            frames[t - 1].pos[j * dims..(j + 1) * dims].to_vec()
                        } else if let Some(last) = last_seen.get(&node) {
                            reentry_point(config.seed, node, t, last, REENTRY_JITTER)
                        } else {
                            initial_point(config.seed, node, dims)
                        };
                        last_seen.insert(node, point.clone());
                        pos.extend(point);
                    }
                    pos
                }
                Initialization::Classical => {
                    let mut pos = classical_scaling(d, dims, config.seed);
                    if let Some(w) = warm {
                        let known: Vec<(usize, &Vec<f64>)> = d
                            .nodes()
                            .iter()
                            .enumerate()
                            .filter_map(|(i, n)| w.get(n).filter(|p| p.len() == dims).map(|p| (i, p)))
                            .collect();
                        let reference: Vec<f64> = known.iter().flat_map(|(_, p)| p.iter().copied()).collect();
                        let pairs: Vec<(usize, usize)> = known.iter().enumerate().map(|(j, &(i, _))| (i, j)).collect();
                        align_to(&mut pos, &reference, &pairs, dims);
                        for (i, p) in known {
                            pos[i * dims..(i + 1) * dims].copy_from_slice(p);
                        }
                    } else if t > 0 {
                        let pairs: Vec<(usize, usize)> =
                            prev.iter().enumerate().filter_map(|(i, j)| j.map(|j| (i, j))).collect();
                        align_to(&mut pos, &frames[t - 1].pos, &pairs, dims);
                    }
                    pos
                }
            };
            frames.push(FrameState { d, pos, prev, next: vec![None; d.len()] });
        }
        Self { frames, dims, omega: config.omega }
    }

    fn update_frame(&mut self, t: usize) {
        let dims = self.dims;
        let mut acc = vec![0.0; dims];
        for i in 0..self.frames[t].d.len() {
            acc.iter_mut().for_each(|a| *a = 0.0);
            let mut den = 0.0;
            if self.omega > 0.0 {
                let links = [(t.checked_sub(1), self.frames[t].prev[i]), (Some(t + 1), self.frames[t].next[i])];
                for (s, link) in links {
                    if let (Some(s), Some(j)) = (s, link) {
                        let other = &self.frames[s].pos[j * dims..(j + 1) * dims];
                        for (a, x) in acc.iter_mut().zip(other) {
                            *a += self.omega * x;
                        }
                        den += self.omega;
                    }
                }
            }
            let f = &self.frames[t];
            let xi = &f.pos[i * dims..(i + 1) * dims];
            for j in 0..f.d.len() {
                if j == i {
                    continue;
                }
                let Some(dij) = f.d.get(i, j) else { continue };
                let w = 1.0 / (dij * dij);
                let xj = &f.pos[j * dims..(j + 1) * dims];
                let e = dist(&f.pos, dims, i, j);
                let pull = if e > 0.0 { w * dij / e } else { 0.0 };
                for k in 0..dims {
                    acc[k] += w * xj[k] + pull * (xi[k] - xj[k]);
                }
                den += w;
            }
            if den > 0.0 {
                let xi = &mut self.frames[t].pos[i * dims..(i + 1) * dims];
                for (x, a) in xi.iter_mut().zip(&acc) {
                    *x = a / den;
                }
            }
        }
    }

    fn static_terms(&self) -> Vec<(f64, f64)> {
        self.frames.iter().map(|f| frame_stress(&f.pos, self.dims, f.d)).collect()
    }

    fn displacement(&self) -> f64 {
        let dims = self.dims;
        self.frames
            .windows(2)
            .map(|w| {
                (0..w[0].d.len())
                    .filter_map(|i| w[0].next[i].map(|j| (i, j)))
                    .map(|(i, j)| {
                        let (a, b) = (&w[0].pos[i * dims..(i + 1) * dims], &w[1].pos[j * dims..(j + 1) * dims]);
                        a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>()
                    })
                    .sum::<f64>()
            })
            .sum()
    }

    fn total(&self) -> f64 {
        self.static_terms().iter().map(|s| s.0).sum::<f64>() + self.omega * self.displacement()
    }

    fn run(&mut self, config: &LayoutConfig) -> StressReport {
        let mut trace = vec![self.total()];
        let mut converged = false;
        let mut iterations = 0;
        while iterations < config.max_iterations {
            iterations += 1;
            if iterations % 2 == 1 {
                (0..self.frames.len()).for_each(|t| self.update_frame(t));
            } else {
                (0..self.frames.len()).rev().for_each(|t| self.update_frame(t));
            }
            let prev = *trace.last().expect("trace starts non-empty");
            let cur = self.total();
            trace.push(cur);
            if prev <= 0.0 || (prev - cur) / prev < config.relative_tolerance {
                converged = true;
                break;
            }
        }
        let terms = self.static_terms();
        let displacement = self.displacement();
        let temporal = self.omega * displacement;
        let static_terms: Vec<f64> = terms.iter().map(|s| s.0).collect();
        StressReport {
            total: static_terms.iter().sum::<f64>() + temporal,
            static_terms,
            stress1: terms.iter().map(|s| s.1).collect(),
            temporal_term: temporal,
            displacement,
            trace,
            iterations,
            converged,
        }
    }

    fn positions(&self, t: usize) -> Positions {
        let f = &self.frames[t];
        f.d.nodes().iter().enumerate().map(|(i, &g)| (g, f.pos[i * self.dims..(i + 1) * self.dims].to_vec())).collect()
    }
}

/// Lays out one distance matrix. Nodes in `warm_start` start from the given
/// positions, the rest from their seeded positions.
pub fn majorize_static(
    d: &DistanceMatrix,
    config: &LayoutConfig,
    warm_start: Option<&Positions>,
) -> Result<(Positions, StressReport)> {
    config.validate()?;
    if d.len() < 2 {
        return Err(Error::EmptySlice(format!("{} node(s)", d.len())));
    }
    let matrices = std::slice::from_ref(d);
    let mut solver = Solver::new(matrices, config, warm_start);
    let report = solver.run(config);
    Ok((solver.positions(0), report))
}

/// Jointly lays out a series of slices. Each matrix's node list is the
/// slice's presence set; frames are labeled by their position in the series.
pub fn majorize_dynamic(matrices: &[DistanceMatrix], config: &LayoutConfig) -> Result<(AnimationTrack, StressReport)> {
    config.validate()?;
    if matrices.is_empty() {
        return Err(Error::EmptySeries);
    }
    if let Some(t) = matrices.iter().position(DistanceMatrix::is_empty) {
        return Err(Error::EmptySlice(t.to_string()));
    }
    let mut solver = Solver::new(matrices, config, None);
    let report = solver.run(config);
    let universe = matrices.iter().flat_map(|m| m.nodes().iter().copied()).max().map_or(0, |m| m + 1);
    let frames = (0..matrices.len())
        .map(|t| Frame {
            time: t.to_string(),
            positions: solver.positions(t),
            static_stress: report.static_terms[t],
            stress1: report.stress1[t],
        })
        .collect();
    let track = AnimationTrack {
        node_ids: (0..universe).map(|i| i.to_string()).collect(),
        frames,
        dynamic_stress: report.total,
        meta: SolverMeta {
            iterations: report.iterations,
            converged: report.converged,
            omega: config.omega,
            seed: config.seed,
            dims: config.dimensions,
        },
    };
    Ok((track, report))
}

/// Distance matrices for every slice of `graph` under the configured
/// transform, computed independently per slice.
pub fn slice_distances(graph: &TimeSlicedGraph, config: &LayoutConfig) -> Result<Vec<DistanceMatrix>> {
    graph
        .slices()
        .iter()
        .map(|s| {
            let wrap = |e: Error| Error::InSlice { label: s.time().to_string(), source: Box::new(e) };
            match s.present().len() {
                0 => Err(wrap(Error::EmptySlice(s.time().to_string()))),
                1 => DistanceMatrix::from_rows(s.present().iter().copied().collect(), vec![vec![0.0]]),
                _ => graph_distances(s, config.distance_transform).map_err(wrap),
            }
        })
        .collect()
}

/// Animated layout of a time-sliced graph, with frames labeled by slice
/// time and nodes by their ids.
pub fn layout_graph(graph: &TimeSlicedGraph, config: &LayoutConfig) -> Result<(AnimationTrack, StressReport)> {
    let matrices = slice_distances(graph, config)?;
    let (mut track, report) = majorize_dynamic(&matrices, config)?;
    for (frame, slice) in track.frames.iter_mut().zip(graph.slices()) {
        frame.time = slice.time().to_string();
    }
    track.node_ids = graph.nodes().iter().map(|n| n.id.clone()).collect();
    Ok((track, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform(n: usize, d: f64) -> DistanceMatrix {
        let rows = (0..n).map(|i| (0..n).map(|j| if i == j { 0.0 } else { d }).collect()).collect();
        DistanceMatrix::from_rows((0..n).collect(), rows).unwrap()
    }

    fn edist(p: &Positions, a: usize, b: usize) -> f64 {
        p[&a].iter().zip(&p[&b]).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
    }

    fn assert_monotone(trace: &[f64]) {
        for w in trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "stress increased: {} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn two_nodes_reach_target() {
        let (p, r) = majorize_static(&uniform(2, 1.0), &LayoutConfig::default(), None).unwrap();
        assert!((edist(&p, 0, 1) - 1.0).abs() < 1e-6);
        assert!(r.total < 1e-10);
    }

    #[test]
    fn equilateral_triangle() {
        let (p, _) = majorize_static(&uniform(3, 1.0), &LayoutConfig::default(), None).unwrap();
        for (a, b) in [(0, 1), (0, 2), (1, 2)] {
            assert!((edist(&p, a, b) - 1.0).abs() < 1e-4, "{a}-{b}: {}", edist(&p, a, b));
        }
    }

    #[test]
    fn four_cycle_keeps_residual_stress() {
        let rows = vec![
            vec![0.0, 1.0, 2.0, 1.0],
            vec![1.0, 0.0, 1.0, 2.0],
            vec![2.0, 1.0, 0.0, 1.0],
            vec![1.0, 2.0, 1.0, 0.0],
        ];
        let d = DistanceMatrix::from_rows(vec![0, 1, 2, 3], rows).unwrap();
        let (_, r) = majorize_static(&d, &LayoutConfig::default(), None).unwrap();
        assert!(r.total > 0.0);
        assert!(r.trace.len() > 2);
        assert_monotone(&r.trace);
    }

    #[test]
    fn warm_start_at_optimum_stays_put() {
        let d = uniform(2, 2.0);
        let warm: Positions = [(0, vec![0.0, 0.0]), (1, vec![2.0, 0.0])].into_iter().collect();
        let (p, r) = majorize_static(&d, &LayoutConfig::default(), Some(&warm)).unwrap();
        assert_eq!(p, warm);
        assert_eq!(r.total, 0.0);
    }

    #[test]
    fn single_slice_dynamic_matches_static() {
        let d = uniform(5, 1.0);
        let cfg = LayoutConfig { omega: 7.0, ..Default::default() };
        let (p, rs) = majorize_static(&d, &cfg, None).unwrap();
        let (track, rd) = majorize_dynamic(std::slice::from_ref(&d), &cfg).unwrap();
        assert_eq!(track.frames[0].positions, p);
        assert_eq!(rs.total, rd.total);
        assert_eq!(rd.temporal_term, 0.0);
    }

    #[test]
    fn large_omega_pins_identical_slices() {
        let d = uniform(4, 1.0);
        let cfg = LayoutConfig { omega: 1e6, ..Default::default() };
        let (track, _) = majorize_dynamic(&[d.clone(), d], &cfg).unwrap();
        for node in 0..4 {
            let (a, b) = (&track.frames[0].positions[&node], &track.frames[1].positions[&node]);
            let disp = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
            assert!(disp < 1e-3);
        }
    }

    #[test]
    fn churned_node_has_no_position_while_absent() {
        let full = uniform(3, 1.0);
        let partial = DistanceMatrix::from_rows(vec![0, 1], vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let (track, r) = majorize_dynamic(&[full.clone(), partial, full], &LayoutConfig::default()).unwrap();
        assert!(!track.frames[1].positions.contains_key(&2));
        assert!(track.frames[2].positions.contains_key(&2));
        assert_monotone(&r.trace);
    }

    #[test]
    fn three_dimensions() {
        let cfg = LayoutConfig { dimensions: 3, ..Default::default() };
        let (p, _) = majorize_static(&uniform(4, 1.0), &cfg, None).unwrap();
        assert!(p.values().all(|x| x.len() == 3));
        // regular tetrahedron embeds exactly in 3D
        for a in 0..4 {
            for b in (a + 1)..4 {
                assert!((edist(&p, a, b) - 1.0).abs() < 1e-3);
            }
        }
    }

    #[test]
    fn errors() {
        assert!(matches!(majorize_dynamic(&[], &LayoutConfig::default()), Err(Error::EmptySeries)));
        let one = DistanceMatrix::from_rows(vec![0], vec![vec![0.0]]).unwrap();
        assert!(majorize_static(&one, &LayoutConfig::default(), None).is_err());
    }
}
