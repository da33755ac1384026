use std::collections::BTreeMap;

use serde::Serialize;

/// Coordinates of one node, 2 or 3 components.
pub type Point = Vec<f64>;

/// Positions keyed by universe node index.
pub type Positions = BTreeMap<usize, Point>;

/// Layout of one slice.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub time: String,
    /// Exactly the nodes present in the slice.
    pub positions: Positions,
    pub static_stress: f64,
    pub stress1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverMeta {
    pub iterations: usize,
    pub converged: bool,
    pub omega: f64,
    pub seed: u64,
    pub dims: usize,
}

/// Per-slice positions of an animated layout.
#[derive(Debug, Clone, PartialEq)]
pub struct AnimationTrack {
    /// Display id for every universe index that may appear in a frame.
    pub node_ids: Vec<String>,
    pub frames: Vec<Frame>,
    /// Static plus temporal stress of the whole series.
    pub dynamic_stress: f64,
    pub meta: SolverMeta,
}

impl AnimationTrack {
    pub fn times(&self) -> impl Iterator<Item = &str> {
        self.frames.iter().map(|f| f.time.as_str())
    }
}
