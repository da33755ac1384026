//! Stress-majorization layouts, static and temporally coupled.
//!
//! The dynamic objective over frames `t` is
//!
//! ```text
//! S = Σ_t Σ_{i<j} (1/d_ij,t²)(‖x_i,t − x_j,t‖ − d_ij,t)²  +  Σ_t Σ_i ω ‖x_i,t − x_i,t+1‖²
//! ```
//!
//! where the temporal sum only runs over nodes present in both adjacent
//! frames. Unreachable pairs get weight zero.

mod distances;
mod init;
mod majorize;
mod overlay;
mod stress;

pub use distances::graph_distances;
pub use majorize::{layout_graph, majorize_dynamic, majorize_static, slice_distances};
pub use overlay::{correlation_matrix, eigenvector_overlay, power_iteration, ComponentStatus, Construct, Eigenpair};
pub use stress::{static_stress, StressReport};

use serde::Serialize;

use crate::error::{Error, Result};

/// How edge weights become dissimilarities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistanceTransform {
    /// The weight is the length.
    #[default]
    Explicit,
    /// Length `1 / w`: strong ties are short.
    Reciprocal,
    /// Length `1 − w` for cosine similarities `w` in `(0, 1)`.
    OneMinusCosine,
}

impl DistanceTransform {
    pub fn name(self) -> &'static str {
        match self {
            Self::Explicit => "explicit",
            Self::Reciprocal => "reciprocal",
            Self::OneMinusCosine => "one-minus-cosine",
        }
    }

    pub fn apply(self, weight: f64) -> Result<f64> {
        let d = match self {
            Self::Explicit => weight,
            Self::Reciprocal => 1.0 / weight,
            Self::OneMinusCosine => 1.0 - weight,
        };
        if d.is_finite() && d > 0.0 {
            Ok(d)
        } else {
            Err(Error::InvalidWeight { weight, transform: self.name() })
        }
    }
}

/// Where the solver starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Initialization {
    /// Classical scaling of each frame's distances, plus a tiny seeded
    /// offset per node. Later frames are rotated onto their predecessor.
    #[default]
    Classical,
    /// Seeded uniform points in the unit square (cube); later frames
    /// inherit the previous frame's positions.
    Uniform,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayoutConfig {
    /// Temporal weight ω.
    pub omega: f64,
    pub dimensions: usize,
    pub max_iterations: usize,
    /// Stop once `(S_prev − S) / S_prev` falls below this.
    pub relative_tolerance: f64,
    pub seed: u64,
    pub distance_transform: DistanceTransform,
    pub initialization: Initialization,
}

impl Default for LayoutConfig {
    fn default() -> Self {
        Self {
            omega: 1.0,
            dimensions: 2,
            max_iterations: 500,
            relative_tolerance: 1e-6,
            seed: 42,
            distance_transform: DistanceTransform::Explicit,
            initialization: Initialization::Classical,
        }
    }
}

impl LayoutConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega.is_finite() && self.omega >= 0.0) {
            return Err(Error::InvalidConfig(format!("omega must be finite and >= 0, got {}", self.omega)));
        }
        if self.relative_tolerance.is_nan() || self.relative_tolerance <= 0.0 {
            return Err(Error::InvalidConfig("relative_tolerance must be > 0".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig("max_iterations must be >= 1".into()));
        }
        if !(2..=3).contains(&self.dimensions) {
            return Err(Error::InvalidConfig(format!("dimensions must be 2 or 3, got {}", self.dimensions)));
        }
        Ok(())
    }
}
