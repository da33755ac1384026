//! Shared data model: tensors, groupings, time-sliced graphs, distance
//! matrices and layout tracks.

pub mod distance;
pub mod graph;
pub mod grouping;
pub mod tensor;
pub mod track;

pub use distance::DistanceMatrix;
pub use graph::{label_order, sort_labels, Edge, NodeInfo, Slice, TimeSlicedGraph};
pub use grouping::{GroupContent, GroupNode, GroupingTree};
pub use tensor::{
    marginalize, normalize, Axis, ContingencyTensor, ProbabilityDistribution, Provenance, TensorBuilder,
    DEFAULT_DENSE_LIMIT, NORMALIZATION_TOLERANCE,
};
pub use track::{AnimationTrack, Frame, Point, Positions, SolverMeta};

use crate::error::{Error, Result};

/// Sums a one-axis distribution into one probability per group at `level`.
pub fn group_aggregate(
    dist: &ProbabilityDistribution,
    grouping: &GroupingTree,
    level: usize,
) -> Result<ProbabilityDistribution> {
    let (labels, shares, _) = grouped_mass(dist, grouping, level)?;
    ProbabilityDistribution::from_dense(vec![Axis::new(grouping.axis(), labels)?], shares)
}

/// Group labels, group shares and per-group member probabilities.
pub(crate) type GroupedMass = (Vec<String>, Vec<f64>, Vec<Vec<f64>>);

pub(crate) fn grouped_mass(
    dist: &ProbabilityDistribution,
    grouping: &GroupingTree,
    level: usize,
) -> Result<GroupedMass> {
    let axis = one_axis(dist)?;
    grouping.check_partition(axis)?;
    let probs = dist.as_vector()?;
    let groups = grouping.groups_at(level)?;
    let mut labels = Vec::with_capacity(groups.len());
    let mut shares = Vec::with_capacity(groups.len());
    let mut members = Vec::with_capacity(groups.len());
    for (label, cats) in groups {
        let m: Vec<f64> = cats.iter().map(|c| probs[axis.position(c).expect("partition checked")]).collect();
        shares.push(m.iter().sum());
        members.push(m);
        labels.push(label);
    }
    Ok((labels, shares, members))
}

pub(crate) fn one_axis(dist: &ProbabilityDistribution) -> Result<&Axis> {
    match dist.axes() {
        [a] => Ok(a),
        axes => Err(Error::AxisMismatch(format!("grouping needs a one-axis distribution, got {} axes", axes.len()))),
    }
}
