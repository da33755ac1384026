//! Labeled contingency tensors and the probability distributions derived
//! from them.
//!
//! Cells are addressed by one category index per axis, row-major with the
//! last axis varying fastest. Small tensors are stored densely; tensors with
//! more cells than the dense limit keep only their non-zero cells in a
//! sorted map. Zero cells are never dropped from the shape, so an axis keeps
//! its cardinality (and the `log2(n)` entropy bound stays stable).

use std::collections::{BTreeMap, HashSet};

use serde::Serialize;

use crate::error::{Error, Result};

/// Cell count above which tensors switch to sparse storage.
pub const DEFAULT_DENSE_LIMIT: usize = 1_000_000;

/// Tolerance on `Σ p = 1` for a valid distribution.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// A named axis with ordered, unique category labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Axis {
    name: String,
    labels: Vec<String>,
}

impl Axis {
    pub fn new<S: Into<String>, L: Into<String>>(name: S, labels: impl IntoIterator<Item = L>) -> Result<Self> {
        let name = name.into();
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::InvalidTensor(format!("axis `{name}` has no categories")));
        }
        let mut seen = HashSet::with_capacity(labels.len());
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::InvalidTensor(format!("duplicate category `{l}` on axis `{name}`")));
            }
        }
        Ok(Self { name, labels })
    }

    /// Axis whose categories are labeled `0..n`.
    pub fn indexed(name: impl Into<String>, n: usize) -> Result<Self> {
        Self::new(name, (0..n).map(|i| i.to_string()))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Cells {
    Dense(Vec<f64>),
    Sparse(BTreeMap<Vec<usize>, f64>),
}

/// Shape plus cell storage shared by counts and probabilities.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Table {
    axes: Vec<Axis>,
    cells: Cells,
    dense_limit: usize,
}

fn cell_count(axes: &[Axis]) -> usize {
    axes.iter().map(Axis::len).product()
}

fn check_axes(axes: &[Axis]) -> Result<()> {
    if axes.is_empty() {
        return Err(Error::InvalidTensor("tensor needs at least one axis".into()));
    }
    let mut names = HashSet::new();
    for a in axes {
        if !names.insert(a.name()) {
            return Err(Error::InvalidTensor(format!("duplicate axis name `{}`", a.name())));
        }
    }
    Ok(())
}

impl Table {
    fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.axes.len()];
        for k in (0..self.axes.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.axes[k + 1].len();
        }
        strides
    }

    fn flat_index(&self, index: &[usize]) -> usize {
        index.iter().zip(self.strides()).map(|(i, s)| i * s).sum()
    }

    fn unflatten(&self, mut flat: usize) -> Vec<usize> {
        let mut index = vec![0; self.axes.len()];
        for k in (0..self.axes.len()).rev() {
            let n = self.axes[k].len();
            index[k] = flat % n;
            flat /= n;
        }
        index
    }

    fn check_index(&self, index: &[usize]) -> Result<()> {
        if index.len() != self.axes.len() {
            return Err(Error::InvalidTensor(format!(
                "index has {} entries, tensor has {} axes",
                index.len(),
                self.axes.len()
            )));
        }
        for (k, (&i, axis)) in index.iter().zip(&self.axes).enumerate() {
            if i >= axis.len() {
                return Err(Error::InvalidTensor(format!("index {i} out of range on axis {k} (`{}`)", axis.name())));
            }
        }
        Ok(())
    }

    fn get(&self, index: &[usize]) -> f64 {
        match &self.cells {
            Cells::Dense(v) => v[self.flat_index(index)],
            Cells::Sparse(m) => m.get(index).copied().unwrap_or(0.0),
        }
    }

    fn nonzero(&self) -> Vec<(Vec<usize>, f64)> {
        match &self.cells {
            Cells::Dense(v) => {
                v.iter().enumerate().filter(|(_, &x)| x != 0.0).map(|(i, &x)| (self.unflatten(i), x)).collect()
            }
            Cells::Sparse(m) => m.iter().filter(|(_, &x)| x != 0.0).map(|(k, &x)| (k.clone(), x)).collect(),
        }
    }

    fn clamp_unit(&mut self) {
        match &mut self.cells {
            Cells::Dense(v) => v.iter_mut().for_each(|x| *x = x.clamp(0.0, 1.0)),
            Cells::Sparse(m) => m.values_mut().for_each(|x| *x = x.clamp(0.0, 1.0)),
        }
    }

    fn values(&self) -> Box<dyn Iterator<Item = f64> + '_> {
        match &self.cells {
            Cells::Dense(v) => Box::new(v.iter().copied()),
            Cells::Sparse(m) => Box::new(m.values().copied()),
        }
    }

    fn dense_values(&self) -> Vec<f64> {
        match &self.cells {
            Cells::Dense(v) => v.clone(),
            Cells::Sparse(m) => {
                let mut v = vec![0.0; cell_count(&self.axes)];
                for (k, &x) in m {
                    v[self.flat_index(k)] = x;
                }
                v
            }
        }
    }

    fn total(&self) -> f64 {
        self.values().sum()
    }

    fn map_values(&self, f: impl Fn(f64) -> f64) -> Table {
        let cells = match &self.cells {
            Cells::Dense(v) => Cells::Dense(v.iter().map(|&x| f(x)).collect()),
            Cells::Sparse(m) => Cells::Sparse(m.iter().map(|(k, &x)| (k.clone(), f(x))).collect()),
        };
        Table { axes: self.axes.clone(), cells, dense_limit: self.dense_limit }
    }

    fn axis_position(&self, name: &str) -> Result<usize> {
        self.axes.iter().position(|a| a.name() == name).ok_or_else(|| Error::UnknownAxis(name.to_string()))
    }

    fn project(&self, keep: &[usize]) -> Table {
        let axes: Vec<Axis> = keep.iter().map(|&k| self.axes[k].clone()).collect();
        let out_len = cell_count(&axes);
        let mut out = Table {
            axes,
            cells: if out_len <= self.dense_limit {
                Cells::Dense(vec![0.0; out_len])
            } else {
                Cells::Sparse(BTreeMap::new())
            },
            dense_limit: self.dense_limit,
        };
        for (index, x) in self.nonzero() {
            let sub: Vec<usize> = keep.iter().map(|&k| index[k]).collect();
            match &mut out.cells {
                Cells::Dense(v) => {
                    let flat = out.axes.iter().zip(&sub).fold(0, |acc, (a, &i)| acc * a.len() + i);
                    v[flat] += x;
                }
                Cells::Sparse(m) => *m.entry(sub).or_insert(0.0) += x,
            }
        }
        out
    }

    fn same_shape(&self, other: &Table) -> bool {
        self.axes == other.axes
    }

    fn label_of(&self, index: &[usize]) -> String {
        index
            .iter()
            .zip(&self.axes)
            .map(|(&i, a)| format!("{}={}", a.name(), a.labels()[i]))
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// Accumulates non-negative counts into a tensor of a fixed shape.
#[derive(Debug, Clone)]
pub struct TensorBuilder {
    table: Table,
}

impl TensorBuilder {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        Self::with_dense_limit(axes, DEFAULT_DENSE_LIMIT)
    }

    pub fn with_dense_limit(axes: Vec<Axis>, dense_limit: usize) -> Result<Self> {
        check_axes(&axes)?;
        let n = cell_count(&axes);
        let cells = if n <= dense_limit { Cells::Dense(vec![0.0; n]) } else { Cells::Sparse(BTreeMap::new()) };
        Ok(Self { table: Table { axes, cells, dense_limit } })
    }

    /// Adds `count` to the cell at `index`. Repeated indices accumulate.
    pub fn add(&mut self, index: &[usize], count: f64) -> Result<&mut Self> {
        self.table.check_index(index)?;
        if !(count.is_finite() && count >= 0.0) {
            return Err(Error::InvalidTensor(format!("cell value {count} is not a finite non-negative number")));
        }
        let flat = self.table.flat_index(index);
        match &mut self.table.cells {
            Cells::Dense(v) => v[flat] += count,
            Cells::Sparse(_) if count == 0.0 => {}
            Cells::Sparse(m) => *m.entry(index.to_vec()).or_insert(0.0) += count,
        }
        Ok(self)
    }

    pub fn build(self) -> ContingencyTensor {
        ContingencyTensor { table: self.table }
    }
}

/// Labeled multidimensional non-negative counts.
#[derive(Debug, Clone, PartialEq)]
pub struct ContingencyTensor {
    pub(crate) table: Table,
}

impl ContingencyTensor {
    /// Builds a tensor from row-major dense values.
    pub fn from_dense(axes: Vec<Axis>, values: Vec<f64>) -> Result<Self> {
        check_axes(&axes)?;
        let n = cell_count(&axes);
        if values.len() != n {
            return Err(Error::InvalidTensor(format!("expected {n} cells, got {}", values.len())));
        }
        if let Some(bad) = values.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
            return Err(Error::InvalidTensor(format!("cell value {bad} is not a finite non-negative number")));
        }
        let mut b = TensorBuilder::new(axes)?;
        if let Cells::Dense(v) = &mut b.table.cells {
            *v = values;
        } else {
            for (i, x) in values.into_iter().enumerate() {
                if x != 0.0 {
                    let idx = b.table.unflatten(i);
                    b.add(&idx, x)?;
                }
            }
        }
        Ok(b.build())
    }

    /// One-axis tensor from a slice of counts.
    pub fn vector(axis: Axis, counts: &[f64]) -> Result<Self> {
        Self::from_dense(vec![axis], counts.to_vec())
    }

    pub fn axes(&self) -> &[Axis] {
        &self.table.axes
    }

    pub fn get(&self, index: &[usize]) -> Result<f64> {
        self.table.check_index(index)?;
        Ok(self.table.get(index))
    }

    pub fn total(&self) -> f64 {
        self.table.total()
    }

    pub fn cell_count(&self) -> usize {
        cell_count(&self.table.axes)
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.table.cells, Cells::Sparse(_))
    }

    /// Non-zero cells with their index tuples, in row-major order.
    pub fn nonzero(&self) -> Vec<(Vec<usize>, f64)> {
        self.table.nonzero()
    }

    /// All cells in row-major order, zeros included.
    pub fn dense_values(&self) -> Vec<f64> {
        self.table.dense_values()
    }
}

/// Where a distribution's probabilities came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Raw,
    NormalizedFromCounts,
}

/// Cells in `[0, 1]` summing to one within [`NORMALIZATION_TOLERANCE`].
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityDistribution {
    pub(crate) table: Table,
    provenance: Provenance,
}

impl ProbabilityDistribution {
    fn validated(mut table: Table, provenance: Provenance) -> Result<Self> {
        let range = -NORMALIZATION_TOLERANCE..=1.0 + NORMALIZATION_TOLERANCE;
        if let Some(bad) = table.values().find(|p| !(p.is_finite() && range.contains(p))) {
            return Err(Error::InvalidTensor(format!("probability {bad} outside [0, 1]")));
        }
        let sum = table.total();
        if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::NotNormalized(sum));
        }
        // absorb rounding just outside the unit interval
        table.clamp_unit();
        Ok(Self { table, provenance })
    }

    /// Wraps already-normalized row-major probabilities.
    pub fn from_dense(axes: Vec<Axis>, probs: Vec<f64>) -> Result<Self> {
        let t = ContingencyTensor::from_dense(axes, probs)?;
        Self::validated(t.table, Provenance::Raw)
    }

    /// One-axis distribution with categories `0..n`.
    pub fn vector(axis_name: &str, probs: &[f64]) -> Result<Self> {
        Self::from_dense(vec![Axis::indexed(axis_name, probs.len())?], probs.to_vec())
    }

    pub fn axes(&self) -> &[Axis] {
        &self.table.axes
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn get(&self, index: &[usize]) -> Result<f64> {
        self.table.check_index(index)?;
        Ok(self.table.get(index))
    }

    pub fn cell_count(&self) -> usize {
        cell_count(&self.table.axes)
    }

    pub fn nonzero(&self) -> Vec<(Vec<usize>, f64)> {
        self.table.nonzero()
    }

    pub fn dense_values(&self) -> Vec<f64> {
        self.table.dense_values()
    }

    /// Probabilities of a one-axis distribution, in category order.
    pub fn as_vector(&self) -> Result<Vec<f64>> {
        if self.table.axes.len() != 1 {
            return Err(Error::WrongArity { expected: 1, actual: self.table.axes.len() });
        }
        Ok(self.table.dense_values())
    }

    pub(crate) fn same_shape(&self, other: &Self) -> bool {
        self.table.same_shape(&other.table)
    }

    pub(crate) fn describe_cell(&self, index: &[usize]) -> String {
        self.table.label_of(index)
    }

    pub(crate) fn probability_at(&self, index: &[usize]) -> f64 {
        self.table.get(index)
    }

    /// Adds `epsilon` to every cell and renormalizes.
    pub(crate) fn smoothed(&self, epsilon: f64) -> Self {
        let n = cell_count(&self.table.axes) as f64;
        let z = 1.0 + epsilon * n;
        let mut dense = self.table.dense_values();
        for p in &mut dense {
            *p = (*p + epsilon) / z;
        }
        let mut table = self.table.clone();
        table.cells = Cells::Dense(dense);
        Self { table, provenance: self.provenance }
    }
}

/// Divides every cell by the total mass.
pub fn normalize(tensor: &ContingencyTensor) -> Result<ProbabilityDistribution> {
    let total = tensor.total();
    if total <= 0.0 {
        return Err(Error::ZeroMass);
    }
    let table = tensor.table.map_values(|x| x / total);
    ProbabilityDistribution::validated(table, Provenance::NormalizedFromCounts)
}

/// Sums over every axis not named in `keep_axes`. The kept axes appear in
/// the order given.
pub fn marginalize(dist: &ProbabilityDistribution, keep_axes: &[&str]) -> Result<ProbabilityDistribution> {
    if keep_axes.is_empty() {
        return Err(Error::InvalidTensor("marginalize needs at least one axis to keep".into()));
    }
    let mut keep = Vec::with_capacity(keep_axes.len());
    for name in keep_axes {
        let k = dist.table.axis_position(name)?;
        if keep.contains(&k) {
            return Err(Error::InvalidTensor(format!("axis `{name}` listed twice")));
        }
        keep.push(k);
    }
    Ok(ProbabilityDistribution { table: dist.table.project(&keep), provenance: dist.provenance })
}
