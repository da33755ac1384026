//! Partitions of one axis's categories, possibly nested.

use std::collections::HashSet;

use crate::data::tensor::Axis;
use crate::error::{Error, Result};

/// A node of a grouping tree: either sub-groups or a leaf set of categories.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupNode {
    pub label: String,
    pub content: GroupContent,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupContent {
    Groups(Vec<GroupNode>),
    Leaf(Vec<String>),
}

impl GroupNode {
    pub fn leaf<S: Into<String>>(label: impl Into<String>, categories: impl IntoIterator<Item = S>) -> Self {
        Self { label: label.into(), content: GroupContent::Leaf(categories.into_iter().map(Into::into).collect()) }
    }

    pub fn branch(label: impl Into<String>, children: Vec<GroupNode>) -> Self {
        Self { label: label.into(), content: GroupContent::Groups(children) }
    }

    /// All categories under this node, in tree order.
    pub fn categories(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect(&mut out);
        out
    }

    fn collect<'a>(&'a self, out: &mut Vec<&'a str>) {
        match &self.content {
            GroupContent::Leaf(c) => out.extend(c.iter().map(String::as_str)),
            GroupContent::Groups(g) => g.iter().for_each(|n| n.collect(out)),
        }
    }

    pub fn children(&self) -> Option<&[GroupNode]> {
        match &self.content {
            GroupContent::Groups(g) => Some(g),
            GroupContent::Leaf(_) => None,
        }
    }

    fn depth(&self) -> usize {
        match &self.content {
            GroupContent::Leaf(_) => 0,
            GroupContent::Groups(g) => 1 + g.iter().map(GroupNode::depth).max().unwrap_or(0),
        }
    }

    fn validate(&self) -> Result<()> {
        match &self.content {
            GroupContent::Leaf(c) if c.is_empty() => {
                Err(Error::InvalidGrouping(format!("group `{}` has no categories", self.label)))
            }
            GroupContent::Groups(g) if g.is_empty() => {
                Err(Error::InvalidGrouping(format!("group `{}` has no sub-groups", self.label)))
            }
            GroupContent::Groups(g) => g.iter().try_for_each(GroupNode::validate),
            GroupContent::Leaf(_) => Ok(()),
        }
    }
}

/// A grouping of the categories of one axis.
///
/// The root is implicit and holds the top-level groups; level 1 is the
/// coarsest partition. Leaves that sit above the requested level are carried
/// down unchanged, so every level is a full partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupingTree {
    axis: String,
    root: GroupNode,
}

impl GroupingTree {
    pub fn new(axis: impl Into<String>, groups: Vec<GroupNode>) -> Result<Self> {
        let root = GroupNode::branch("*", groups);
        root.validate()?;
        let mut seen = HashSet::new();
        for c in root.categories() {
            if !seen.insert(c) {
                return Err(Error::InvalidGrouping(format!("category `{c}` appears in more than one group")));
            }
        }
        Ok(Self { axis: axis.into(), root })
    }

    /// Single-level grouping from `(label, categories)` pairs.
    pub fn flat<S: Into<String>>(
        axis: impl Into<String>,
        groups: impl IntoIterator<Item = (S, Vec<S>)>,
    ) -> Result<Self> {
        Self::new(axis, groups.into_iter().map(|(l, c)| GroupNode::leaf(l, c)).collect())
    }

    pub fn axis(&self) -> &str {
        &self.axis
    }

    /// Same tree bound to a different axis name.
    pub fn with_axis(mut self, axis: impl Into<String>) -> Self {
        self.axis = axis.into();
        self
    }

    pub fn root(&self) -> &GroupNode {
        &self.root
    }

    pub fn groups(&self) -> &[GroupNode] {
        self.root.children().unwrap_or(&[])
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    pub fn categories(&self) -> Vec<&str> {
        self.root.categories()
    }

    /// The partition at `level` (1-based) as `(label, categories)` pairs.
    pub fn groups_at(&self, level: usize) -> Result<Vec<(String, Vec<String>)>> {
        let depth = self.depth();
        if level == 0 || level > depth {
            return Err(Error::BadDepth { requested: level, depth });
        }
        let mut frontier: Vec<&GroupNode> = self.groups().iter().collect();
        for _ in 1..level {
            frontier = frontier
                .into_iter()
                .flat_map(|n| match n.children() {
                    Some(c) => c.iter().collect::<Vec<_>>(),
                    None => vec![n],
                })
                .collect();
        }
        Ok(frontier
            .into_iter()
            .map(|n| (n.label.clone(), n.categories().into_iter().map(str::to_string).collect()))
            .collect())
    }

    /// Checks that this tree targets `axis` and partitions its categories.
    pub fn check_partition(&self, axis: &Axis) -> Result<()> {
        if axis.name() != self.axis {
            return Err(Error::AxisMismatch(format!(
                "grouping targets axis `{}`, distribution axis is `{}`",
                self.axis,
                axis.name()
            )));
        }
        let cats: HashSet<&str> = self.categories().into_iter().collect();
        if let Some(missing) = axis.labels().iter().find(|l| !cats.contains(l.as_str())) {
            return Err(Error::AxisMismatch(format!("category `{missing}` is not assigned to any group")));
        }
        if cats.len() != axis.len() {
            let extra = cats.iter().find(|c| axis.position(c).is_none()).copied().unwrap_or("?");
            return Err(Error::AxisMismatch(format!("grouping names unknown category `{extra}`")));
        }
        Ok(())
    }
}
