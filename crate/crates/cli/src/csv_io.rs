//! CSV readers and writers for contingency tables, grouping trees and
//! time-sliced edge lists. Every reader expects a header row, commas and
//! `"`-quoting; cell whitespace is trimmed.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use csv::{ReaderBuilder, StringRecord, Trim, WriterBuilder};
use scidyn_core::data::{
    sort_labels, Axis, ContingencyTensor, GroupContent, GroupNode, GroupingTree, NodeInfo, Slice, TensorBuilder,
    TimeSlicedGraph,
};

use crate::error::{IoError, IoResult};

fn reader<R: Read>(input: R) -> csv::Reader<R> {
    ReaderBuilder::new().trim(Trim::All).from_reader(input)
}

fn open(path: &Path) -> IoResult<File> {
    File::open(path).map_err(IoError::file(path))
}

fn create(path: &Path) -> IoResult<File> {
    File::create(path).map_err(IoError::file(path))
}

fn line_of(record: &StringRecord) -> u64 {
    record.position().map_or(0, |p| p.line())
}

fn records<R: Read>(rdr: &mut csv::Reader<R>) -> impl Iterator<Item = IoResult<(u64, StringRecord)>> + '_ {
    rdr.records().map(|r| {
        let r = r.map_err(IoError::from_csv)?;
        Ok((line_of(&r), r))
    })
}

fn headers<R: Read>(rdr: &mut csv::Reader<R>) -> IoResult<Vec<String>> {
    Ok(rdr.headers().map_err(IoError::from_csv)?.iter().map(str::to_string).collect())
}

fn number(line: u64, field: &str, what: &str) -> IoResult<f64> {
    field.parse::<f64>().map_err(|_| IoError::parse(line, format!("{what} `{field}` is not a number")))
}

fn non_empty<'a>(line: u64, field: &'a str, what: &str) -> IoResult<&'a str> {
    if field.is_empty() {
        Err(IoError::parse(line, format!("empty {what}")))
    } else {
        Ok(field)
    }
}

/// Categories of one axis in order of first appearance.
#[derive(Default)]
struct Categories {
    labels: Vec<String>,
    index: HashMap<String, usize>,
}

impl Categories {
    fn intern(&mut self, label: &str) -> usize {
        if let Some(&i) = self.index.get(label) {
            return i;
        }
        self.labels.push(label.to_string());
        self.index.insert(label.to_string(), self.labels.len() - 1);
        self.labels.len() - 1
    }
}

/// Reads a long-format table: one column per axis, then `count`.
/// Categories keep their order of first appearance; repeated index tuples
/// are summed.
pub fn read_contingency<R: Read>(input: R) -> IoResult<ContingencyTensor> {
    let mut rdr = reader(input);
    let header = headers(&mut rdr)?;
    if header.len() < 2 || header.last().map(String::as_str) != Some("count") {
        return Err(IoError::parse(1, "header must name at least one axis and end with `count`"));
    }
    let names = &header[..header.len() - 1];
    if names.iter().collect::<BTreeSet<_>>().len() != names.len() || names.iter().any(String::is_empty) {
        return Err(IoError::parse(1, "axis names must be unique and non-empty"));
    }
    let mut cats: Vec<Categories> = names.iter().map(|_| Categories::default()).collect();
    let mut rows = Vec::new();
    for rec in records(&mut rdr) {
        let (line, rec) = rec?;
        let count_field = &rec[names.len()];
        let count = number(line, count_field, "count")?;
        if !count.is_finite() {
            return Err(IoError::parse(line, format!("count `{count_field}` is not finite")));
        }
        if count < 0.0 {
            return Err(IoError::NegativeCount { line, value: count });
        }
        let index = (0..names.len())
            .map(|k| Ok(cats[k].intern(non_empty(line, &rec[k], "category")?)))
            .collect::<IoResult<Vec<usize>>>()?;
        rows.push((index, count));
    }
    if rows.is_empty() {
        return Err(IoError::parse(1, "no data rows"));
    }
    let axes = names.iter().zip(cats).map(|(n, c)| Axis::new(n.as_str(), c.labels)).collect::<Result<Vec<_>, _>>()?;
    let mut builder = TensorBuilder::new(axes)?;
    for (index, count) in rows {
        builder.add(&index, count)?;
    }
    Ok(builder.build())
}

pub fn parse_contingency_csv(path: &Path) -> IoResult<ContingencyTensor> {
    read_contingency(open(path)?)
}

/// Writes a tensor in the format [`read_contingency`] accepts. Leading
/// zero-count rows declare every category in axis order, so reading the
/// file back yields the same axes even where whole categories are empty.
pub fn write_contingency<W: Write>(tensor: &ContingencyTensor, output: W) -> IoResult<()> {
    let mut w = WriterBuilder::new().from_writer(output);
    let axes = tensor.axes();
    let mut header: Vec<&str> = axes.iter().map(Axis::name).collect();
    header.push("count");
    w.write_record(&header).map_err(IoError::from_csv)?;
    let longest = axes.iter().map(Axis::len).max().unwrap_or(0);
    for j in 0..longest {
        let mut row: Vec<String> = axes.iter().map(|a| a.labels()[j.min(a.len() - 1)].clone()).collect();
        row.push("0".into());
        w.write_record(&row).map_err(IoError::from_csv)?;
    }
    for (index, count) in tensor.nonzero() {
        let mut row: Vec<String> = index.iter().zip(axes).map(|(&i, a)| a.labels()[i].clone()).collect();
        row.push(count.to_string());
        w.write_record(&row).map_err(IoError::from_csv)?;
    }
    w.flush().map_err(IoError::file(""))
}

pub fn export_contingency_csv(tensor: &ContingencyTensor, path: &Path) -> IoResult<()> {
    write_contingency(tensor, create(path)?)
}

struct Draft {
    label: String,
    line: u64,
    categories: Vec<String>,
    children: Vec<Draft>,
}

impl Draft {
    fn child(&mut self, label: &str, line: u64) -> &mut Draft {
        let at = match self.children.iter().position(|c| c.label == label) {
            Some(i) => i,
            None => {
                self.children.push(Draft { label: label.into(), line, categories: Vec::new(), children: Vec::new() });
                self.children.len() - 1
            }
        };
        &mut self.children[at]
    }

    fn finish(self) -> IoResult<GroupNode> {
        match (self.categories.is_empty(), self.children.is_empty()) {
            (false, true) => Ok(GroupNode::leaf(self.label, self.categories)),
            (true, false) => Ok(GroupNode::branch(
                self.label,
                self.children.into_iter().map(Draft::finish).collect::<IoResult<_>>()?,
            )),
            _ => Err(IoError::parse(self.line, format!("group `{}` holds both categories and subgroups", self.label))),
        }
    }
}

/// Reads `category, level1, level2, …` rows, group labels running from
/// coarse to fine. A row may leave trailing levels empty to place its
/// category in a shallower group. The first header names the grouped axis.
pub fn read_grouping<R: Read>(input: R) -> IoResult<GroupingTree> {
    let mut rdr = reader(input);
    let header = headers(&mut rdr)?;
    if header.len() < 2 || header[0].is_empty() {
        return Err(IoError::parse(1, "header must be `category, level1, ...`"));
    }
    let mut root = Draft { label: String::new(), line: 1, categories: Vec::new(), children: Vec::new() };
    let mut seen = HashMap::new();
    for rec in records(&mut rdr) {
        let (line, rec) = rec?;
        let category = non_empty(line, &rec[0], "category")?;
        if seen.insert(category.to_string(), line).is_some() {
            return Err(IoError::Overlap { line, category: category.into() });
        }
        let path: Vec<&str> = rec.iter().skip(1).take_while(|l| !l.is_empty()).collect();
        if path.is_empty() {
            return Err(IoError::parse(line, format!("category `{category}` has no group")));
        }
        if rec.iter().skip(1 + path.len()).any(|l| !l.is_empty()) {
            return Err(IoError::parse(line, "group levels must not skip a level"));
        }
        let mut at = &mut root;
        for label in path {
            at = at.child(label, line);
        }
        at.categories.push(category.into());
    }
    if root.children.is_empty() {
        return Err(IoError::parse(1, "no data rows"));
    }
    let groups = root.children.into_iter().map(Draft::finish).collect::<IoResult<Vec<_>>>()?;
    Ok(GroupingTree::new(header[0].as_str(), groups)?)
}

pub fn parse_grouping(path: &Path) -> IoResult<GroupingTree> {
    read_grouping(open(path)?)
}

pub fn write_grouping<W: Write>(tree: &GroupingTree, output: W) -> IoResult<()> {
    fn rows(node: &GroupNode, path: &mut Vec<String>, out: &mut Vec<(String, Vec<String>)>) {
        path.push(node.label.clone());
        match &node.content {
            GroupContent::Leaf(cats) => out.extend(cats.iter().map(|c| (c.clone(), path.clone()))),
            GroupContent::Groups(children) => children.iter().for_each(|c| rows(c, path, out)),
        }
        path.pop();
    }
    let mut out = Vec::new();
    for g in tree.groups() {
        rows(g, &mut Vec::new(), &mut out);
    }
    let depth = tree.depth();
    let mut w = WriterBuilder::new().from_writer(output);
    let mut header = vec![tree.axis().to_string()];
    header.extend((1..=depth).map(|l| format!("level{l}")));
    w.write_record(&header).map_err(IoError::from_csv)?;
    for (cat, path) in out {
        let mut row = vec![cat];
        row.extend(path.iter().cloned());
        row.resize(depth + 1, String::new());
        w.write_record(&row).map_err(IoError::from_csv)?;
    }
    w.flush().map_err(IoError::file(""))
}

pub fn export_grouping(tree: &GroupingTree, path: &Path) -> IoResult<()> {
    write_grouping(tree, create(path)?)
}

fn expect_header<R: Read>(rdr: &mut csv::Reader<R>, expected: &[&str]) -> IoResult<()> {
    let header = headers(rdr)?;
    let matches = header.len() == expected.len() && header.iter().zip(expected).all(|(h, e)| h.eq_ignore_ascii_case(e));
    if matches {
        Ok(())
    } else {
        Err(IoError::parse(1, format!("expected header `{}`", expected.join(","))))
    }
}

/// Reads `time, source, target, weight` rows plus an optional `time, node`
/// presence list for isolated nodes. Edges are undirected; repeated edges
/// within a slice are summed. Nodes and slices are ordered numerically when
/// every label is numeric, lexicographically otherwise.
pub fn read_timesliced_edges<R: Read, P: Read>(edges: R, presence: Option<P>) -> IoResult<TimeSlicedGraph> {
    let mut rdr = reader(edges);
    expect_header(&mut rdr, &["time", "source", "target", "weight"])?;
    let mut weights: BTreeMap<String, BTreeMap<(String, String), f64>> = BTreeMap::new();
    let mut present: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for rec in records(&mut rdr) {
        let (line, rec) = rec?;
        let time = non_empty(line, &rec[0], "time label")?;
        let (a, b) = (non_empty(line, &rec[1], "source")?, non_empty(line, &rec[2], "target")?);
        let weight = number(line, &rec[3], "weight")?;
        if weight.is_nan() {
            return Err(IoError::parse(line, "weight is NaN"));
        }
        if !(weight > 0.0 && weight.is_finite()) {
            return Err(IoError::NonPositiveWeight { line, weight });
        }
        if a == b {
            return Err(IoError::SelfLoop { line, node: a.into() });
        }
        let key = if a < b { (a.to_string(), b.to_string()) } else { (b.to_string(), a.to_string()) };
        *weights.entry(time.into()).or_default().entry(key).or_insert(0.0) += weight;
        present.entry(time.into()).or_default().extend([a.to_string(), b.to_string()]);
    }
    if let Some(p) = presence {
        let mut rdr = reader(p);
        expect_header(&mut rdr, &["time", "node"])?;
        for rec in records(&mut rdr) {
            let (line, rec) = rec?;
            let time = non_empty(line, &rec[0], "time label")?;
            let node = non_empty(line, &rec[1], "node")?;
            present.entry(time.into()).or_default().insert(node.into());
        }
    }
    let mut ids: Vec<String> = present.values().flatten().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    sort_labels(&mut ids);
    let index: HashMap<&str, usize> = ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
    let mut times: Vec<String> = present.keys().cloned().collect();
    sort_labels(&mut times);
    let slices = times
        .iter()
        .map(|t| {
            let edges =
                weights.get(t).into_iter().flatten().map(|((a, b), &w)| (index[a.as_str()], index[b.as_str()], w));
            let nodes = present[t].iter().map(|n| index[n.as_str()]);
            Slice::new(t.as_str(), edges, nodes)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(TimeSlicedGraph::new(ids.into_iter().map(NodeInfo::new).collect(), slices)?)
}

pub fn parse_timesliced_edges(path: &Path, presence: Option<&Path>) -> IoResult<TimeSlicedGraph> {
    let p = presence.map(open).transpose()?;
    read_timesliced_edges(open(path)?, p)
}

/// Writes the edge list and the presence list of nodes without edges in
/// their slice.
pub fn write_timesliced_edges<W: Write, P: Write>(graph: &TimeSlicedGraph, edges: W, presence: P) -> IoResult<()> {
    let id = |i: usize| graph.nodes()[i].id.as_str();
    let mut w = WriterBuilder::new().from_writer(edges);
    w.write_record(["time", "source", "target", "weight"]).map_err(IoError::from_csv)?;
    let mut p = WriterBuilder::new().from_writer(presence);
    p.write_record(["time", "node"]).map_err(IoError::from_csv)?;
    for s in graph.slices() {
        let mut touched = BTreeSet::new();
        for e in s.edges() {
            w.write_record([s.time(), id(e.a), id(e.b), &e.weight.to_string()]).map_err(IoError::from_csv)?;
            touched.extend([e.a, e.b]);
        }
        for &n in s.present().difference(&touched) {
            p.write_record([s.time(), id(n)]).map_err(IoError::from_csv)?;
        }
    }
    w.flush().map_err(IoError::file(""))?;
    p.flush().map_err(IoError::file(""))
}

pub fn export_timesliced_edges(graph: &TimeSlicedGraph, path: &Path, presence: &Path) -> IoResult<()> {
    write_timesliced_edges(graph, create(path)?, create(presence)?)
}
