//! SVG output for animated layouts: a numbered frame sequence with linear
//! interpolation between slices, and one self-contained SMIL animation.
//!
//! All frames share one global bounding box, so motion on screen is
//! comparable across the whole timeline. Nodes entering or leaving fade
//! over the transition where the change happens.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use scidyn_core::data::{AnimationTrack, Slice, TimeSlicedGraph};
use scidyn_core::metrics::{betweenness_centrality, normalize_betweenness, PathMetric};

use crate::error::{IoError, IoResult};

pub type Rgb = [u8; 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeAttribute {
    Degree,
    /// Sum of incident edge weights.
    Strength,
    /// Normalized hop betweenness.
    Betweenness,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RadiusRule {
    Fixed(f64),
    /// `base + scale · √value` of the attribute in the current slice.
    SqrtAttribute {
        attribute: NodeAttribute,
        base: f64,
        scale: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ColorRule {
    Fixed(Rgb),
    /// Linear blend from `low` to `high` by normalized betweenness.
    BetweennessGradient {
        low: Rgb,
        high: Rgb,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum LabelRule {
    Hidden,
    All,
    /// Labels nodes whose normalized betweenness is at least this value.
    MinBetweenness(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderSpec {
    pub width: u32,
    pub height: u32,
    pub radius: RadiusRule,
    pub color: ColorRule,
    pub interpolation_steps: usize,
    pub labels: LabelRule,
    /// Playback time of one slice-to-slice transition in the animation.
    pub seconds_per_transition: f64,
}

impl Default for RenderSpec {
    fn default() -> Self {
        Self {
            width: 800,
            height: 600,
            radius: RadiusRule::Fixed(6.0),
            color: ColorRule::Fixed([70, 130, 180]),
            interpolation_steps: 10,
            labels: LabelRule::All,
            seconds_per_transition: 1.0,
        }
    }
}

impl RenderSpec {
    pub fn validate(&self) -> IoResult<()> {
        let bad = |m: &str| Err(IoError::InvalidSpec(m.into()));
        if self.width == 0 || self.height == 0 {
            return bad("canvas dimensions must be positive");
        }
        if self.interpolation_steps == 0 {
            return bad("interpolation_steps must be at least 1");
        }
        if !(self.seconds_per_transition > 0.0 && self.seconds_per_transition.is_finite()) {
            return bad("seconds_per_transition must be positive");
        }
        let ok_radius = match self.radius {
            RadiusRule::Fixed(r) => r > 0.0 && r.is_finite(),
            RadiusRule::SqrtAttribute { base, scale, .. } => {
                base >= 0.0 && scale >= 0.0 && base.is_finite() && scale.is_finite() && base + scale > 0.0
            }
        };
        if !ok_radius {
            return bad("radius must be positive");
        }
        Ok(())
    }

    pub fn frame_count(&self, slices: usize) -> usize {
        if slices == 0 {
            0
        } else {
            (slices - 1) * self.interpolation_steps + 1
        }
    }
}

/// What a slice says about one node before interpolation.
#[derive(Debug, Clone, Copy)]
struct Key {
    x: f64,
    y: f64,
    r: f64,
    rgb: [f64; 3],
    betweenness: f64,
}

/// One node as drawn in one frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeState {
    pub x: f64,
    pub y: f64,
    pub r: f64,
    pub rgb: [f64; 3],
    pub opacity: f64,
    pub labeled: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameState {
    /// Label shown in the corner: the nearer slice's time.
    pub time: String,
    pub nodes: BTreeMap<usize, NodeState>,
    /// Endpoints and opacity of each drawn edge.
    pub edges: Vec<(usize, usize, f64)>,
}

fn lerp(a: f64, b: f64, t: f64) -> f64 {
    a + (b - a) * t
}

fn check_labels(track: &AnimationTrack, graph: &TimeSlicedGraph) -> IoResult<()> {
    let ids: Vec<&str> = graph.nodes().iter().map(|n| n.id.as_str()).collect();
    if track.node_ids.iter().map(String::as_str).ne(ids.iter().copied()) {
        return Err(IoError::LabelMismatch("node ids differ".into()));
    }
    if track.frames.len() != graph.slices().len() {
        return Err(IoError::LabelMismatch(format!(
            "{} layout frames for {} slices",
            track.frames.len(),
            graph.slices().len()
        )));
    }
    for (f, s) in track.frames.iter().zip(graph.slices()) {
        if f.time != s.time() {
            return Err(IoError::LabelMismatch(format!("frame `{}` against slice `{}`", f.time, s.time())));
        }
        if !f.positions.keys().eq(s.present().iter()) {
            return Err(IoError::LabelMismatch(format!("positioned nodes differ from slice `{}`", s.time())));
        }
    }
    Ok(())
}

fn attribute(slice: &Slice, which: NodeAttribute, betweenness: &BTreeMap<usize, f64>) -> BTreeMap<usize, f64> {
    let mut out: BTreeMap<usize, f64> = slice.present().iter().map(|&n| (n, 0.0)).collect();
    match which {
        NodeAttribute::Betweenness => return betweenness.clone(),
        NodeAttribute::Degree | NodeAttribute::Strength => {
            for e in slice.edges() {
                let w = if which == NodeAttribute::Degree { 1.0 } else { e.weight };
                *out.get_mut(&e.a).expect("endpoint present") += w;
                *out.get_mut(&e.b).expect("endpoint present") += w;
            }
        }
    }
    out
}

/// Maps layout coordinates onto the canvas with one bounding box for the
/// whole track.
struct Viewport {
    min: [f64; 2],
    scale: f64,
    offset: [f64; 2],
}

impl Viewport {
    fn new(track: &AnimationTrack, spec: &RenderSpec, margin: f64) -> Self {
        let mut min = [f64::INFINITY; 2];
        let mut max = [f64::NEG_INFINITY; 2];
        for p in track.frames.iter().flat_map(|f| f.positions.values()) {
            for k in 0..2 {
                let v = p.get(k).copied().unwrap_or(0.0);
                min[k] = min[k].min(v);
                max[k] = max[k].max(v);
            }
        }
        if !min[0].is_finite() {
            min = [0.0; 2];
            max = [0.0; 2];
        }
        let (w, h) = (f64::from(spec.width), f64::from(spec.height));
        let avail = [(w - 2.0 * margin).max(1.0), (h - 2.0 * margin).max(1.0)];
        let span = [max[0] - min[0], max[1] - min[1]];
        let scale = match (span[0] > 0.0, span[1] > 0.0) {
            (false, false) => 1.0,
            (true, false) => avail[0] / span[0],
            (false, true) => avail[1] / span[1],
            (true, true) => (avail[0] / span[0]).min(avail[1] / span[1]),
        };
        let offset = [(w - span[0] * scale) / 2.0, (h - span[1] * scale) / 2.0];
        Self { min, scale, offset }
    }

    fn map(&self, p: &[f64]) -> (f64, f64) {
        let at = |k: usize| p.get(k).copied().unwrap_or(0.0);
        (self.offset[0] + (at(0) - self.min[0]) * self.scale, self.offset[1] + (at(1) - self.min[1]) * self.scale)
    }
}

fn max_radius(spec: &RenderSpec, values: &[BTreeMap<usize, f64>]) -> f64 {
    match spec.radius {
        RadiusRule::Fixed(r) => r,
        RadiusRule::SqrtAttribute { base, scale, .. } => {
            let top = values.iter().flat_map(|m| m.values()).fold(0.0f64, |a, &b| a.max(b));
            base + scale * top.sqrt()
        }
    }
}

/// Per-frame drawing state: `(slices − 1) · steps + 1` frames, endpoints
/// included.
pub fn frame_states(track: &AnimationTrack, graph: &TimeSlicedGraph, spec: &RenderSpec) -> IoResult<Vec<FrameState>> {
    spec.validate()?;
    check_labels(track, graph)?;
    let betweenness: Vec<BTreeMap<usize, f64>> = graph
        .slices()
        .iter()
        .map(|s| Ok(normalize_betweenness(&betweenness_centrality(s, PathMetric::Hops)?)))
        .collect::<IoResult<_>>()?;
    let radius_values: Vec<BTreeMap<usize, f64>> = match spec.radius {
        RadiusRule::SqrtAttribute { attribute: a, .. } => {
            graph.slices().iter().zip(&betweenness).map(|(s, b)| attribute(s, a, b)).collect()
        }
        RadiusRule::Fixed(_) => Vec::new(),
    };
    let view = Viewport::new(track, spec, max_radius(spec, &radius_values) + 4.0);
    let keys: Vec<BTreeMap<usize, Key>> = track
        .frames
        .iter()
        .enumerate()
        .map(|(t, f)| {
            f.positions
                .iter()
                .map(|(&n, p)| {
                    let (x, y) = view.map(p);
                    let b = betweenness[t].get(&n).copied().unwrap_or(0.0);
                    let r = match spec.radius {
                        RadiusRule::Fixed(r) => r,
                        RadiusRule::SqrtAttribute { base, scale, .. } => base + scale * radius_values[t][&n].sqrt(),
                    };
                    let rgb = match spec.color {
                        ColorRule::Fixed(c) => c.map(f64::from),
                        ColorRule::BetweennessGradient { low, high } => {
                            [0, 1, 2].map(|k| lerp(f64::from(low[k]), f64::from(high[k]), b))
                        }
                    };
                    (n, Key { x, y, r, rgb, betweenness: b })
                })
                .collect()
        })
        .collect();
    let labeled = |b: f64| match spec.labels {
        LabelRule::Hidden => false,
        LabelRule::All => true,
        LabelRule::MinBetweenness(min) => b >= min,
    };
    let still = |t: usize| FrameState {
        time: track.frames[t].time.clone(),
        nodes: keys[t]
            .iter()
            .map(|(&n, k)| {
                let s = NodeState { x: k.x, y: k.y, r: k.r, rgb: k.rgb, opacity: 1.0, labeled: labeled(k.betweenness) };
                (n, s)
            })
            .collect(),
        edges: graph.slices()[t].edges().iter().map(|e| (e.a, e.b, 1.0)).collect(),
    };
    let slices = graph.slices();
    let steps = spec.interpolation_steps;
    let mut frames = Vec::with_capacity(spec.frame_count(slices.len()));
    for t in 0..slices.len().saturating_sub(1) {
        let (from, to) = (&keys[t], &keys[t + 1]);
        let nodes: BTreeSet<usize> = from.keys().chain(to.keys()).copied().collect();
        let edges: BTreeMap<(usize, usize), (bool, bool)> = {
            let mut m = BTreeMap::new();
            for e in slices[t].edges() {
                m.insert((e.a, e.b), (true, false));
            }
            for e in slices[t + 1].edges() {
                m.entry((e.a, e.b)).or_insert((false, false)).1 = true;
            }
            m
        };
        for k in 0..steps {
            let a = k as f64 / steps as f64;
            if k == 0 {
                // the slice itself, with arrivals waiting invisibly
                let mut f = still(t);
                for &n in to.keys().filter(|n| !from.contains_key(n)) {
                    let q = &to[&n];
                    let s =
                        NodeState { x: q.x, y: q.y, r: q.r, rgb: q.rgb, opacity: 0.0, labeled: labeled(q.betweenness) };
                    f.nodes.insert(n, s);
                }
                f.edges = edges.iter().map(|(&(u, v), &(p, _))| (u, v, if p { 1.0 } else { 0.0 })).collect();
                frames.push(f);
                continue;
            }
            let states = nodes
                .iter()
                .map(|&n| {
                    let s = match (from.get(&n), to.get(&n)) {
                        (Some(p), Some(q)) => NodeState {
                            x: lerp(p.x, q.x, a),
                            y: lerp(p.y, q.y, a),
                            r: lerp(p.r, q.r, a),
                            rgb: [0, 1, 2].map(|c| lerp(p.rgb[c], q.rgb[c], a)),
                            opacity: 1.0,
                            labeled: labeled(lerp(p.betweenness, q.betweenness, a)),
                        },
                        (Some(p), None) => NodeState {
                            x: p.x,
                            y: p.y,
                            r: p.r,
                            rgb: p.rgb,
                            opacity: 1.0 - a,
                            labeled: labeled(p.betweenness),
                        },
                        (None, Some(q)) => NodeState {
                            x: q.x,
                            y: q.y,
                            r: q.r,
                            rgb: q.rgb,
                            opacity: a,
                            labeled: labeled(q.betweenness),
                        },
                        (None, None) => unreachable!("node drawn in neither slice"),
                    };
                    (n, s)
                })
                .collect();
            let edge_states = edges
                .iter()
                .map(|(&(u, v), &presence)| {
                    let o = match presence {
                        (true, true) => 1.0,
                        (true, false) => 1.0 - a,
                        _ => a,
                    };
                    (u, v, o)
                })
                .collect();
            let time = if a < 0.5 { &slices[t] } else { &slices[t + 1] }.time().to_string();
            frames.push(FrameState { time, nodes: states, edges: edge_states });
        }
    }
    if !slices.is_empty() {
        frames.push(still(slices.len() - 1));
    }
    Ok(frames)
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

fn hex(rgb: [f64; 3]) -> String {
    let c = rgb.map(|v| v.round().clamp(0.0, 255.0) as u8);
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

fn open_svg(out: &mut String, spec: &RenderSpec) {
    let (w, h) = (spec.width, spec.height);
    let _ = writeln!(out, "<?xml version=\"1.0\" encoding=\"UTF-8\"?>");
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">"
    );
    let _ = writeln!(out, "<rect x=\"0\" y=\"0\" width=\"{w}\" height=\"{h}\" fill=\"#ffffff\"/>");
}

fn frame_svg(frame: &FrameState, ids: &[String], spec: &RenderSpec) -> String {
    let mut out = String::new();
    open_svg(&mut out, spec);
    let _ = writeln!(
        out,
        "<text x=\"8\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">{}</text>",
        escape(&frame.time)
    );
    let _ = writeln!(out, "<g stroke=\"#999999\" stroke-width=\"1\">");
    for &(u, v, o) in &frame.edges {
        let (a, b) = (&frame.nodes[&u], &frame.nodes[&v]);
        let _ = writeln!(
            out,
            "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke-opacity=\"{o:.4}\"/>",
            a.x, a.y, b.x, b.y
        );
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, "<g>");
    for (&n, s) in &frame.nodes {
        let _ = writeln!(
            out,
            "<circle id=\"n{n}\" cx=\"{:.2}\" cy=\"{:.2}\" r=\"{:.2}\" fill=\"{}\" opacity=\"{:.4}\"><title>{}</title></circle>",
            s.x,
            s.y,
            s.r,
            hex(s.rgb),
            s.opacity,
            escape(&ids[n])
        );
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, "<g font-family=\"sans-serif\" font-size=\"11\">");
    for (&n, s) in frame.nodes.iter().filter(|(_, s)| s.labeled) {
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\" opacity=\"{:.4}\">{}</text>",
            s.x + s.r + 2.0,
            s.y + 4.0,
            s.opacity,
            escape(&ids[n])
        );
    }
    let _ = writeln!(out, "</g>");
    out.push_str("</svg>\n");
    out
}

/// One SVG document per frame.
pub fn render_frames(track: &AnimationTrack, graph: &TimeSlicedGraph, spec: &RenderSpec) -> IoResult<Vec<String>> {
    let frames = frame_states(track, graph, spec)?;
    Ok(frames.iter().map(|f| frame_svg(f, &track.node_ids, spec)).collect())
}

/// Values of one attribute across all frames, `;`-separated.
fn series(frames: &[FrameState], value: impl Fn(&FrameState) -> String) -> String {
    frames.iter().map(value).collect::<Vec<_>>().join(";")
}

fn animate(out: &mut String, attribute: &str, values: &str, seconds: f64) {
    let _ = writeln!(
        out,
        "<animate attributeName=\"{attribute}\" values=\"{values}\" dur=\"{seconds:.3}s\" repeatCount=\"indefinite\"/>"
    );
}

/// A single SVG whose SMIL animations replay the frame sequence. With one
/// slice it is a still image without animation elements.
pub fn render_animation_svg(track: &AnimationTrack, graph: &TimeSlicedGraph, spec: &RenderSpec) -> IoResult<String> {
    let frames = frame_states(track, graph, spec)?;
    if frames.len() == 1 {
        return Ok(frame_svg(&frames[0], &track.node_ids, spec));
    }
    let seconds = (graph.slices().len() - 1) as f64 * spec.seconds_per_transition;
    // Where a node is not drawn it sits, invisible, at its nearest drawn
    // position so that it never streaks across the canvas.
    let nodes: BTreeSet<usize> = frames.iter().flat_map(|f| f.nodes.keys().copied()).collect();
    let mut filled: BTreeMap<usize, Vec<NodeState>> = BTreeMap::new();
    for &n in &nodes {
        let first = frames.iter().find_map(|f| f.nodes.get(&n)).copied().expect("node drawn somewhere");
        let mut last = NodeState { opacity: 0.0, labeled: false, ..first };
        let mut column = Vec::with_capacity(frames.len());
        for f in &frames {
            match f.nodes.get(&n) {
                Some(s) => {
                    last = NodeState { opacity: 0.0, labeled: false, ..*s };
                    column.push(*s);
                }
                None => column.push(last),
            }
        }
        filled.insert(n, column);
    }
    let mut out = String::new();
    open_svg(&mut out, spec);
    let times: Vec<&str> = graph.slices().iter().map(Slice::time).collect();
    for (i, t) in times.iter().enumerate() {
        let _ = writeln!(
            out,
            "<text x=\"8\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\" opacity=\"{}\">{}",
            if i == 0 { 1 } else { 0 },
            escape(t)
        );
        let _ = writeln!(
            out,
            "<animate attributeName=\"opacity\" calcMode=\"discrete\" values=\"{}\" dur=\"{seconds:.3}s\" repeatCount=\"indefinite\"/>",
            series(&frames, |f| if f.time == *t { "1".into() } else { "0".into() })
        );
        let _ = writeln!(out, "</text>");
    }
    let edges: BTreeSet<(usize, usize)> = frames.iter().flat_map(|f| f.edges.iter().map(|&(u, v, _)| (u, v))).collect();
    let _ = writeln!(out, "<g stroke=\"#999999\" stroke-width=\"1\">");
    for &(u, v) in &edges {
        let opacity: Vec<f64> =
            frames.iter().map(|f| f.edges.iter().find(|e| (e.0, e.1) == (u, v)).map_or(0.0, |e| e.2)).collect();
        let (a, b) = (&filled[&u], &filled[&v]);
        let _ = writeln!(
            out,
            "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke-opacity=\"{:.4}\">",
            a[0].x, a[0].y, b[0].x, b[0].y, opacity[0]
        );
        let join = |xs: Vec<String>| xs.join(";");
        animate(&mut out, "x1", &join(a.iter().map(|s| format!("{:.2}", s.x)).collect()), seconds);
        animate(&mut out, "y1", &join(a.iter().map(|s| format!("{:.2}", s.y)).collect()), seconds);
        animate(&mut out, "x2", &join(b.iter().map(|s| format!("{:.2}", s.x)).collect()), seconds);
        animate(&mut out, "y2", &join(b.iter().map(|s| format!("{:.2}", s.y)).collect()), seconds);
        animate(&mut out, "stroke-opacity", &join(opacity.iter().map(|o| format!("{o:.4}")).collect()), seconds);
        let _ = writeln!(out, "</line>");
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, "<g>");
    for (&n, column) in &filled {
        let s = &column[0];
        let _ = writeln!(
            out,
            "<circle id=\"n{n}\" cx=\"{:.2}\" cy=\"{:.2}\" r=\"{:.2}\" fill=\"{}\" opacity=\"{:.4}\"><title>{}</title>",
            s.x,
            s.y,
            s.r,
            hex(s.rgb),
            s.opacity,
            escape(&track.node_ids[n])
        );
        let values = |f: &dyn Fn(&NodeState) -> String| column.iter().map(f).collect::<Vec<_>>().join(";");
        animate(&mut out, "cx", &values(&|s| format!("{:.2}", s.x)), seconds);
        animate(&mut out, "cy", &values(&|s| format!("{:.2}", s.y)), seconds);
        animate(&mut out, "r", &values(&|s| format!("{:.2}", s.r)), seconds);
        animate(&mut out, "fill", &values(&|s| hex(s.rgb)), seconds);
        animate(&mut out, "opacity", &values(&|s| format!("{:.4}", s.opacity)), seconds);
        let _ = writeln!(out, "</circle>");
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, "<g font-family=\"sans-serif\" font-size=\"11\">");
    for (&n, column) in filled.iter().filter(|(_, c)| c.iter().any(|s| s.labeled)) {
        let shown = |s: &NodeState| if s.labeled { s.opacity } else { 0.0 };
        let s = &column[0];
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\" opacity=\"{:.4}\">{}",
            s.x + s.r + 2.0,
            s.y + 4.0,
            shown(s),
            escape(&track.node_ids[n])
        );
        let values = |f: &dyn Fn(&NodeState) -> String| column.iter().map(f).collect::<Vec<_>>().join(";");
        animate(&mut out, "x", &values(&|s| format!("{:.2}", s.x + s.r + 2.0)), seconds);
        animate(&mut out, "y", &values(&|s| format!("{:.2}", s.y + 4.0)), seconds);
        animate(&mut out, "opacity", &values(&|s| format!("{:.4}", shown(s))), seconds);
        let _ = writeln!(out, "</text>");
    }
    let _ = writeln!(out, "</g>");
    out.push_str("</svg>\n");
    Ok(out)
}

/// Files written by [`render_animation`].
#[derive(Debug, Clone, PartialEq)]
pub struct RenderOutput {
    pub frames: Vec<PathBuf>,
    pub animation: PathBuf,
}

pub fn frame_file_name(index: usize) -> String {
    format!("frame_{index:05}.svg")
}

/// Writes `frame_00000.svg`, … and `animation.svg` into `out_dir`,
/// creating it if needed.
pub fn render_animation(
    track: &AnimationTrack,
    graph: &TimeSlicedGraph,
    spec: &RenderSpec,
    out_dir: &Path,
) -> IoResult<RenderOutput> {
    let frames = render_frames(track, graph, spec)?;
    let animation = render_animation_svg(track, graph, spec)?;
    fs::create_dir_all(out_dir).map_err(IoError::file(out_dir))?;
    let mut paths = Vec::with_capacity(frames.len());
    for (i, svg) in frames.iter().enumerate() {
        let path = out_dir.join(frame_file_name(i));
        fs::write(&path, svg).map_err(IoError::file(&path))?;
        paths.push(path);
    }
    let path = out_dir.join("animation.svg");
    fs::write(&path, animation).map_err(IoError::file(&path))?;
    Ok(RenderOutput { frames: paths, animation: path })
}
