//! The `scidyn` command line. Exit codes: 0 success, 1 usage error,
//! 2 data error.

use std::collections::{BTreeMap, BTreeSet};
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use scidyn_core::data::{
    marginalize, normalize, sort_labels, Axis, ContingencyTensor, GroupingTree, ProbabilityDistribution, TensorBuilder,
    TimeSlicedGraph,
};
use scidyn_core::entropy::{
    interaction_information3, kl_decompose_with, kl_divergence_with, mutual_information2, nested_decompose,
    shannon_entropy, theil_decompose, thermodynamic_entropy, transition_information, SupportPolicy, DEFAULT_SMOOTHING,
};
use scidyn_core::layout::{layout_graph, DistanceTransform, Initialization, LayoutConfig};
use scidyn_core::metrics::{centrality_series, PathMetric, DEFAULT_SPIKE_THRESHOLD};
use serde::Serialize;

use crate::csv_io::{parse_contingency_csv, parse_grouping, parse_timesliced_edges};
use crate::error::IoError;
use crate::json::{to_json_string, track_from_json, track_to_json};
use crate::render::{
    frame_file_name, render_animation, ColorRule, LabelRule, NodeAttribute, RadiusRule, RenderSpec, Rgb,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "scidyn",
    version,
    about = "Entropy statistics, dynamic layouts and broker detection for longitudinal data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Shannon entropy of a contingency table, in bits.
    Entropy(TableArgs),
    /// Between/within decomposition of entropy along a grouping.
    Decompose(DecomposeArgs),
    /// Kullback-Leibler divergence of --input from --prior.
    Kl(KlArgs),
    /// Mutual information of a two-axis table.
    MutualInfo(AxesArgs),
    /// Signed three-way interaction information of a three-axis table.
    TripleHelix(AxesArgs),
    /// Information of each step of a series sliced along a time axis.
    Transition(TransitionArgs),
    /// Temporally coupled layout of a time-sliced graph.
    Layout(LayoutArgs),
    /// SVG frames and a SMIL animation of a time-sliced graph.
    Animate(AnimateArgs),
    /// Betweenness centrality per slice and spike flags.
    Betweenness(BetweennessArgs),
}

#[derive(Debug, Args)]
struct Output {
    /// Write JSON here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TableArgs {
    /// Long-format CSV: one column per axis, then `count`.
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct DecomposeArgs {
    #[arg(long)]
    input: PathBuf,
    /// CSV of `category, level1, level2, ...`.
    #[arg(long)]
    grouping: PathBuf,
    /// Axis to group; defaults to the axis whose categories the grouping covers.
    #[arg(long)]
    axis: Option<String>,
    /// Grouping level for a flat decomposition.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    level: u64,
    /// Recurse through every level of the grouping.
    #[arg(long, conflicts_with = "level")]
    nested: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Smoothing {
    Off,
    Epsilon(f64),
}

fn parse_smoothing(s: &str) -> Result<Smoothing, String> {
    match s {
        "off" => Ok(Smoothing::Off),
        "on" | "epsilon" => Ok(Smoothing::Epsilon(DEFAULT_SMOOTHING)),
        other => match other.parse::<f64>() {
            Ok(e) if e > 0.0 && e.is_finite() => Ok(Smoothing::Epsilon(e)),
            _ => Err(format!("expected `off`, `epsilon` or a positive number, got `{other}`")),
        },
    }
}

impl Smoothing {
    fn policy(self) -> SupportPolicy {
        match self {
            Self::Off => SupportPolicy::Strict,
            Self::Epsilon(e) => SupportPolicy::Smoothed(e),
        }
    }
}

#[derive(Debug, Args)]
struct KlArgs {
    /// Posterior (observed) table.
    #[arg(long)]
    input: PathBuf,
    /// Prior (expected) table over the same axes.
    #[arg(long)]
    prior: PathBuf,
    /// Optional grouping for a between/within split.
    #[arg(long)]
    grouping: Option<PathBuf>,
    #[arg(long)]
    axis: Option<String>,
    /// `off`, `epsilon` (default ε) or a positive ε added to every cell.
    #[arg(long, default_value = "off", value_parser = parse_smoothing)]
    smoothing: Smoothing,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct AxesArgs {
    #[arg(long)]
    input: PathBuf,
    /// Axes to keep, comma-separated; defaults to all axes.
    #[arg(long, value_delimiter = ',')]
    axes: Vec<String>,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct TransitionArgs {
    #[arg(long)]
    input: PathBuf,
    /// Axis whose categories order the series.
    #[arg(long, default_value = "time")]
    time_axis: String,
    #[arg(long)]
    grouping: Option<PathBuf>,
    #[arg(long, default_value = "off", value_parser = parse_smoothing)]
    smoothing: Smoothing,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Transform {
    Explicit,
    Reciprocal,
    OneMinusCosine,
}

impl From<Transform> for DistanceTransform {
    fn from(t: Transform) -> Self {
        match t {
            Transform::Explicit => Self::Explicit,
            Transform::Reciprocal => Self::Reciprocal,
            Transform::OneMinusCosine => Self::OneMinusCosine,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Init {
    Classical,
    Uniform,
}

#[derive(Debug, Args)]
struct GraphInput {
    /// CSV of `time, source, target, weight`.
    #[arg(long)]
    input: PathBuf,
    /// Optional CSV of `time, node` for nodes without edges.
    #[arg(long)]
    presence: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SolverArgs {
    /// Temporal weight ω.
    #[arg(long, default_value_t = 1.0)]
    omega: f64,
    #[arg(long, env = "SCIDYN_SEED", default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(2..=3))]
    dims: u8,
    /// How edge weights become target distances.
    #[arg(long, value_enum, default_value = "explicit")]
    transform: Transform,
    #[arg(long, default_value_t = 500)]
    max_iterations: usize,
    #[arg(long, default_value_t = 1e-6)]
    tolerance: f64,
    #[arg(long, value_enum, default_value = "classical")]
    init: Init,
}

impl SolverArgs {
    fn config(&self) -> LayoutConfig {
        LayoutConfig {
            omega: self.omega,
            dimensions: usize::from(self.dims),
            max_iterations: self.max_iterations,
            relative_tolerance: self.tolerance,
            seed: self.seed,
            distance_transform: self.transform.into(),
            initialization: match self.init {
                Init::Classical => Initialization::Classical,
                Init::Uniform => Initialization::Uniform,
            },
        }
    }
}

#[derive(Debug, Args)]
struct LayoutArgs {
    #[command(flatten)]
    graph: GraphInput,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct AnimateArgs {
    #[command(flatten)]
    graph: GraphInput,
    #[command(flatten)]
    solver: SolverArgs,
    /// Use a layout previously written by `scidyn layout` instead of solving.
    #[arg(long)]
    track: Option<PathBuf>,
    /// Directory for the frames and animation.svg.
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    interpolation_steps: u64,
    #[arg(long, default_value_t = 800, value_parser = clap::value_parser!(u32).range(1..))]
    width: u32,
    #[arg(long, default_value_t = 600, value_parser = clap::value_parser!(u32).range(1..))]
    height: u32,
    /// A fixed radius in pixels, or `degree`, `strength` or `betweenness`
    /// for a radius growing with the square root of that attribute.
    #[arg(long, default_value = "6")]
    radius: String,
    /// A `#rrggbb` color, or `betweenness` for a blue-to-red gradient.
    #[arg(long, default_value = "#4682b4")]
    color: String,
    /// `all`, `none`, or a minimum normalized betweenness for labels.
    #[arg(long, default_value = "all")]
    labels: String,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct BetweennessArgs {
    #[command(flatten)]
    graph: GraphInput,
    /// Use transformed edge weights as path lengths instead of hop counts.
    #[arg(long)]
    weighted: bool,
    #[arg(long, value_enum, default_value = "explicit")]
    transform: Transform,
    /// Rise in normalized betweenness that flags a node.
    #[arg(long, default_value_t = DEFAULT_SPIKE_THRESHOLD)]
    threshold: f64,
    #[command(flatten)]
    output: Output,
}

/// Problems with the arguments that clap cannot see.
struct Usage(String);

enum Failure {
    Usage(String),
    Data(IoError),
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        Self::Data(e)
    }
}

impl From<scidyn_core::Error> for Failure {
    fn from(e: scidyn_core::Error) -> Self {
        match e {
            scidyn_core::Error::InvalidConfig(msg) => Self::Usage(msg),
            e => Self::Data(e.into()),
        }
    }
}

impl From<Usage> for Failure {
    fn from(u: Usage) -> Self {
        Self::Usage(u.0)
    }
}

type Outcome<T> = Result<T, Failure>;

/// Runs the command line and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(stdout, "{text}");
                EXIT_OK
            };
        }
    };
    match dispatch(cli.command, stdout) {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(
                stderr,
                "error: {msg}\n\nUsage: scidyn <COMMAND> [OPTIONS]\nFor more information, try '--help'."
            );
            EXIT_USAGE
        }
        Err(Failure::Data(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_DATA
        }
    }
}

fn emit(output: &Output, text: &str, stdout: &mut dyn Write) -> Outcome<()> {
    match &output.out {
        Some(path) => fs::write(path, text).map_err(IoError::file(path))?,
        None => stdout.write_all(text.as_bytes()).map_err(IoError::file("<stdout>"))?,
    }
    Ok(())
}

fn read_graph(g: &GraphInput) -> Outcome<TimeSlicedGraph> {
    Ok(parse_timesliced_edges(&g.input, g.presence.as_deref())?)
}

fn dispatch(command: Command, stdout: &mut dyn Write) -> Outcome<()> {
    match command {
        Command::Entropy(a) => {
            let text = entropy_report(&parse_contingency_csv(&a.input)?)?;
            emit(&a.output, &text, stdout)
        }
        Command::Decompose(a) => {
            let dist = normalize(&parse_contingency_csv(&a.input)?)?;
            let grouping = parse_grouping(&a.grouping)?;
            let (dist, grouping) = grouped_axis(&dist, grouping, a.axis.as_deref())?;
            let report = if a.nested {
                nested_decompose(&dist, &grouping)?
            } else {
                theil_decompose(&dist, &grouping, a.level as usize)?
            };
            emit(&a.output, &to_json_string(&report)?, stdout)
        }
        Command::Kl(a) => {
            let q = normalize(&parse_contingency_csv(&a.input)?)?;
            let p = normalize(&parse_contingency_csv(&a.prior)?)?;
            let policy = a.smoothing.policy();
            let bits = kl_divergence_with(&q, &p, policy)?;
            let decomposition = match &a.grouping {
                Some(path) => {
                    let grouping = parse_grouping(path)?;
                    let (q, grouping) = grouped_axis(&q, grouping, a.axis.as_deref())?;
                    let (p, _) = grouped_axis(&p, grouping.clone(), Some(grouping.axis()))?;
                    Some(kl_decompose_with(&q, &p, &grouping, policy)?)
                }
                None => None,
            };
            #[derive(Serialize)]
            struct Report<T> {
                bits: f64,
                #[serde(skip_serializing_if = "Option::is_none")]
                decomposition: Option<T>,
            }
            emit(&a.output, &to_json_string(&Report { bits, decomposition })?, stdout)
        }
        Command::MutualInfo(a) => {
            let joint = kept_axes(&a)?;
            let bits = mutual_information2(&joint)?;
            emit(&a.output, &bits_report(bits, &joint)?, stdout)
        }
        Command::TripleHelix(a) => {
            let joint = kept_axes(&a)?;
            let bits = interaction_information3(&joint)?;
            emit(&a.output, &bits_report(bits, &joint)?, stdout)
        }
        Command::Transition(a) => {
            let tensor = parse_contingency_csv(&a.input)?;
            let series = split_series(&tensor, &a.time_axis)?;
            let grouping = a.grouping.as_deref().map(parse_grouping).transpose()?;
            let grouping = match grouping {
                Some(g) => Some(grouped_axis(&series[0].1, g, None)?.1),
                None => None,
            };
            let series = match &grouping {
                Some(g) => series
                    .into_iter()
                    .map(|(t, d)| Ok((t, grouped_axis(&d, g.clone(), Some(g.axis()))?.0)))
                    .collect::<Outcome<Vec<_>>>()?,
                None => series,
            };
            let steps = transition_information(&series, grouping.as_ref(), a.smoothing.policy())?;
            #[derive(Serialize)]
            struct Report<T> {
                time_axis: String,
                steps: T,
                total_bits: f64,
            }
            let total_bits = steps.iter().map(|s| s.bits).sum();
            emit(&a.output, &to_json_string(&Report { time_axis: a.time_axis, steps, total_bits })?, stdout)
        }
        Command::Layout(a) => {
            let graph = read_graph(&a.graph)?;
            let (track, _) = layout_graph(&graph, &a.solver.config())?;
            emit(&a.output, &track_to_json(&track)?, stdout)
        }
        Command::Animate(a) => animate(a, stdout),
        Command::Betweenness(a) => {
            let graph = read_graph(&a.graph)?;
            if !(a.threshold.is_finite() && a.threshold >= 0.0) {
                return Err(Usage(format!("--threshold must be a non-negative number, got {}", a.threshold)).into());
            }
            let metric = if a.weighted { PathMetric::Weighted(a.transform.into()) } else { PathMetric::Hops };
            let series = centrality_series(&graph, a.threshold, metric)?;
            let id = |n: usize| graph.nodes()[n].id.clone();
            let keyed = |m: &BTreeMap<usize, f64>| m.iter().map(|(&n, &v)| (id(n), v)).collect::<BTreeMap<_, _>>();
            #[derive(Serialize)]
            struct SliceOut {
                time: String,
                raw: BTreeMap<String, f64>,
                normalized: BTreeMap<String, f64>,
            }
            #[derive(Serialize)]
            struct FlagOut {
                node: String,
                time: String,
                from: f64,
                to: f64,
            }
            #[derive(Serialize)]
            struct Report {
                metric: String,
                threshold: f64,
                slices: Vec<SliceOut>,
                flags: Vec<FlagOut>,
            }
            let report = Report {
                metric: match metric {
                    PathMetric::Hops => "hops".into(),
                    PathMetric::Weighted(t) => format!("weighted:{}", t.name()),
                },
                threshold: series.threshold,
                slices: series
                    .slices
                    .iter()
                    .map(|s| SliceOut { time: s.time.clone(), raw: keyed(&s.raw), normalized: keyed(&s.normalized) })
                    .collect(),
                flags: series
                    .flags
                    .iter()
                    .map(|f| FlagOut {
                        node: id(f.node),
                        time: series.slices[f.slice].time.clone(),
                        from: f.from,
                        to: f.to,
                    })
                    .collect(),
            };
            emit(&a.output, &to_json_string(&report)?, stdout)
        }
    }
}

fn entropy_report(tensor: &ContingencyTensor) -> Outcome<String> {
    let dist = normalize(tensor)?;
    let bits = shannon_entropy(&dist);
    #[derive(Serialize)]
    struct Report {
        bits: f64,
        /// Gibbs entropy in J/K.
        thermodynamic: f64,
        axes: Vec<String>,
        cells: usize,
    }
    let report = Report {
        bits,
        thermodynamic: thermodynamic_entropy(bits)?,
        axes: dist.axes().iter().map(|a| a.name().to_string()).collect(),
        cells: dist.cell_count(),
    };
    Ok(to_json_string(&report)?)
}

fn bits_report(bits: f64, joint: &ProbabilityDistribution) -> Outcome<String> {
    #[derive(Serialize)]
    struct Report {
        bits: f64,
        axes: Vec<String>,
    }
    Ok(to_json_string(&Report { bits, axes: joint.axes().iter().map(|a| a.name().to_string()).collect() })?)
}

fn kept_axes(a: &AxesArgs) -> Outcome<ProbabilityDistribution> {
    let dist = normalize(&parse_contingency_csv(&a.input)?)?;
    if a.axes.is_empty() {
        return Ok(dist);
    }
    let keep: Vec<&str> = a.axes.iter().map(String::as_str).collect();
    Ok(marginalize(&dist, &keep)?)
}

/// Marginal over the grouped axis, with the grouping bound to that axis.
/// Without an explicit axis the only axis is used, or else the single axis
/// whose categories are exactly the grouping's.
fn grouped_axis(
    dist: &ProbabilityDistribution,
    grouping: GroupingTree,
    axis: Option<&str>,
) -> Outcome<(ProbabilityDistribution, GroupingTree)> {
    let name = match axis {
        Some(a) => a.to_string(),
        None if dist.axes().len() == 1 => dist.axes()[0].name().to_string(),
        None => {
            let cats: BTreeSet<&str> = grouping.categories().into_iter().collect();
            let matching: Vec<&Axis> = dist
                .axes()
                .iter()
                .filter(|a| a.labels().iter().map(String::as_str).collect::<BTreeSet<_>>() == cats)
                .collect();
            match matching.as_slice() {
                [one] => one.name().to_string(),
                [] => return Err(Usage("no axis matches the grouping's categories; pass --axis".into()).into()),
                _ => return Err(Usage("several axes match the grouping; pass --axis".into()).into()),
            }
        }
    };
    let marginal = marginalize(dist, &[name.as_str()])?;
    Ok((marginal, grouping.with_axis(name)))
}

/// One distribution over the remaining axes per category of `time_axis`,
/// ordered numerically when all labels are numeric.
fn split_series(tensor: &ContingencyTensor, time_axis: &str) -> Outcome<Vec<(String, ProbabilityDistribution)>> {
    let axes = tensor.axes();
    let Some(t) = axes.iter().position(|a| a.name() == time_axis) else {
        return Err(scidyn_core::Error::UnknownAxis(time_axis.to_string()).into());
    };
    if axes.len() < 2 {
        return Err(Usage("the time axis must not be the only axis".into()).into());
    }
    let rest: Vec<Axis> = axes.iter().enumerate().filter(|&(k, _)| k != t).map(|(_, a)| a.clone()).collect();
    let labels = axes[t].labels();
    let mut builders: Vec<TensorBuilder> =
        labels.iter().map(|_| TensorBuilder::new(rest.clone())).collect::<Result<_, _>>()?;
    for (index, count) in tensor.nonzero() {
        let sub: Vec<usize> = index.iter().enumerate().filter(|&(k, _)| k != t).map(|(_, &i)| i).collect();
        builders[index[t]].add(&sub, count)?;
    }
    let mut order = labels.to_vec();
    sort_labels(&mut order);
    let mut by_label: BTreeMap<String, TensorBuilder> = labels.iter().cloned().zip(builders).collect();
    order
        .into_iter()
        .map(|label| {
            let b = by_label.remove(&label).expect("label from axis");
            let dist = normalize(&b.build())
                .map_err(|e| scidyn_core::Error::InSlice { label: label.clone(), source: Box::new(e) })?;
            Ok((label, dist))
        })
        .collect()
}

fn parse_rgb(s: &str) -> Option<Rgb> {
    let hex = s.strip_prefix('#')?;
    if hex.len() != 6 {
        return None;
    }
    let byte = |i: usize| u8::from_str_radix(&hex[i..i + 2], 16).ok();
    Some([byte(0)?, byte(2)?, byte(4)?])
}

fn render_spec(a: &AnimateArgs) -> Result<RenderSpec, Usage> {
    let radius = match a.radius.as_str() {
        "degree" => RadiusRule::SqrtAttribute { attribute: NodeAttribute::Degree, base: 3.0, scale: 2.0 },
        "strength" => RadiusRule::SqrtAttribute { attribute: NodeAttribute::Strength, base: 3.0, scale: 2.0 },
        "betweenness" => RadiusRule::SqrtAttribute { attribute: NodeAttribute::Betweenness, base: 3.0, scale: 12.0 },
        other => match other.parse::<f64>() {
            Ok(r) if r > 0.0 && r.is_finite() => RadiusRule::Fixed(r),
            _ => return Err(Usage(format!("--radius: expected a positive number or an attribute, got `{other}`"))),
        },
    };
    let color = match a.color.as_str() {
        "betweenness" => ColorRule::BetweennessGradient { low: [70, 130, 180], high: [220, 50, 47] },
        other => ColorRule::Fixed(
            parse_rgb(other)
                .ok_or_else(|| Usage(format!("--color: expected #rrggbb or `betweenness`, got `{other}`")))?,
        ),
    };
    let labels = match a.labels.as_str() {
        "all" => LabelRule::All,
        "none" => LabelRule::Hidden,
        other => match other.parse::<f64>() {
            Ok(m) if m.is_finite() => LabelRule::MinBetweenness(m),
            _ => return Err(Usage(format!("--labels: expected `all`, `none` or a number, got `{other}`"))),
        },
    };
    Ok(RenderSpec {
        width: a.width,
        height: a.height,
        radius,
        color,
        interpolation_steps: a.interpolation_steps as usize,
        labels,
        ..RenderSpec::default()
    })
}

fn animate(a: AnimateArgs, stdout: &mut dyn Write) -> Outcome<()> {
    let spec = render_spec(&a)?;
    let graph = read_graph(&a.graph)?;
    let track = match &a.track {
        Some(path) => track_from_json(&fs::read_to_string(path).map_err(IoError::file(path))?)?,
        None => layout_graph(&graph, &a.solver.config())?.0,
    };
    let written = render_animation(&track, &graph, &spec, &a.out_dir)?;
    let name = |p: &Path| p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    #[derive(Serialize)]
    struct Report {
        frame_count: usize,
        frames: Vec<String>,
        animation: String,
        interpolation_steps: usize,
    }
    let report = Report {
        frame_count: written.frames.len(),
        frames: (0..written.frames.len()).map(frame_file_name).collect(),
        animation: name(&written.animation),
        interpolation_steps: spec.interpolation_steps,
    };
    emit(&a.output, &to_json_string(&report)?, stdout)
}
