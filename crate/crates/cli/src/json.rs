//! Deterministic JSON: sorted keys, reals rounded to 12 significant digits,
//! non-finite reals as `null`, and a `scidyn_schema` version field.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use scidyn_core::data::{AnimationTrack, Frame, SolverMeta};
use serde::Serialize;
use serde_json::{Map, Number, Value};

use crate::error::{IoError, IoResult};

pub const SCHEMA_VERSION: u64 = 1;
pub const SIGNIFICANT_DIGITS: usize = 12;

/// `x` rounded to [`SIGNIFICANT_DIGITS`] significant digits.
pub fn round_significant(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().expect("formatted float parses")
}

fn tidy(value: Value) -> Value {
    match value {
        Value::Number(n) if n.is_f64() => {
            let x = round_significant(n.as_f64().expect("is_f64"));
            Number::from_f64(x).map_or(Value::Null, Value::Number)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(tidy).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, tidy(v))).collect()),
        other => other,
    }
}

/// Renders any serializable report. Objects gain the schema field; other
/// values are wrapped as `{"scidyn_schema": 1, "value": …}`.
pub fn to_json_string<T: Serialize + ?Sized>(report: &T) -> IoResult<String> {
    let mut map = match tidy(serde_json::to_value(report)?) {
        Value::Object(map) => map,
        other => {
            let mut map = Map::new();
            map.insert("value".into(), other);
            map
        }
    };
    map.insert("scidyn_schema".into(), Value::from(SCHEMA_VERSION));
    let mut text = serde_json::to_string_pretty(&Value::Object(map))?;
    text.push('\n');
    Ok(text)
}

pub fn export_json<T: Serialize + ?Sized>(report: &T, path: &Path) -> IoResult<()> {
    fs::write(path, to_json_string(report)?).map_err(IoError::file(path))
}

#[derive(Serialize)]
struct TrackSlice<'a> {
    time: &'a str,
    positions: BTreeMap<&'a str, &'a [f64]>,
    static_stress: f64,
    stress1: f64,
}

#[derive(Serialize)]
struct TrackDocument<'a> {
    nodes: &'a [String],
    slices: Vec<TrackSlice<'a>>,
    dynamic_stress: f64,
    meta: &'a SolverMeta,
}

/// JSON view of a layout: `slices[]` of `{time, positions: {id: [x, y]},
/// static_stress, stress1}` plus the dynamic stress and solver metadata.
pub fn track_to_json(track: &AnimationTrack) -> IoResult<String> {
    let slices = track
        .frames
        .iter()
        .map(|f| TrackSlice {
            time: &f.time,
            positions: f.positions.iter().map(|(&i, p)| (track.node_ids[i].as_str(), p.as_slice())).collect(),
            static_stress: f.static_stress,
            stress1: f.stress1,
        })
        .collect();
    to_json_string(&TrackDocument {
        nodes: &track.node_ids,
        slices,
        dynamic_stress: track.dynamic_stress,
        meta: &track.meta,
    })
}

fn field<'a>(v: &'a Value, key: &str) -> IoResult<&'a Value> {
    v.get(key).ok_or_else(|| IoError::parse(0, format!("missing field `{key}`")))
}

fn real(v: &Value, key: &str) -> IoResult<f64> {
    match field(v, key)? {
        Value::Null => Ok(f64::NAN),
        x => x.as_f64().ok_or_else(|| IoError::parse(0, format!("field `{key}` is not a number"))),
    }
}

/// Reads a layout written by [`track_to_json`].
pub fn track_from_json(text: &str) -> IoResult<AnimationTrack> {
    let doc: Value = serde_json::from_str(text)?;
    if field(&doc, "scidyn_schema")?.as_u64() != Some(SCHEMA_VERSION) {
        return Err(IoError::parse(0, "unsupported scidyn_schema"));
    }
    let node_ids: Vec<String> = serde_json::from_value(field(&doc, "nodes")?.clone())?;
    let index: BTreeMap<&str, usize> = node_ids.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
    let slices = field(&doc, "slices")?.as_array().ok_or_else(|| IoError::parse(0, "`slices` is not an array"))?;
    let frames = slices
        .iter()
        .map(|s| {
            let time = field(s, "time")?.as_str().ok_or_else(|| IoError::parse(0, "`time` is not a string"))?;
            let raw: BTreeMap<String, Vec<f64>> = serde_json::from_value(field(s, "positions")?.clone())?;
            let positions = raw
                .into_iter()
                .map(|(id, p)| {
                    let i = index.get(id.as_str()).ok_or_else(|| IoError::parse(0, format!("unknown node `{id}`")))?;
                    Ok((*i, p))
                })
                .collect::<IoResult<_>>()?;
            Ok(Frame {
                time: time.to_string(),
                positions,
                static_stress: real(s, "static_stress")?,
                stress1: real(s, "stress1")?,
            })
        })
        .collect::<IoResult<Vec<_>>>()?;
    let meta = field(&doc, "meta")?;
    let meta = SolverMeta {
        iterations: serde_json::from_value(field(meta, "iterations")?.clone())?,
        converged: serde_json::from_value(field(meta, "converged")?.clone())?,
        omega: real(meta, "omega")?,
        seed: serde_json::from_value(field(meta, "seed")?.clone())?,
        dims: serde_json::from_value(field(meta, "dims")?.clone())?,
    };
    Ok(AnimationTrack { node_ids, frames, dynamic_stress: real(&doc, "dynamic_stress")?, meta })
}
