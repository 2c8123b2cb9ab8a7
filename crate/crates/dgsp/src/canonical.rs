//! The canonical dataset file: one JSON object holding a static topology and
//! its `S x N x F` feature history.
//!
//! ```json
//! {"name": "toy", "num_nodes": 2, "edges": [[0, 1]], "weights": [1.0],
//!  "frequency": "daily", "features": [[[1.0], [2.0]], [[3.0], [4.0]]]}
//! ```

use std::path::Path;

use dgsp_core::TemporalGraphSignal;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::io;

const FIELDS: [&str; 6] = ["name", "num_nodes", "edges", "weights", "frequency", "features"];

/// How to treat fields outside the canonical set.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Strictness {
    /// Unknown fields are an error.
    Strict,
    /// Unknown fields are reported as warnings and ignored.
    #[default]
    Lenient,
}

#[derive(Clone, Debug)]
pub struct Loaded {
    pub signal: TemporalGraphSignal,
    pub warnings: Vec<String>,
}

pub fn load_canonical(path: &Path, strictness: Strictness) -> Result<Loaded> {
    let text = io::read_text(path)?;
    parse_canonical(path, &text, strictness)
}

/// Parses and validates a canonical document. `path` is only used to label
/// errors.
pub fn parse_canonical(path: &Path, text: &str, strictness: Strictness) -> Result<Loaded> {
    let doc = io::parse_json(path, text)?;
    let bad = |location: &str, message: String| Error::Parse { path: path.into(), location: location.into(), message };
    let obj = doc.as_object().ok_or_else(|| bad("document", "expected a JSON object".into()))?;

    let mut warnings = Vec::new();
    for key in obj.keys().filter(|k| !FIELDS.contains(&k.as_str())) {
        match strictness {
            Strictness::Strict => return Err(bad(key, "unknown field".into())),
            Strictness::Lenient => warnings.push(format!("{}: ignoring unknown field {key:?}", path.display())),
        }
    }

    let name = required(obj, "name", path)?.as_str().ok_or_else(|| bad("name", "expected a string".into()))?;
    let num_nodes = required(obj, "num_nodes", path)?
        .as_u64()
        .ok_or_else(|| bad("num_nodes", "expected a nonnegative integer".into()))? as usize;
    let frequency =
        required(obj, "frequency", path)?.as_str().ok_or_else(|| bad("frequency", "expected a string".into()))?;

    let edges = decode_edges(required(obj, "edges", path)?).map_err(|(loc, msg)| bad(&loc, msg))?;
    let weights = match obj.get("weights") {
        None | Some(Value::Null) => None,
        Some(w) => Some(decode_numbers(w, "weights").map_err(|(loc, msg)| bad(&loc, msg))?),
    };

    let features = required(obj, "features", path)?
        .as_array()
        .ok_or_else(|| bad("features", "expected an array of snapshots".into()))?;
    let mut snapshots = Vec::with_capacity(features.len());
    for (t, snap) in features.iter().enumerate() {
        let rows = snap.as_array().ok_or_else(|| bad(&format!("features[{t}]"), "expected an array of nodes".into()))?;
        let mut decoded = Vec::with_capacity(rows.len());
        for (n, row) in rows.iter().enumerate() {
            decoded.push(decode_numbers(row, &format!("features[{t}][{n}]")).map_err(|(loc, msg)| bad(&loc, msg))?);
        }
        snapshots.push(decoded);
    }

    let signal = TemporalGraphSignal::new(name, num_nodes, edges, weights, frequency, &snapshots)
        .map_err(|e| core_parse_error(path, e))?;
    Ok(Loaded { signal, warnings })
}

fn required<'a>(obj: &'a Map<String, Value>, key: &str, path: &Path) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| Error::Parse {
        path: path.into(),
        location: key.into(),
        message: "missing required field".into(),
    })
}

fn decode_edges(v: &Value) -> std::result::Result<Vec<(usize, usize)>, (String, String)> {
    let arr = v.as_array().ok_or_else(|| ("edges".to_string(), "expected an array of [src, dst] pairs".to_string()))?;
    arr.iter()
        .enumerate()
        .map(|(i, e)| {
            let pair = e.as_array().filter(|p| p.len() == 2);
            let idx = |j: usize| pair.and_then(|p| p[j].as_u64()).map(|x| x as usize);
            match (idx(0), idx(1)) {
                (Some(s), Some(d)) => Ok((s, d)),
                _ => Err((format!("edges[{i}]"), format!("expected [src, dst] nonnegative integers, found {e}"))),
            }
        })
        .collect()
}

fn decode_numbers(v: &Value, location: &str) -> std::result::Result<Vec<f64>, (String, String)> {
    let arr = v.as_array().ok_or_else(|| (location.to_string(), "expected an array of numbers".to_string()))?;
    arr.iter()
        .enumerate()
        .map(|(i, x)| x.as_f64().ok_or_else(|| (format!("{location}[{i}]"), format!("expected a number, found {x}"))))
        .collect()
}

/// Core validation messages start with their location (`edges[3] = ...: `).
fn core_parse_error(path: &Path, e: dgsp_core::Error) -> Error {
    let msg = match &e {
        dgsp_core::Error::Signal(m) => m.clone(),
        other => other.to_string(),
    };
    let (location, message) = match msg.split_once(": ") {
        Some((loc, rest)) if !loc.contains(' ') || loc.contains('[') => (loc.to_string(), rest.to_string()),
        _ => ("document".to_string(), msg),
    };
    Error::Parse { path: path.into(), location, message }
}

#[derive(Serialize)]
struct Document<'a> {
    name: &'a str,
    num_nodes: usize,
    edges: Vec<[usize; 2]>,
    weights: &'a [f64],
    frequency: &'a str,
    features: Vec<Vec<&'a [f64]>>,
}

/// Compact canonical JSON. Floats are written in shortest round-trip form,
/// so reading the text back reproduces the signal bit for bit.
pub fn to_canonical_json(signal: &TemporalGraphSignal) -> String {
    let f = signal.num_channels();
    let doc = Document {
        name: signal.name(),
        num_nodes: signal.num_nodes(),
        edges: signal.edges().iter().map(|&(s, d)| [s, d]).collect(),
        weights: signal.weights(),
        frequency: signal.frequency(),
        features: (0..signal.num_snapshots()).map(|t| signal.snapshot(t).chunks(f).collect()).collect(),
    };
    serde_json::to_string(&doc).expect("finite values serialize")
}

pub fn write_canonical(signal: &TemporalGraphSignal, path: &Path) -> Result<()> {
    let mut text = to_canonical_json(signal);
    text.push('\n');
    io::write_text(path, &text)
}
