//! Readers for the published raw files of the five benchmark datasets.
//!
//! | kind          | raw layout                                                          |
//! |---------------|---------------------------------------------------------------------|
//! | WikiMath      | `edges`, `weights`, `time_periods`, `"0": {"y": [..N]}`, `"1"`, ... |
//! | Chickenpox    | `edges`, `FX: [S][N]` (unit weights)                                |
//! | PedalMe       | `edges`, `weights`, `X: [S][N]`                                     |
//! | MontevideoBus | `nodes: [{bus_stop, X: {y: [..S]}}]`, `links: [{source, target, weight}]` |
//! | MetraLa       | pre-converted: `edges`, `weights`, `node_values: [S][N][F]`         |
//!
//! MetraLa ships as a zipped pair of numpy arrays; see the README for the
//! conversion recipe that produces the JSON read here.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use dgsp_core::TemporalGraphSignal;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::io;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DatasetKind {
    WikiMath,
    Chickenpox,
    PedalMe,
    MontevideoBus,
    MetraLa,
}

/// Published size of a dataset.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Counts {
    pub nodes: usize,
    pub edges: usize,
    pub snapshots: usize,
}

impl DatasetKind {
    pub const ALL: [DatasetKind; 5] = [
        DatasetKind::WikiMath,
        DatasetKind::Chickenpox,
        DatasetKind::PedalMe,
        DatasetKind::MontevideoBus,
        DatasetKind::MetraLa,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DatasetKind::WikiMath => "WikiMath",
            DatasetKind::Chickenpox => "Chickenpox",
            DatasetKind::PedalMe => "PedalMe",
            DatasetKind::MontevideoBus => "MontevideoBus",
            DatasetKind::MetraLa => "MetraLa",
        }
    }

    /// Case-insensitive; dashes and underscores are ignored.
    pub fn parse(s: &str) -> Option<Self> {
        let key: String = s.chars().filter(|c| *c != '-' && *c != '_').collect::<String>().to_lowercase();
        Self::ALL.into_iter().find(|k| k.name().to_lowercase() == key)
    }

    pub fn frequency(self) -> &'static str {
        match self {
            DatasetKind::WikiMath => "daily",
            DatasetKind::Chickenpox | DatasetKind::PedalMe => "weekly",
            DatasetKind::MontevideoBus => "hourly",
            DatasetKind::MetraLa => "5-minute",
        }
    }

    pub fn expected(self) -> Counts {
        let (nodes, edges, snapshots) = match self {
            DatasetKind::WikiMath => (1068, 27079, 731),
            DatasetKind::Chickenpox => (20, 102, 520),
            DatasetKind::PedalMe => (15, 225, 30),
            DatasetKind::MetraLa => (207, 1722, 3224),
            DatasetKind::MontevideoBus => (678, 690, 734),
        };
        Counts { nodes, edges, snapshots }
    }
}

impl fmt::Display for DatasetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Differences between a converted signal and the published counts.
pub fn count_mismatches(kind: DatasetKind, signal: &TemporalGraphSignal) -> Vec<String> {
    let want = kind.expected();
    let got = [
        ("nodes", want.nodes, signal.num_nodes()),
        ("edges", want.edges, signal.edges().len()),
        ("snapshots", want.snapshots, signal.num_snapshots()),
    ];
    got.iter()
        .filter(|(_, w, g)| w != g)
        .map(|(what, w, g)| format!("{kind}: {g} {what}, published dataset has {w}"))
        .collect()
}

pub fn adapt_file(path: &Path, kind: DatasetKind) -> Result<TemporalGraphSignal> {
    let text = io::read_text(path)?;
    if text.trim().is_empty() {
        return Err(Error::Adapter { path: path.into(), kind: kind.name().into(), found: Vec::new() });
    }
    let doc = io::parse_json(path, &text)?;
    adapt(path, &doc, kind)
}

/// Converts a parsed raw document. `path` only labels errors.
pub fn adapt(path: &Path, doc: &Value, kind: DatasetKind) -> Result<TemporalGraphSignal> {
    let unrecognized = || Error::Adapter {
        path: path.into(),
        kind: kind.name().into(),
        found: match doc.as_object() {
            Some(o) => summarize_keys(o),
            None => vec![format!("<{}>", type_name(doc))],
        },
    };
    let obj = doc.as_object().ok_or_else(unrecognized)?;
    let need = |keys: &[&str]| keys.iter().all(|k| obj.contains_key(*k));
    let bad = |location: String, message: String| Error::Parse { path: path.into(), location, message };

    let (num_nodes, edges, weights, snapshots) = match kind {
        DatasetKind::Chickenpox => {
            if !need(&["edges", "FX"]) {
                return Err(unrecognized());
            }
            let snaps = matrix_snapshots(&obj["FX"], "FX").map_err(|(l, m)| bad(l, m))?;
            let edges = edge_pairs(&obj["edges"]).map_err(|(l, m)| bad(l, m))?;
            (width(&snaps), edges, None, snaps)
        }
        DatasetKind::PedalMe => {
            if !need(&["edges", "weights", "X"]) {
                return Err(unrecognized());
            }
            let snaps = matrix_snapshots(&obj["X"], "X").map_err(|(l, m)| bad(l, m))?;
            let edges = edge_pairs(&obj["edges"]).map_err(|(l, m)| bad(l, m))?;
            let weights = numbers(&obj["weights"], "weights").map_err(|(l, m)| bad(l, m))?;
            (width(&snaps), edges, Some(weights), snaps)
        }
        DatasetKind::WikiMath => {
            if !need(&["edges", "weights", "time_periods"]) {
                return Err(unrecognized());
            }
            let periods = obj["time_periods"]
                .as_u64()
                .ok_or_else(|| bad("time_periods".into(), "expected a nonnegative integer".into()))?;
            let mut snaps = Vec::with_capacity(periods as usize);
            for t in 0..periods {
                let key = t.to_string();
                let y = obj
                    .get(&key)
                    .and_then(|p| p.get("y"))
                    .ok_or_else(|| bad(key.clone(), "missing period object with a \"y\" array".into()))?;
                let row = numbers(y, &format!("{key}.y")).map_err(|(l, m)| bad(l, m))?;
                snaps.push(row.into_iter().map(|v| vec![v]).collect::<Vec<_>>());
            }
            let edges = edge_pairs(&obj["edges"]).map_err(|(l, m)| bad(l, m))?;
            let weights = numbers(&obj["weights"], "weights").map_err(|(l, m)| bad(l, m))?;
            (width(&snaps), edges, Some(weights), snaps)
        }
        DatasetKind::MontevideoBus => {
            if !need(&["nodes", "links"]) {
                return Err(unrecognized());
            }
            montevideo(obj).map_err(|(l, m)| bad(l, m))?
        }
        DatasetKind::MetraLa => {
            if !need(&["edges", "node_values"]) {
                return Err(unrecognized());
            }
            let snaps = tensor_snapshots(&obj["node_values"]).map_err(|(l, m)| bad(l, m))?;
            let edges = edge_pairs(&obj["edges"]).map_err(|(l, m)| bad(l, m))?;
            let weights = match obj.get("weights") {
                Some(w) => Some(numbers(w, "weights").map_err(|(l, m)| bad(l, m))?),
                None => None,
            };
            (width(&snaps), edges, weights, snaps)
        }
    };
    TemporalGraphSignal::new(kind.name(), num_nodes, edges, weights, kind.frequency(), &snapshots).map_err(|e| {
        Error::Parse { path: path.into(), location: kind.name().into(), message: e.to_string() }
    })
}

type Decoded<T> = std::result::Result<T, (String, String)>;
type Parts = (usize, Vec<(usize, usize)>, Option<Vec<f64>>, Vec<Vec<Vec<f64>>>);

fn width(snaps: &[Vec<Vec<f64>>]) -> usize {
    snaps.first().map_or(0, Vec::len)
}

fn montevideo(obj: &Map<String, Value>) -> Decoded<Parts> {
    let nodes = obj["nodes"].as_array().ok_or(("nodes".to_string(), "expected an array".to_string()))?;
    let mut ids: HashMap<String, usize> = HashMap::new();
    let mut series = Vec::with_capacity(nodes.len());
    for (i, node) in nodes.iter().enumerate() {
        let id = node.get("bus_stop").ok_or((format!("nodes[{i}]"), "missing bus_stop".to_string()))?;
        ids.insert(id.to_string(), i);
        let y = node
            .get("X")
            .and_then(|x| x.get("y"))
            .ok_or((format!("nodes[{i}]"), "missing X.y series".to_string()))?;
        series.push(numbers(y, &format!("nodes[{i}].X.y"))?);
    }
    let len = series.first().map_or(0, Vec::len);
    if let Some(i) = series.iter().position(|s| s.len() != len) {
        return Err((format!("nodes[{i}].X.y"), format!("expected {len} values, found {}", series[i].len())));
    }
    let links = obj["links"].as_array().ok_or(("links".to_string(), "expected an array".to_string()))?;
    let mut edges = Vec::with_capacity(links.len());
    let mut weights = Vec::with_capacity(links.len());
    for (i, link) in links.iter().enumerate() {
        let end = |field: &str| {
            link.get(field)
                .and_then(|v| ids.get(&v.to_string()).copied())
                .ok_or((format!("links[{i}].{field}"), "unknown bus stop".to_string()))
        };
        edges.push((end("source")?, end("target")?));
        weights.push(
            link.get("weight").and_then(Value::as_f64).ok_or((format!("links[{i}].weight"), "expected a number".to_string()))?,
        );
    }
    let snapshots = (0..len).map(|t| series.iter().map(|s| vec![s[t]]).collect()).collect();
    Ok((nodes.len(), edges, Some(weights), snapshots))
}

fn edge_pairs(v: &Value) -> Decoded<Vec<(usize, usize)>> {
    let arr = v.as_array().ok_or(("edges".to_string(), "expected an array of pairs".to_string()))?;
    arr.iter()
        .enumerate()
        .map(|(i, e)| {
            let p = e.as_array().filter(|p| p.len() == 2);
            let at = |j: usize| p.and_then(|p| p[j].as_u64()).map(|x| x as usize);
            match (at(0), at(1)) {
                (Some(s), Some(d)) => Ok((s, d)),
                _ => Err((format!("edges[{i}]"), format!("expected [src, dst], found {e}"))),
            }
        })
        .collect()
}

fn numbers(v: &Value, location: &str) -> Decoded<Vec<f64>> {
    let arr = v.as_array().ok_or((location.to_string(), "expected an array of numbers".to_string()))?;
    arr.iter()
        .enumerate()
        .map(|(i, x)| x.as_f64().ok_or((format!("{location}[{i}]"), format!("expected a number, found {x}"))))
        .collect()
}

/// `[S][N]` single-channel rows.
fn matrix_snapshots(v: &Value, field: &str) -> Decoded<Vec<Vec<Vec<f64>>>> {
    let rows = v.as_array().ok_or((field.to_string(), "expected an array of rows".to_string()))?;
    rows.iter()
        .enumerate()
        .map(|(t, r)| Ok(numbers(r, &format!("{field}[{t}]"))?.into_iter().map(|x| vec![x]).collect()))
        .collect()
}

/// `[S][N][F]`.
fn tensor_snapshots(v: &Value) -> Decoded<Vec<Vec<Vec<f64>>>> {
    let snaps = v.as_array().ok_or(("node_values".to_string(), "expected an array".to_string()))?;
    snaps
        .iter()
        .enumerate()
        .map(|(t, s)| {
            let nodes = s.as_array().ok_or((format!("node_values[{t}]"), "expected an array".to_string()))?;
            nodes.iter().enumerate().map(|(n, row)| numbers(row, &format!("node_values[{t}][{n}]"))).collect()
        })
        .collect()
}

fn type_name(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "boolean",
        Value::Number(_) => "number",
        Value::String(_) => "string",
        Value::Array(_) => "array",
        Value::Object(_) => "object",
    }
}

/// Top-level keys, with runs of numeric keys collapsed.
fn summarize_keys(obj: &Map<String, Value>) -> Vec<String> {
    let numeric = obj.keys().filter(|k| k.parse::<u64>().is_ok()).count();
    let mut keys: Vec<String> = obj.keys().filter(|k| k.parse::<u64>().is_err()).cloned().collect();
    keys.sort();
    if numeric > 0 {
        keys.push(format!("<{numeric} numeric keys>"));
    }
    keys
}
