//! Static-topology temporal graph signals and graph-matrix preprocessing.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use serde::{Deserialize, Serialize};

use crate::diff::Tensor;
use crate::{Error, Result};

/// A fixed graph whose node features change from snapshot to snapshot.
///
/// Features are stored snapshot-major: snapshot `t` is a contiguous
/// `num_nodes x num_channels` row-major block.
#[derive(Clone, Debug, PartialEq)]
pub struct TemporalGraphSignal {
    name: String,
    num_nodes: usize,
    num_channels: usize,
    num_snapshots: usize,
    edges: Vec<(usize, usize)>,
    weights: Vec<f64>,
    frequency: String,
    features: Vec<f64>,
}

impl TemporalGraphSignal {
    /// Validates and assembles a signal from nested per-snapshot, per-node
    /// feature rows. `weights` defaults to 1.0 per edge.
    pub fn new(
        name: impl Into<String>,
        num_nodes: usize,
        edges: Vec<(usize, usize)>,
        weights: Option<Vec<f64>>,
        frequency: impl Into<String>,
        snapshots: &[Vec<Vec<f64>>],
    ) -> Result<Self> {
        if snapshots.is_empty() {
            return Err(Error::signal("features: at least one snapshot is required"));
        }
        let num_channels = snapshots[0].first().map_or(0, Vec::len);
        let mut features = Vec::with_capacity(snapshots.len() * num_nodes * num_channels);
        for (t, snap) in snapshots.iter().enumerate() {
            if snap.len() != num_nodes {
                return Err(Error::signal(alloc::format!(
                    "features[{t}]: expected {num_nodes} node rows, found {}",
                    snap.len()
                )));
            }
            for (n, row) in snap.iter().enumerate() {
                if row.len() != num_channels {
                    return Err(Error::signal(alloc::format!(
                        "features[{t}][{n}]: expected {num_channels} channels, found {}",
                        row.len()
                    )));
                }
                features.extend_from_slice(row);
            }
        }
        Self::from_flat(name, num_nodes, num_channels, edges, weights, frequency, features)
    }

    /// Same as [`TemporalGraphSignal::new`] with features already flattened
    /// snapshot-major.
    pub fn from_flat(
        name: impl Into<String>,
        num_nodes: usize,
        num_channels: usize,
        edges: Vec<(usize, usize)>,
        weights: Option<Vec<f64>>,
        frequency: impl Into<String>,
        features: Vec<f64>,
    ) -> Result<Self> {
        if num_nodes == 0 {
            return Err(Error::signal("num_nodes must be at least 1"));
        }
        if num_channels == 0 {
            return Err(Error::signal("features: every node needs at least one channel"));
        }
        let per_snapshot = num_nodes * num_channels;
        if features.is_empty() || features.len() % per_snapshot != 0 {
            return Err(Error::signal(alloc::format!(
                "features: {} values is not a whole number of {num_nodes}x{num_channels} snapshots",
                features.len()
            )));
        }
        for (i, &(s, d)) in edges.iter().enumerate() {
            if s >= num_nodes || d >= num_nodes {
                return Err(Error::signal(alloc::format!(
                    "edges[{i}] = [{s}, {d}]: node index out of range for num_nodes = {num_nodes}"
                )));
            }
        }
        let weights = match weights {
            Some(w) => {
                if w.len() != edges.len() {
                    return Err(Error::signal(alloc::format!(
                        "weights: {} values for {} edges",
                        w.len(),
                        edges.len()
                    )));
                }
                if let Some(i) = w.iter().position(|x| !x.is_finite() || *x < 0.0) {
                    return Err(Error::signal(alloc::format!(
                        "weights[{i}] = {}: must be finite and nonnegative",
                        w[i]
                    )));
                }
                w
            }
            None => vec![1.0; edges.len()],
        };
        if let Some(i) = features.iter().position(|x| !x.is_finite()) {
            let t = i / per_snapshot;
            let n = (i % per_snapshot) / num_channels;
            let c = i % num_channels;
            return Err(Error::signal(alloc::format!("features[{t}][{n}][{c}] is not finite")));
        }
        Ok(TemporalGraphSignal {
            name: name.into(),
            num_nodes,
            num_channels,
            num_snapshots: features.len() / per_snapshot,
            edges,
            weights,
            frequency: frequency.into(),
            features,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_channels(&self) -> usize {
        self.num_channels
    }

    pub fn num_snapshots(&self) -> usize {
        self.num_snapshots
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn frequency(&self) -> &str {
        &self.frequency
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    /// `num_nodes x num_channels` block of snapshot `t`.
    pub fn snapshot(&self, t: usize) -> &[f64] {
        let len = self.num_nodes * self.num_channels;
        &self.features[t * len..(t + 1) * len]
    }

    pub fn value(&self, t: usize, node: usize, channel: usize) -> f64 {
        self.snapshot(t)[node * self.num_channels + channel]
    }

    /// Overwrites one snapshot's features.
    pub fn replace_snapshot(&mut self, t: usize, values: &[f64]) -> Result<()> {
        let len = self.num_nodes * self.num_channels;
        if t >= self.num_snapshots || values.len() != len {
            return Err(Error::contract(alloc::format!(
                "replace_snapshot({t}) needs t < {} and {len} values, got {}",
                self.num_snapshots,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::signal("replacement snapshot contains non-finite values"));
        }
        self.features[t * len..(t + 1) * len].copy_from_slice(values);
        Ok(())
    }

    /// Feature time series of one node-channel.
    pub fn series(&self, node: usize, channel: usize) -> impl Iterator<Item = f64> + '_ {
        (0..self.num_snapshots).map(move |t| self.value(t, node, channel))
    }
}

/// How edge direction is treated when building the adjacency matrix.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AdjacencyMode {
    /// `A[i][j] = A[j][i] = max` of the two directed weights.
    #[default]
    Symmetric,
    /// An edge `(src, dst)` lets `dst` aggregate from `src`.
    Directed,
}

/// Weighted adjacency without self-loops; `A[dst][src]` holds the weight of
/// edge `(src, dst)`, repeated edges add up.
pub fn adjacency(signal: &TemporalGraphSignal, mode: AdjacencyMode) -> Tensor {
    let n = signal.num_nodes();
    let mut a = Tensor::zeros(n, n);
    for (&(src, dst), &w) in signal.edges().iter().zip(signal.weights()) {
        if src != dst {
            let cur = a.get(dst, src);
            a.set(dst, src, cur + w);
        }
    }
    if mode == AdjacencyMode::Symmetric {
        for i in 0..n {
            for j in i + 1..n {
                let w = f64::max(a.get(i, j), a.get(j, i));
                a.set(i, j, w);
                a.set(j, i, w);
            }
        }
    }
    a
}

/// `D^-1/2 (A + I) D^-1/2` with `D` the row sums of `A + I`.
///
/// Input self-loops are dropped before the identity is added, so every node
/// ends up with exactly one unit self-loop and a degree of at least 1.
pub fn normalized_adjacency(signal: &TemporalGraphSignal, mode: AdjacencyMode) -> Tensor {
    let n = signal.num_nodes();
    let mut a = adjacency(signal, mode);
    for i in 0..n {
        a.set(i, i, 1.0);
    }
    let inv_sqrt: Vec<f64> = (0..n).map(|i| 1.0 / libm::sqrt(a.row(i).iter().sum::<f64>())).collect();
    for i in 0..n {
        for j in 0..n {
            let v = a.get(i, j);
            if v != 0.0 {
                a.set(i, j, inv_sqrt[i] * v * inv_sqrt[j]);
            }
        }
    }
    a
}

/// Per node-channel minimum and maximum of a feature range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeBounds {
    pub num_nodes: usize,
    pub num_channels: usize,
    /// Indexed `node * num_channels + channel`.
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl NodeBounds {
    pub fn get(&self, node: usize, channel: usize) -> (f64, f64) {
        let i = node * self.num_channels + channel;
        (self.min[i], self.max[i])
    }

    /// Min-max scales one `num_nodes x num_channels` block. A node-channel
    /// with `min == max` maps to 0.0.
    pub fn normalize_snapshot(&self, values: &[f64]) -> Vec<f64> {
        values
            .iter()
            .enumerate()
            .map(|(i, &x)| scale(x, self.min[i], self.max[i]))
            .collect()
    }

    pub fn validate_for(&self, num_nodes: usize, num_channels: usize) -> Result<()> {
        let len = num_nodes * num_channels;
        if self.num_nodes != num_nodes
            || self.num_channels != num_channels
            || self.min.len() != len
            || self.max.len() != len
        {
            return Err(Error::config(alloc::format!(
                "bounds cover {}x{} node-channels, signal has {num_nodes}x{num_channels}",
                self.num_nodes,
                self.num_channels
            )));
        }
        if self.min.iter().zip(&self.max).any(|(lo, hi)| !(lo.is_finite() && hi.is_finite() && lo <= hi)) {
            return Err(Error::config("bounds must be finite with min <= max"));
        }
        Ok(())
    }
}

fn scale(x: f64, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        (x - lo) / (hi - lo)
    } else {
        0.0
    }
}

/// Minimum and maximum of every node-channel over the snapshots in `range`.
pub fn node_bounds(signal: &TemporalGraphSignal, range: Range<usize>) -> Result<NodeBounds> {
    if range.is_empty() {
        return Err(Error::contract("node_bounds needs a non-empty snapshot range"));
    }
    if range.end > signal.num_snapshots() {
        return Err(Error::contract(alloc::format!(
            "snapshot range {}..{} exceeds {} snapshots",
            range.start,
            range.end,
            signal.num_snapshots()
        )));
    }
    let mut min = signal.snapshot(range.start).to_vec();
    let mut max = min.clone();
    for t in range.start + 1..range.end {
        for ((lo, hi), &x) in min.iter_mut().zip(max.iter_mut()).zip(signal.snapshot(t)) {
            *lo = lo.min(x);
            *hi = hi.max(x);
        }
    }
    Ok(NodeBounds { num_nodes: signal.num_nodes(), num_channels: signal.num_channels(), min, max })
}

/// Rescales every feature with `bounds`. Returns the rescaled signal and how
/// many values fell outside their `[min, max]` (those map outside `[0, 1]`).
pub fn min_max_normalize(signal: &TemporalGraphSignal, bounds: &NodeBounds) -> Result<(TemporalGraphSignal, usize)> {
    bounds.validate_for(signal.num_nodes(), signal.num_channels())?;
    let per = signal.num_nodes() * signal.num_channels();
    let mut out_of_range = 0;
    let features = signal
        .features()
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let (lo, hi) = (bounds.min[i % per], bounds.max[i % per]);
            if x < lo || x > hi {
                out_of_range += 1;
            }
            scale(x, lo, hi)
        })
        .collect();
    let mut normalized = signal.clone();
    normalized.features = features;
    Ok((normalized, out_of_range))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn series_signal(values: &[f64]) -> TemporalGraphSignal {
        let snaps: Vec<Vec<Vec<f64>>> = values.iter().map(|&v| vec![vec![v]]).collect();
        TemporalGraphSignal::new("s", 1, vec![], None, "weekly", &snaps).unwrap()
    }

    #[test]
    fn single_isolated_node_normalizes_to_one() {
        let s = series_signal(&[1.0]);
        assert_eq!(normalized_adjacency(&s, AdjacencyMode::Symmetric), Tensor::scalar(1.0));
    }

    #[test]
    fn two_nodes_one_edge() {
        let snaps = vec![vec![vec![0.0], vec![0.0]]];
        let s = TemporalGraphSignal::new("s", 2, vec![(0, 1)], None, "", &snaps).unwrap();
        let a = normalized_adjacency(&s, AdjacencyMode::Symmetric);
        for v in a.data() {
            assert!((v - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn directed_mode_keeps_direction() {
        let snaps = vec![vec![vec![0.0], vec![0.0]]];
        let s = TemporalGraphSignal::new("s", 2, vec![(0, 1)], None, "", &snaps).unwrap();
        let a = adjacency(&s, AdjacencyMode::Directed);
        assert_eq!(a.data(), &[0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn input_self_loops_do_not_double_the_identity() {
        let snaps = vec![vec![vec![0.0], vec![0.0]]];
        let with = TemporalGraphSignal::new("s", 2, vec![(0, 1), (0, 0), (1, 1)], None, "", &snaps).unwrap();
        let without = TemporalGraphSignal::new("s", 2, vec![(0, 1)], None, "", &snaps).unwrap();
        assert_eq!(
            normalized_adjacency(&with, AdjacencyMode::Symmetric),
            normalized_adjacency(&without, AdjacencyMode::Symmetric)
        );
    }

    #[test]
    fn path_graph_matches_explicit_product() {
        let snaps = vec![vec![vec![0.0]; 3]];
        let s = TemporalGraphSignal::new("p", 3, vec![(0, 1), (1, 2)], None, "", &snaps).unwrap();
        let got = normalized_adjacency(&s, AdjacencyMode::Symmetric);
        // A + I and D^-1/2 as dense matrices, multiplied out naively.
        let a_hat = [[1.0, 1.0, 0.0], [1.0, 1.0, 1.0], [0.0, 1.0, 1.0]];
        let d: [f64; 3] = [2.0, 3.0, 2.0];
        let mut dinv = [[0.0; 3]; 3];
        for i in 0..3 {
            dinv[i][i] = 1.0 / d[i].sqrt();
        }
        let mul = |x: &[[f64; 3]; 3], y: &[[f64; 3]; 3]| {
            let mut out = [[0.0; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    for k in 0..3 {
                        out[i][j] += x[i][k] * y[k][j];
                    }
                }
            }
            out
        };
        let want = mul(&mul(&dinv, &a_hat), &dinv);
        for i in 0..3 {
            for j in 0..3 {
                assert!((got.get(i, j) - want[i][j]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn bad_edge_index_rejected() {
        let snaps = vec![vec![vec![0.0], vec![0.0]]];
        let err = TemporalGraphSignal::new("s", 2, vec![(5, 0)], None, "", &snaps).unwrap_err();
        assert!(alloc::format!("{err}").contains("out of range"));
    }

    #[test]
    fn ragged_and_non_finite_features_rejected() {
        let ragged = vec![vec![vec![0.0], vec![0.0, 1.0]]];
        assert!(TemporalGraphSignal::new("s", 2, vec![], None, "", &ragged).is_err());
        let nan = vec![vec![vec![0.0], vec![f64::NAN]]];
        let err = TemporalGraphSignal::new("s", 2, vec![], None, "", &nan).unwrap_err();
        assert!(alloc::format!("{err}").contains("features[0][1][0]"));
    }

    #[test]
    fn bounds_of_constant_and_simple_series() {
        let c = series_signal(&[4.0, 4.0, 4.0]);
        let b = node_bounds(&c, 0..3).unwrap();
        assert_eq!(b.get(0, 0), (4.0, 4.0));
        let s = series_signal(&[1.0, 5.0, 3.0]);
        assert_eq!(node_bounds(&s, 0..3).unwrap().get(0, 0), (1.0, 5.0));
        assert!(node_bounds(&s, 1..1).is_err());
        assert!(node_bounds(&s, 0..4).is_err());
    }

    #[test]
    fn min_max_scaling() {
        let s = series_signal(&[2.0, 4.0, 6.0]);
        let b = node_bounds(&s, 0..3).unwrap();
        let (n, out) = min_max_normalize(&s, &b).unwrap();
        assert_eq!(n.features(), &[0.0, 0.5, 1.0]);
        assert_eq!(out, 0);

        let c = series_signal(&[7.0, 7.0, 7.0]);
        let b = node_bounds(&c, 0..3).unwrap();
        assert_eq!(min_max_normalize(&c, &b).unwrap().0.features(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn out_of_range_values_are_counted() {
        let s = series_signal(&[2.0, 4.0, 10.0]);
        let b = node_bounds(&s, 0..2).unwrap();
        let (n, out) = min_max_normalize(&s, &b).unwrap();
        assert_eq!(out, 1);
        assert_eq!(n.features()[2], 4.0);
    }
}
