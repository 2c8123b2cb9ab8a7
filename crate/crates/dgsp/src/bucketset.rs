//! Labeled bucket sets as written by `prepare`.

use std::path::Path;

use dgsp_core::graph::node_bounds;
use dgsp_core::noise::{bucketize, inject_noise};
use dgsp_core::{LabeledBucket, NoiseSpec, TemporalGraphSignal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io;

pub const FORMAT: &str = "dgsp-buckets";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BucketRecord {
    pub dataset: String,
    pub start: usize,
    pub label: f64,
    pub perturbed_nodes: Vec<usize>,
    /// `N` rows of `F` candidate values.
    pub candidate: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BucketSet {
    pub format: String,
    pub dataset: String,
    pub num_nodes: usize,
    pub num_channels: usize,
    pub bucket_len: usize,
    pub stride: usize,
    pub noise: NoiseSpec,
    pub buckets: Vec<BucketRecord>,
}

impl BucketSet {
    /// Buckets every window of `signal` and labels them with whole-signal
    /// noise bounds.
    pub fn generate(signal: &TemporalGraphSignal, bucket_len: usize, stride: usize, noise: NoiseSpec) -> Result<Self> {
        let plain = bucketize(signal, bucket_len, stride)?;
        let bounds = node_bounds(signal, 0..signal.num_snapshots())?;
        let labeled = inject_noise(signal, &plain, &bounds, &noise)?;
        Ok(Self::from_labeled(signal, stride, noise, &labeled))
    }

    pub fn from_labeled(signal: &TemporalGraphSignal, stride: usize, noise: NoiseSpec, labeled: &[LabeledBucket]) -> Self {
        let f = signal.num_channels();
        BucketSet {
            format: FORMAT.into(),
            dataset: signal.name().into(),
            num_nodes: signal.num_nodes(),
            num_channels: f,
            bucket_len: labeled.first().map_or(0, |b| b.len),
            stride,
            noise,
            buckets: labeled
                .iter()
                .map(|b| BucketRecord {
                    dataset: signal.name().into(),
                    start: b.start,
                    label: b.label,
                    perturbed_nodes: b.perturbed_nodes.clone(),
                    candidate: b.candidate.chunks(f).map(<[f64]>::to_vec).collect(),
                })
                .collect(),
        }
    }

    /// Checks the set belongs to `signal` and rebuilds core buckets.
    pub fn labeled(&self, signal: &TemporalGraphSignal) -> Result<Vec<LabeledBucket>> {
        if self.format != FORMAT {
            return Err(Error::Mismatch(format!("bucket set format is {:?}, expected {FORMAT:?}", self.format)));
        }
        if self.dataset != signal.name() {
            return Err(Error::Mismatch(format!(
                "bucket set was prepared from {:?} but the dataset is {:?}",
                self.dataset,
                signal.name()
            )));
        }
        let (n, f) = (signal.num_nodes(), signal.num_channels());
        if (self.num_nodes, self.num_channels) != (n, f) {
            return Err(Error::Mismatch(format!(
                "bucket set is {}x{} per snapshot, dataset is {n}x{f}",
                self.num_nodes, self.num_channels
            )));
        }
        self.buckets
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let at = |msg: String| Error::Mismatch(format!("buckets[{i}]: {msg}"));
                if r.dataset != self.dataset {
                    return Err(at(format!("dataset {:?} differs from the set's {:?}", r.dataset, self.dataset)));
                }
                if r.start + self.bucket_len > signal.num_snapshots() {
                    return Err(at(format!("start {} runs past {} snapshots", r.start, signal.num_snapshots())));
                }
                if r.candidate.len() != n || r.candidate.iter().any(|row| row.len() != f) {
                    return Err(at(format!("candidate is not {n}x{f}")));
                }
                if r.perturbed_nodes.iter().any(|&v| v >= n) {
                    return Err(at("perturbed node out of range".into()));
                }
                Ok(LabeledBucket {
                    start: r.start,
                    len: self.bucket_len,
                    candidate: r.candidate.concat(),
                    label: r.label,
                    perturbed_nodes: r.perturbed_nodes.clone(),
                })
            })
            .collect()
    }

    pub fn load(path: &Path) -> Result<Self> {
        io::read_typed(path)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        io::write_json_compact(path, self)
    }
}
