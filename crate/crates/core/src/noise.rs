//! Labeled training windows built by corrupting candidate snapshots.
//!
//! A signal is cut into buckets of `len` consecutive snapshots. The last
//! snapshot of a bucket is the candidate. With probability `p` a bucket is
//! corrupted: `k ~ U{1..N}` distinct nodes are picked and every channel of
//! each picked node in the candidate is redrawn uniformly from that
//! node-channel's `[min, max]`. The label is the fraction of untouched
//! nodes, `(N - k) / N`; clean buckets get 1.

use alloc::vec::Vec;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::graph::{NodeBounds, TemporalGraphSignal};
use crate::{Error, Result};

/// Snapshots `[start, start + len)` of a signal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bucket {
    pub start: usize,
    pub len: usize,
}

impl Bucket {
    pub fn candidate_index(&self) -> usize {
        self.start + self.len - 1
    }
}

/// A bucket with a materialized (possibly corrupted) candidate and its
/// similarity label.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledBucket {
    pub start: usize,
    pub len: usize,
    /// `num_nodes x num_channels` candidate features.
    pub candidate: Vec<f64>,
    pub label: f64,
    /// Sorted, distinct.
    pub perturbed_nodes: Vec<usize>,
}

impl LabeledBucket {
    /// The uncorrupted bucket with label 1.
    pub fn clean(signal: &TemporalGraphSignal, bucket: Bucket) -> Self {
        LabeledBucket {
            start: bucket.start,
            len: bucket.len,
            candidate: signal.snapshot(bucket.candidate_index()).to_vec(),
            label: 1.0,
            perturbed_nodes: Vec::new(),
        }
    }

    pub fn bucket(&self) -> Bucket {
        Bucket { start: self.start, len: self.len }
    }
}

/// A run of snapshots the model can read, history first, candidate last.
pub trait Window {
    fn start(&self) -> usize;
    fn len(&self) -> usize;
    fn snapshot<'a>(&'a self, signal: &'a TemporalGraphSignal, i: usize) -> &'a [f64];
}

impl Window for Bucket {
    fn start(&self) -> usize {
        self.start
    }

    fn len(&self) -> usize {
        self.len
    }

    fn snapshot<'a>(&'a self, signal: &'a TemporalGraphSignal, i: usize) -> &'a [f64] {
        signal.snapshot(self.start + i)
    }
}

impl Window for LabeledBucket {
    fn start(&self) -> usize {
        self.start
    }

    fn len(&self) -> usize {
        self.len
    }

    fn snapshot<'a>(&'a self, signal: &'a TemporalGraphSignal, i: usize) -> &'a [f64] {
        if i + 1 == self.len {
            &self.candidate
        } else {
            signal.snapshot(self.start + i)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// Probability that a bucket is corrupted.
    pub corrupt_probability: f64,
    pub seed: u64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        NoiseSpec { corrupt_probability: 0.5, seed: 0 }
    }
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.corrupt_probability) {
            return Err(Error::config(alloc::format!(
                "corrupt probability must lie in [0, 1], got {}",
                self.corrupt_probability
            )));
        }
        Ok(())
    }

    /// Spec for a fresh draw in training epoch `epoch`.
    pub fn for_epoch(&self, epoch: usize) -> NoiseSpec {
        NoiseSpec {
            corrupt_probability: self.corrupt_probability,
            seed: self.seed ^ (epoch as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15),
        }
    }
}

/// Random stream for bucket `index`; independent of how many other buckets
/// were generated before it.
pub fn bucket_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Windows of `len` snapshots starting at `0, stride, 2*stride, ...`.
pub fn bucketize(signal: &TemporalGraphSignal, len: usize, stride: usize) -> Result<Vec<Bucket>> {
    let s = signal.num_snapshots();
    if len < 2 {
        return Err(Error::contract(alloc::format!("bucket length must be at least 2, got {len}")));
    }
    if len > s {
        return Err(Error::contract(alloc::format!(
            "bucket length {len} exceeds the {s} snapshots of {}",
            signal.name()
        )));
    }
    if stride == 0 {
        return Err(Error::contract("stride must be at least 1"));
    }
    Ok((0..=s - len).step_by(stride).map(|start| Bucket { start, len }).collect())
}

/// Replaces every channel of `nodes` in the candidate with uniform draws
/// from `bounds`. `nodes` must be distinct.
pub fn corrupt_nodes<R: Rng>(
    signal: &TemporalGraphSignal,
    bucket: Bucket,
    bounds: &NodeBounds,
    nodes: &[usize],
    rng: &mut R,
) -> LabeledBucket {
    let n = signal.num_nodes();
    let f = signal.num_channels();
    let mut out = LabeledBucket::clean(signal, bucket);
    let mut sorted = nodes.to_vec();
    sorted.sort_unstable();
    for &node in &sorted {
        for c in 0..f {
            let (lo, hi) = bounds.get(node, c);
            let u: f64 = rng.gen();
            out.candidate[node * f + c] = (lo + (hi - lo) * u).min(hi);
        }
    }
    out.label = (n - sorted.len()) as f64 / n as f64;
    out.perturbed_nodes = sorted;
    out
}

/// Corrupts `k` nodes chosen uniformly without replacement.
pub fn corrupt_k<R: Rng>(
    signal: &TemporalGraphSignal,
    bucket: Bucket,
    bounds: &NodeBounds,
    k: usize,
    rng: &mut R,
) -> LabeledBucket {
    let nodes = index::sample(rng, signal.num_nodes(), k).into_vec();
    corrupt_nodes(signal, bucket, bounds, &nodes, rng)
}

/// Labels every bucket, corrupting each independently with
/// `spec.corrupt_probability`. `bounds` should span the whole signal.
pub fn inject_noise(
    signal: &TemporalGraphSignal,
    buckets: &[Bucket],
    bounds: &NodeBounds,
    spec: &NoiseSpec,
) -> Result<Vec<LabeledBucket>> {
    spec.validate()?;
    bounds.validate_for(signal.num_nodes(), signal.num_channels())?;
    let n = signal.num_nodes();
    buckets
        .iter()
        .enumerate()
        .map(|(i, &b)| {
            if b.len < 2 || b.start + b.len > signal.num_snapshots() {
                return Err(Error::contract(alloc::format!(
                    "bucket {i} ({}..{}) does not fit in {} snapshots",
                    b.start,
                    b.start + b.len,
                    signal.num_snapshots()
                )));
            }
            let mut rng = bucket_rng(spec.seed, i);
            let u: f64 = rng.gen();
            if u < spec.corrupt_probability {
                let k = rng.gen_range(1..=n);
                Ok(corrupt_k(signal, b, bounds, k, &mut rng))
            } else {
                Ok(LabeledBucket::clean(signal, b))
            }
        })
        .collect()
}
