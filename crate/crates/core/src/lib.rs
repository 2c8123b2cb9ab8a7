//! Similarity prediction for static-topology temporal graph signals.
//!
//! Given a window of consecutive snapshots whose last element is a
//! candidate next state, the models in this crate estimate how similar the
//! candidate is to the true continuation of the history. Training data is
//! manufactured by corrupting candidate snapshots with in-range noise and
//! labelling each window with the fraction of untouched nodes.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, dataset adapters
//! and the command-line tool live in the `dgsp` crate.
//!
//! Module map:
//!
//! - [`diff`]: dense 2-D tensors and a tape-based reverse-mode differentiator.
//! - [`graph`]: temporal graph signals, normalized adjacency, min-max bounds.
//! - [`noise`]: windowing into buckets and noise injection with labels.
//! - [`model`]: GCN embedding, recurrent graph cells, temporal attention, head.
//! - [`optim`]: SGD and Adam.
//! - [`metrics`]: MSE / MAE / RMSE and fold reports.
//! - [`train`]: K-fold splitting, training loop and evaluation.
//! - [`baseline`]: random and per-node linear-regression baselines.
//! - [`anomaly`]: stream scoring and alarm policies.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod anomaly;
pub mod baseline;
pub mod diff;
mod error;
pub mod graph;
pub mod metrics;
pub mod model;
pub mod noise;
pub mod optim;
pub mod train;

pub use error::{Error, Result};

pub use diff::{grad_check, OpKind, Tape, Tensor, Var};
pub use graph::{NodeBounds, TemporalGraphSignal};
pub use model::{CellKind, Checkpoint, InputRange, ModelConfig, ModelParams, Predictor};
pub use noise::{Bucket, LabeledBucket, NoiseSpec, Window};
