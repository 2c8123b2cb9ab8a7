//! Regression error measures and fold-level reports.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::noise::NoiseSpec;
use crate::optim::OptimizerKind;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub mse: f64,
    pub mae: f64,
    pub rmse: f64,
}

/// Mean squared error, mean absolute error and their root.
pub fn compute_metrics(preds: &[f64], labels: &[f64]) -> Result<Metrics> {
    if preds.len() != labels.len() {
        return Err(Error::contract(alloc::format!(
            "{} predictions for {} labels",
            preds.len(),
            labels.len()
        )));
    }
    if preds.is_empty() {
        return Err(Error::contract("metrics need at least one prediction"));
    }
    let n = preds.len() as f64;
    let (mut se, mut ae) = (0.0, 0.0);
    for (p, y) in preds.iter().zip(labels) {
        let e = y - p;
        se += e * e;
        ae += libm::fabs(e);
    }
    let mse = se / n;
    Ok(Metrics { mse, mae: ae / n, rmse: libm::sqrt(mse) })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    /// First snapshot of the bucket.
    pub start: usize,
    pub label: f64,
    pub prediction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub fold: usize,
    pub metrics: Metrics,
    pub samples: usize,
    pub predictions: Vec<Prediction>,
}

impl FoldReport {
    pub fn from_predictions(fold: usize, predictions: Vec<Prediction>) -> Result<Self> {
        let preds: Vec<f64> = predictions.iter().map(|p| p.prediction).collect();
        let labels: Vec<f64> = predictions.iter().map(|p| p.label).collect();
        let metrics = compute_metrics(&preds, &labels)?;
        Ok(FoldReport { fold, metrics, samples: predictions.len(), predictions })
    }
}

/// Settings a report was produced under. Reports are only comparable when
/// the data-side fields agree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportContext {
    pub dataset: String,
    pub bucket_len: usize,
    pub stride: usize,
    pub noise: NoiseSpec,
    pub folds: usize,
    pub split_seed: u64,
    pub split_mode: crate::train::SplitMode,
    /// Training settings; absent for baselines.
    pub epochs: Option<usize>,
    pub learning_rate: Option<f64>,
    pub optimizer: Option<OptimizerKind>,
}

impl ReportContext {
    /// Whether two reports were computed on the same labelled data.
    pub fn same_data(&self, other: &ReportContext) -> bool {
        self.dataset == other.dataset
            && self.bucket_len == other.bucket_len
            && self.stride == other.stride
            && self.noise == other.noise
            && self.folds == other.folds
            && self.split_seed == other.split_seed
            && self.split_mode == other.split_mode
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    /// Cell name for trained models, `random` or `tsr` for baselines.
    pub method: String,
    pub context: ReportContext,
    pub folds: Vec<FoldReport>,
    /// Unweighted average of the per-fold metrics.
    pub mean: Metrics,
    pub sample_count: usize,
}

impl MetricsReport {
    pub fn new(method: impl Into<String>, context: ReportContext, folds: Vec<FoldReport>) -> Result<Self> {
        if folds.is_empty() {
            return Err(Error::contract("a report needs at least one fold"));
        }
        let k = folds.len() as f64;
        let sum = |f: fn(&Metrics) -> f64| folds.iter().map(|r| f(&r.metrics)).sum::<f64>() / k;
        let mean = Metrics { mse: sum(|m| m.mse), mae: sum(|m| m.mae), rmse: sum(|m| m.rmse) };
        let sample_count = folds.iter().map(|f| f.samples).sum();
        Ok(MetricsReport { method: method.into(), context, folds, mean, sample_count })
    }
}
