//! Metric reports on disk and the merged comparison table.

use std::path::{Path, PathBuf};

use dgsp_core::metrics::MetricsReport;
use dgsp_core::model::ModelConfig;
use dgsp_core::train::TrainConfig;
use dgsp_core::{CellKind, NoiseSpec};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::adapters::DatasetKind;
use crate::error::{Error, Result};
use crate::io;

/// Everything needed to reproduce one command's outputs. Written as
/// `run_config.json` into every output directory.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub toolkit_version: String,
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dataset: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dataset_kind: Option<DatasetKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub buckets: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bucket_len: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stride: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub train: Option<TrainConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub output_dir: PathBuf,
    /// Command-specific settings.
    #[serde(default, skip_serializing_if = "Value::is_null")]
    pub extra: Value,
}

pub const RUN_CONFIG: &str = "run_config.json";

impl RunConfig {
    pub fn new(command: &str, output_dir: &Path) -> Self {
        RunConfig {
            toolkit_version: crate::VERSION.into(),
            command: command.into(),
            output_dir: output_dir.into(),
            ..Default::default()
        }
    }

    pub fn save(&self) -> Result<()> {
        io::write_json(&self.output_dir.join(RUN_CONFIG), self)
    }

    pub fn load(dir: &Path) -> Result<Self> {
        io::read_typed(&dir.join(RUN_CONFIG))
    }
}

/// Writes `<stem>.json` and `<stem>.csv`.
pub fn write_metrics(dir: &Path, stem: &str, report: &MetricsReport) -> Result<()> {
    io::write_json(&dir.join(format!("{stem}.json")), report)?;
    write_csv(&dir.join(format!("{stem}.csv")), &metrics_rows(report))
}

pub fn read_metrics(path: &Path) -> Result<MetricsReport> {
    io::read_typed(path)
}

const FOLD_HEADER: [&str; 6] = ["method", "fold", "samples", "mse", "mae", "rmse"];

/// One row per fold plus a `mean` row.
pub fn metrics_rows(report: &MetricsReport) -> Vec<Vec<String>> {
    let mut rows = vec![FOLD_HEADER.iter().map(|s| s.to_string()).collect()];
    for f in &report.folds {
        rows.push(vec![
            report.method.clone(),
            f.fold.to_string(),
            f.samples.to_string(),
            f.metrics.mse.to_string(),
            f.metrics.mae.to_string(),
            f.metrics.rmse.to_string(),
        ]);
    }
    rows.push(vec![
        report.method.clone(),
        "mean".into(),
        report.sample_count.to_string(),
        report.mean.mse.to_string(),
        report.mean.mae.to_string(),
        report.mean.rmse.to_string(),
    ]);
    rows
}

pub fn write_csv(path: &Path, rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    for row in rows {
        w.write_record(row).map_err(|e| Error::Csv { path: path.into(), source: e })?;
    }
    let bytes = w.into_inner().map_err(|e| Error::io(path, e.into_error()))?;
    io::write_text(path, &String::from_utf8(bytes).expect("csv of utf-8 fields"))
}

/// Method and recurrent-layer columns of the comparison table.
fn method_columns(method: &str) -> (String, String, usize) {
    match method {
        "random" => ("Random".into(), "-".into(), 10),
        "tsr" => ("Time series regression".into(), "-".into(), 11),
        other => match CellKind::parse(other) {
            Ok(cell) => {
                let rank = CellKind::ALL.len() - CellKind::ALL.iter().position(|c| *c == cell).unwrap_or(0);
                ("DGSP-GCN".into(), cell.name().into(), rank)
            }
            Err(_) => (other.into(), "-".into(), 12),
        },
    }
}

/// Merges reports into one table: a row per method with mean MSE, MAE and
/// RMSE, trained cells first, then the baselines. Reports built from
/// different labelled data are refused unless `allow_mixed` is set.
pub fn comparison_table(reports: &[MetricsReport], allow_mixed: bool) -> Result<Vec<Vec<String>>> {
    let Some(first) = reports.first() else {
        return Err(Error::Usage("report needs at least one metrics file".into()));
    };
    if !allow_mixed {
        for r in &reports[1..] {
            let (a, b) = (&first.context, &r.context);
            let mut diffs = Vec::new();
            if a.dataset != b.dataset {
                diffs.push(format!("dataset {:?} vs {:?}", a.dataset, b.dataset));
            }
            if a.bucket_len != b.bucket_len {
                diffs.push(format!("bucket length {} vs {}", a.bucket_len, b.bucket_len));
            }
            if a.noise != b.noise {
                diffs.push(format!(
                    "noise (p={}, seed={}) vs (p={}, seed={})",
                    a.noise.corrupt_probability, a.noise.seed, b.noise.corrupt_probability, b.noise.seed
                ));
            }
            if !a.same_data(b) && diffs.is_empty() {
                diffs.push("stride or fold split".into());
            }
            if !diffs.is_empty() {
                return Err(Error::Mismatch(format!(
                    "{} and {} were computed on different data ({}); pass --allow-mixed to merge anyway",
                    first.method,
                    r.method,
                    diffs.join(", ")
                )));
            }
        }
    }
    let mut keyed: Vec<(usize, usize, Vec<String>)> = reports
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let (method, layer, rank) = method_columns(&r.method);
            let row = vec![
                r.context.dataset.clone(),
                method,
                layer,
                r.mean.mse.to_string(),
                r.mean.mae.to_string(),
                r.mean.rmse.to_string(),
            ];
            (rank, i, row)
        })
        .collect();
    keyed.sort_by_key(|(rank, i, _)| (*rank, *i));
    let mut rows = vec![["dataset", "method", "recurrent_layer", "mse", "mae", "rmse"].map(String::from).to_vec()];
    rows.extend(keyed.into_iter().map(|(_, _, row)| row));
    Ok(rows)
}
