//! Self-describing checkpoint documents.

use std::path::Path;

use dgsp_core::model::Provenance;
use dgsp_core::{Checkpoint, ModelConfig, ModelParams, NodeBounds, Tensor};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io;

pub const FORMAT: &str = "dgsp-checkpoint";

/// One parameter tensor, values row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedTensor {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckpointFile {
    pub format: String,
    pub toolkit_version: String,
    pub config: ModelConfig,
    pub params: Vec<NamedTensor>,
    /// Per node-channel scaling bounds taken from the training split.
    pub input_bounds: NodeBounds,
    pub provenance: Provenance,
}

impl CheckpointFile {
    pub fn from_checkpoint(ck: &Checkpoint) -> Self {
        CheckpointFile {
            format: FORMAT.into(),
            toolkit_version: crate::VERSION.into(),
            config: ck.config.clone(),
            params: ck
                .params
                .named(&ck.config)
                .map(|(name, t)| NamedTensor {
                    name: name.into(),
                    rows: t.rows(),
                    cols: t.cols(),
                    values: t.data().to_vec(),
                })
                .collect(),
            input_bounds: ck.input_bounds.clone(),
            provenance: ck.provenance.clone(),
        }
    }

    /// Rebuilds the checkpoint, validating every shape against the config.
    pub fn into_checkpoint(self) -> Result<Checkpoint> {
        if self.format != FORMAT {
            return Err(dgsp_core::Error::Signal(format!("format is {:?}, expected {FORMAT:?}", self.format)).into());
        }
        let named = self
            .params
            .into_iter()
            .map(|p| {
                let t = Tensor::new(p.rows, p.cols, p.values).map_err(|e| {
                    dgsp_core::Error::Signal(format!("params.{}: {e}", p.name))
                })?;
                Ok((p.name, t))
            })
            .collect::<Result<Vec<_>>>()?;
        let params = ModelParams::from_named(&self.config, named).map_err(as_data)?;
        let ck = Checkpoint { config: self.config, params, input_bounds: self.input_bounds, provenance: self.provenance };
        ck.validate().map_err(as_data)?;
        Ok(ck)
    }
}

/// A malformed checkpoint is a data problem, not a usage one.
fn as_data(e: dgsp_core::Error) -> Error {
    Error::Data(e)
}

pub fn save_checkpoint(ck: &Checkpoint, path: &Path) -> Result<()> {
    io::write_json(path, &CheckpointFile::from_checkpoint(ck))
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    let file: CheckpointFile = io::read_typed(path)?;
    file.into_checkpoint().map_err(|e| match e {
        Error::Data(inner) => Error::Parse { path: path.into(), location: "checkpoint".into(), message: inner.to_string() },
        other => other,
    })
}
