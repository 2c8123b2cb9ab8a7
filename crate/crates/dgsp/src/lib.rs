//! Dataset formats, adapters, surrogate data and the `dgsp` command line
//! built on [`dgsp_core`].

pub mod adapters;
pub mod bucketset;
pub mod canonical;
pub mod checkpoint;
pub mod cli;
pub mod error;
pub mod io;
pub mod report;
pub mod synth;

pub use error::{Error, Result};

/// Toolkit version recorded in every artifact.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
