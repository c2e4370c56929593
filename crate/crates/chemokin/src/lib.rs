//! Batch front-end for `chemokin-core`: run configuration, figure presets,
//! sweeps, CSV output and run manifests.
//!
//! Only `CHEMOKIN_THREADS` is read from the environment; everything else
//! comes from config files so that manifests describe runs completely.

pub mod config;
pub mod csv;
pub mod error;
pub mod manifest;
pub mod parallel;
pub mod preset;
pub mod run;
pub mod sweep;

pub use chemokin_core as core;
pub use config::{parse_config, EngineKind, Job, RunConfig, Scale};
pub use error::{Error, Result};
pub use manifest::{RunManifest, RunRecord};
pub use run::{execute, Executed};
