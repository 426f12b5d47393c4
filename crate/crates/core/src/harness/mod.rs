//! Active-learning replay loops and supporting data plumbing.
//!
//! Parser training stays outside: each round emits the training manifest
//! and consumes externally produced score, embedding and prediction files.
//! Every run directory starts with a `header.json` recording the seed, the
//! configuration hash and the tool version; all files are written
//! atomically.

mod acquire;
mod config;
mod paraphrase;
mod priors;
mod run;
mod tuning;

use std::path::Path;

use serde::{Deserialize, Serialize};

pub use acquire::{acquire, SelectionContext, TargetRow};
pub use config::{
    AcquisitionConfig, AlConfig, Budget, BudgetPreset, DataPaths, Mode, HAT_SCHEDULE, MSP_SCHEDULE,
};
pub use paraphrase::{paraphrase_filter, retention_table, FilterOutcome, MatchMode, ParaphraseRow, RetentionRow};
pub use priors::{alignment_priors, char_sim, AlignmentPriors};
pub use run::{
    al_msp_run, hat_run, persist, read_translations, simulate, ManifestRow, Origin, RoundArtifact, RunInputs,
};
pub use tuning::{tuning_grid, write_grid, GridCell, ALPHA_GRID, BETA_GRID};

use crate::acquisition::AcquisitionError;
use crate::dataset::{write_atomic, DatasetError};
use crate::features::FeatureError;
use crate::metrics::MetricsError;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("no human translation for selected id {0:?}")]
    MissingTranslation(String),
    #[error("no machine translation for pool id {0:?}")]
    MissingMachineTranslation(String),
    #[error("no prediction for paraphrase {0:?}")]
    MissingPrediction(String),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Acquisition(#[from] AcquisitionError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

impl HarnessError {
    /// True for errors caused by how the tool was invoked rather than by
    /// the data it was given.
    pub fn is_usage(&self) -> bool {
        matches!(self, HarnessError::Config(_))
    }
}

/// Reproducibility record written at the top of every output directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunHeader {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    pub config_hash: String,
}

impl RunHeader {
    pub fn new(command: &str, seed: u64, config_hash: &str) -> Self {
        RunHeader {
            tool: "semkit".to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            seed,
            config_hash: config_hash.to_string(),
        }
    }
}

/// SHA-256 hex digest of a canonical configuration string.
pub fn config_hash(canonical: &str) -> String {
    use sha2::{Digest, Sha256};
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

/// Writes `header.json` into `dir`.
pub fn write_header(dir: &Path, header: &RunHeader) -> Result<(), HarnessError> {
    write_header_at(&dir.join("header.json"), header)
}

pub fn write_header_at(path: &Path, header: &RunHeader) -> Result<(), HarnessError> {
    let mut text = serde_json::to_string_pretty(header).expect("serializable header");
    text.push('\n');
    write_atomic(path, text.as_bytes())?;
    Ok(())
}
