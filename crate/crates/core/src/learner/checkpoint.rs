use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::autodiff::{ParamSet, RmsProp};
use crate::env::DifficultyTracker;
use crate::policy::Policy;

use super::LearnerConfig;

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum CheckpointError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: invalid checkpoint: {source}")]
    Format { path: String, source: serde_json::Error },
    #[error("{path}: unsupported checkpoint version {found} (expected {CHECKPOINT_VERSION})")]
    Version { path: String, found: u32 },
    #[error("{path}: parameters do not match the policy layout")]
    Shape { path: String },
}

/// Everything needed to resume training or run a trained policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    /// Layer layout, including the vocabulary.
    pub policy: Policy,
    pub params: ParamSet,
    pub optimizer: RmsProp,
    pub tracker: DifficultyTracker,
    /// Base seed; per-episode streams derive from it and the iteration.
    pub seed: u64,
    /// Next iteration to run.
    pub iteration: usize,
    pub config: LearnerConfig,
}

impl Checkpoint {
    pub fn save(&self, path: &Path) -> Result<(), CheckpointError> {
        let text = serde_json::to_string(self).expect("checkpoint serializes");
        fs::write(path, text).map_err(|source| CheckpointError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Checkpoint, CheckpointError> {
        let p = path.display().to_string();
        let text = fs::read_to_string(path).map_err(|source| CheckpointError::Io { path: p.clone(), source })?;
        let mut ck: Checkpoint = serde_json::from_str(&text).map_err(|source| CheckpointError::Format { path: p.clone(), source })?;
        if ck.version != CHECKPOINT_VERSION {
            return Err(CheckpointError::Version { path: p, found: ck.version });
        }
        ck.policy.encoder.vocab.reindex();
        if !ck.params.all_finite() || ck.optimizer.mean_square().len() != ck.params.len() {
            return Err(CheckpointError::Shape { path: p });
        }
        Ok(ck)
    }
}
