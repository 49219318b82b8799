//! Versioned JSON checkpoints.

use super::{PolicyParams, RunningNorm, TrainerState};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::fs;
use std::io;
use std::path::Path;
use thiserror::Error;

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{path}: malformed checkpoint: {source}")]
    Parse {
        path: String,
        source: serde_json::Error,
    },
    #[error("{path}: checkpoint version {found} is not supported (expected {CHECKPOINT_VERSION})")]
    Version { path: String, found: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "E: Serialize + DeserializeOwned")]
pub struct Checkpoint<E> {
    pub version: u32,
    /// Hash of the run configuration that produced this state.
    pub config_hash: String,
    pub config: serde_json::Value,
    pub state: TrainerState<E>,
}

/// The parts of a checkpoint needed to act: weights and the frozen
/// observation statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicySnapshot {
    pub params: PolicyParams,
    pub normalizer: RunningNorm,
}

impl PolicySnapshot {
    pub fn act(&self, obs: &[f64]) -> Vec<f64> {
        self.params
            .mean_action(&self.normalizer.normalize(obs))
            .into_iter()
            .map(|a| a.clamp(-1.0, 1.0))
            .collect()
    }

    pub fn load(path: &Path) -> Result<Self, CheckpointError> {
        Ok(PolicyCheckpoint::load(path)?.state)
    }
}

/// A checkpoint read without its environment states.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct PolicyCheckpoint {
    pub version: u32,
    pub config_hash: String,
    pub config: serde_json::Value,
    pub state: PolicySnapshot,
}

impl PolicyCheckpoint {
    pub fn load(path: &Path) -> Result<Self, CheckpointError> {
        let c: Self = read_json(path)?;
        check_version(path, c.version)?;
        Ok(c)
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CheckpointError> {
    let p = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|source| CheckpointError::Io {
        path: p.clone(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| CheckpointError::Parse { path: p, source })
}

fn check_version(path: &Path, found: u32) -> Result<(), CheckpointError> {
    if found != CHECKPOINT_VERSION {
        return Err(CheckpointError::Version {
            path: path.display().to_string(),
            found,
        });
    }
    Ok(())
}

impl<E: Serialize + DeserializeOwned> Checkpoint<E> {
    pub fn new(config_hash: String, config: serde_json::Value, state: TrainerState<E>) -> Self {
        Self {
            version: CHECKPOINT_VERSION,
            config_hash,
            config,
            state,
        }
    }

    /// Writes through a temporary file so a crash never leaves a torn checkpoint.
    pub fn save(&self, path: &Path) -> Result<(), CheckpointError> {
        let io_err = |source| CheckpointError::Io {
            path: path.display().to_string(),
            source,
        };
        let text = serde_json::to_string(self).map_err(|e| io_err(io::Error::other(e)))?;
        let tmp = path.with_extension("json.tmp");
        fs::write(&tmp, text).map_err(io_err)?;
        fs::rename(&tmp, path).map_err(io_err)
    }

    pub fn load(path: &Path) -> Result<Self, CheckpointError> {
        #[derive(Deserialize)]
        struct Version {
            version: u32,
        }
        let v: Version = read_json(path)?;
        check_version(path, v.version)?;
        read_json(path)
    }

    pub fn snapshot(&self) -> PolicySnapshot {
        PolicySnapshot {
            params: self.state.params.clone(),
            normalizer: self.state.normalizer.clone(),
        }
    }
}
