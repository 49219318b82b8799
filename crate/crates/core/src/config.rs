//! The run configuration file: every tunable in one TOML document.
//!
//! ```toml
//! seed = 7
//! out = "runs/demo"
//! checkpoint_every = 10
//!
//! [env]            # dt, lookahead, sensor, reward, ship, ...
//! [env.reward]
//! [ppo]            # gamma, horizon, n_actors, ...
//! [scenario]
//! type = "generated"          # or: type = "file", path = "scenario.json"
//! [scenario.generator]
//! ```

use crate::env::{
    EnvConfig, EnvContext, GeneratorConfig, Scenario, ScenarioSource, ValidationIssue,
};
use crate::ppo::PpoConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScenarioSpec {
    Generated {
        #[serde(default)]
        generator: GeneratorConfig,
    },
    /// A scenario file, relative to the working directory.
    File { path: PathBuf },
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        ScenarioSpec::Generated {
            generator: GeneratorConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub out: PathBuf,
    /// Iterations between checkpoints; 0 writes only the final one.
    pub checkpoint_every: usize,
    pub env: EnvConfig,
    pub ppo: PpoConfig,
    pub scenario: ScenarioSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            out: PathBuf::from("runs/default"),
            checkpoint_every: 10,
            env: EnvConfig::default(),
            ppo: PpoConfig::default(),
            scenario: ScenarioSpec::default(),
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("{0}")]
    Invalid(String),
    #[error("scenario: {}", format_issues(.0))]
    Scenario(Vec<ValidationIssue>),
}

fn format_issues(issues: &[ValidationIssue]) -> String {
    issues
        .iter()
        .map(|i| format!("{}: {}", i.field, i.message))
        .collect::<Vec<_>>()
        .join("; ")
}

/// Everything a run needs, checked as a whole.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub context: EnvContext,
    pub source: ScenarioSource,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text).map_err(|message| ConfigError::Parse {
            path: path.display().to_string(),
            message,
        })
    }

    pub fn from_toml(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Hash of the settings that shape learning: env, ppo and scenario.
    /// Seed and output locations are excluded so a checkpoint can be
    /// evaluated under another seed or moved.
    pub fn hash(&self) -> String {
        let value = serde_json::json!({
            "env": self.env,
            "ppo": self.ppo,
            "scenario": self.scenario,
        });
        hex::encode(Sha256::digest(value.to_string().as_bytes()))
    }

    /// Validates the whole configuration and resolves the scenario source.
    pub fn prepare(&self) -> Result<Prepared, ConfigError> {
        let context = self
            .env
            .build()
            .map_err(|e| ConfigError::Invalid(format!("env: {e}")))?;
        self.ppo.validate().map_err(ConfigError::Invalid)?;
        let hull = (context.model.length, context.model.width);
        let source = match &self.scenario {
            ScenarioSpec::Generated { generator } => {
                let issues = generator.validate();
                if !issues.is_empty() {
                    return Err(ConfigError::Scenario(issues));
                }
                ScenarioSource::Generated {
                    generator: generator.clone(),
                }
            }
            ScenarioSpec::File { path } => {
                let scenario = Scenario::load(path)
                    .map_err(|e| ConfigError::Invalid(format!("scenario: {e}")))?;
                let issues = scenario.validate(hull, self.env.fillet(), self.env.world_margin);
                if !issues.is_empty() {
                    return Err(ConfigError::Scenario(issues));
                }
                ScenarioSource::Fixed { scenario }
            }
        };
        Ok(Prepared { context, source })
    }
}
