//! Proximal policy optimisation from scratch: Gaussian MLP policy, value
//! network, GAE, clipped surrogate, Adam, and parallel rollout collection.

pub mod adam;
pub mod checkpoint;
pub mod gae;
pub mod loss;
pub mod network;
pub mod normalizer;
pub mod policy;
pub mod trainer;

pub use adam::Adam;
pub use checkpoint::{
    Checkpoint, CheckpointError, PolicyCheckpoint, PolicySnapshot, CHECKPOINT_VERSION,
};
pub use gae::{clipped_objective, compute_gae};
pub use loss::{loss_and_grad, LossCoefficients, LossReport, Minibatch};
pub use network::Mlp;
pub use normalizer::RunningNorm;
pub use policy::PolicyParams;
pub use trainer::{IterationMetrics, TrainError, Trainer, TrainerState};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("environment fault: {0}")]
pub struct EnvFault(pub String);

/// Outcome of one environment step.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub obs: Vec<f64>,
    pub reward: f64,
    /// Episode ended (any cause, including time limits).
    pub done: bool,
    pub cross_track_error: Option<f64>,
    pub collision: bool,
    pub success: bool,
}

/// What the trainer needs from an environment. The serde bounds let a run be
/// checkpointed and resumed mid-episode.
pub trait Environment: Send + Serialize + DeserializeOwned {
    fn obs_dim(&self) -> usize;
    fn action_dim(&self) -> usize;
    fn reset(&mut self) -> Result<Vec<f64>, EnvFault>;
    fn step(&mut self, action: &[f64]) -> Result<Transition, EnvFault>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PpoConfig {
    pub gamma: f64,
    /// Steps collected per actor per iteration (T).
    pub horizon: usize,
    pub n_actors: usize,
    /// Passes over each batch (N_E).
    pub epochs: usize,
    /// Training budget in environment steps summed over actors.
    pub total_timesteps: u64,
    pub learning_rate: f64,
    pub n_minibatches: usize,
    pub gae_lambda: f64,
    pub vf_coef: f64,
    pub ent_coef: f64,
    pub clip: f64,
    pub hidden: Vec<usize>,
    pub normalize_advantages: bool,
    pub normalize_observations: bool,
}

impl Default for PpoConfig {
    fn default() -> Self {
        Self {
            gamma: 0.999,
            horizon: 1024,
            n_actors: 8,
            epochs: 10,
            total_timesteps: 1_000_000,
            learning_rate: 2e-4,
            n_minibatches: 32,
            gae_lambda: 0.95,
            vf_coef: 0.5,
            ent_coef: 0.01,
            clip: 0.2,
            hidden: vec![64, 64],
            normalize_advantages: true,
            normalize_observations: true,
        }
    }
}

impl PpoConfig {
    pub fn validate(&self) -> Result<(), String> {
        let unit = |v: f64| v > 0.0 && v <= 1.0;
        if !unit(self.gamma) {
            return Err("ppo.gamma must lie in (0, 1]".into());
        }
        if !unit(self.gae_lambda) {
            return Err("ppo.gae_lambda must lie in (0, 1]".into());
        }
        if !(self.clip > 0.0 && self.clip < 1.0) {
            return Err("ppo.clip must lie in (0, 1)".into());
        }
        if self.horizon == 0 || self.n_actors == 0 || self.epochs == 0 {
            return Err("ppo.horizon, ppo.n_actors and ppo.epochs must be positive".into());
        }
        if self.n_minibatches == 0 || self.n_minibatches > self.horizon * self.n_actors {
            return Err("ppo.n_minibatches must lie in [1, horizon * n_actors]".into());
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err("ppo.learning_rate must be positive".into());
        }
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return Err("ppo.hidden needs at least one non-empty layer".into());
        }
        if !(self.vf_coef >= 0.0 && self.ent_coef >= 0.0) {
            return Err("ppo.vf_coef and ppo.ent_coef must be non-negative".into());
        }
        Ok(())
    }

    pub fn batch_size(&self) -> usize {
        self.horizon * self.n_actors
    }

    /// Whole iterations that fit in the step budget.
    pub fn iterations(&self) -> usize {
        (self.total_timesteps / self.batch_size() as u64) as usize
    }

    pub fn coefficients(&self) -> LossCoefficients {
        LossCoefficients {
            clip: self.clip,
            value: self.vf_coef,
            entropy: self.ent_coef,
        }
    }
}
