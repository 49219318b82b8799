//! Rollout collection and the PPO update loop.

use super::gae::{compute_gae, normalize};
use super::loss::{loss_and_grad, LossReport, Minibatch};
use super::{Adam, EnvFault, Environment, PolicyParams, PpoConfig, RunningNorm};
use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("actor {actor}: {fault}")]
    Env { actor: usize, fault: EnvFault },
    #[error("non-finite loss in epoch {epoch}, minibatch {batch}")]
    NonFinite { epoch: usize, batch: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "E: Serialize + DeserializeOwned")]
pub struct Actor<E> {
    pub env: E,
    pub rng: ChaCha8Rng,
    /// Raw (unnormalized) current observation.
    pub obs: Vec<f64>,
    pub episode_reward: f64,
    pub episode_steps: usize,
}

/// Everything needed to continue a run bit-for-bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "E: Serialize + DeserializeOwned")]
pub struct TrainerState<E> {
    pub config: PpoConfig,
    pub params: PolicyParams,
    pub adam: Adam,
    pub normalizer: RunningNorm,
    pub rng: ChaCha8Rng,
    pub actors: Vec<Actor<E>>,
    pub iteration: usize,
    pub env_steps: u64,
}

/// One line of the metrics log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationMetrics {
    pub iteration: usize,
    pub env_steps: u64,
    pub episodes: usize,
    pub mean_episode_reward: Option<f64>,
    pub mean_episode_length: Option<f64>,
    pub collision_rate: Option<f64>,
    pub success_rate: Option<f64>,
    pub mean_step_reward: f64,
    pub mean_abs_cross_track_error: Option<f64>,
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub approx_kl: f64,
    pub clip_fraction: f64,
}

struct EpisodeStat {
    reward: f64,
    length: usize,
    collision: bool,
    success: bool,
}

struct Rollout {
    obs: Vec<Vec<f64>>,
    raw_obs: Vec<Vec<f64>>,
    actions: Vec<Vec<f64>>,
    log_probs: Vec<f64>,
    rewards: Vec<f64>,
    values: Vec<f64>,
    dones: Vec<bool>,
    last_value: f64,
    episodes: Vec<EpisodeStat>,
    cte_sum: f64,
    cte_count: usize,
}

fn collect<E: Environment>(
    actor: &mut Actor<E>,
    params: &PolicyParams,
    norm: &RunningNorm,
    horizon: usize,
) -> Result<Rollout, EnvFault> {
    let mut r = Rollout {
        obs: Vec::with_capacity(horizon),
        raw_obs: Vec::with_capacity(horizon),
        actions: Vec::with_capacity(horizon),
        log_probs: Vec::with_capacity(horizon),
        rewards: Vec::with_capacity(horizon),
        values: Vec::with_capacity(horizon),
        dones: Vec::with_capacity(horizon),
        last_value: 0.0,
        episodes: Vec::new(),
        cte_sum: 0.0,
        cte_count: 0,
    };
    for _ in 0..horizon {
        let x = norm.normalize(&actor.obs);
        let (action, lp) = params.sample_action(&x, &mut actor.rng);
        let value = params.value_of(&x);
        let clamped: Vec<f64> = action.iter().map(|a| a.clamp(-1.0, 1.0)).collect();
        let tr = actor.env.step(&clamped)?;
        actor.episode_reward += tr.reward;
        actor.episode_steps += 1;
        if let Some(e) = tr.cross_track_error {
            r.cte_sum += e.abs();
            r.cte_count += 1;
        }
        r.raw_obs.push(std::mem::replace(&mut actor.obs, tr.obs));
        r.obs.push(x);
        r.actions.push(action);
        r.log_probs.push(lp);
        r.rewards.push(tr.reward);
        r.values.push(value);
        r.dones.push(tr.done);
        if tr.done {
            r.episodes.push(EpisodeStat {
                reward: actor.episode_reward,
                length: actor.episode_steps,
                collision: tr.collision,
                success: tr.success,
            });
            actor.episode_reward = 0.0;
            actor.episode_steps = 0;
            actor.obs = actor.env.reset()?;
        }
    }
    r.last_value = params.value_of(&norm.normalize(&actor.obs));
    Ok(r)
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| s / n as f64)
}

pub struct Trainer<E> {
    pub state: TrainerState<E>,
}

impl<E: Environment> Trainer<E> {
    /// Builds a fresh run. `factory(actor, seed)` creates actor environments.
    pub fn new(
        config: PpoConfig,
        factory: impl Fn(usize, u64) -> E,
        seed: u64,
    ) -> Result<Self, TrainError> {
        config.validate().map_err(TrainError::Config)?;
        let mut master = ChaCha8Rng::seed_from_u64(seed);
        let mut actors = Vec::with_capacity(config.n_actors);
        for k in 0..config.n_actors {
            let env_seed: u64 = master.random();
            let policy_seed: u64 = master.random();
            let mut env = factory(k, env_seed);
            let obs = env
                .reset()
                .map_err(|fault| TrainError::Env { actor: k, fault })?;
            actors.push(Actor {
                env,
                rng: ChaCha8Rng::seed_from_u64(policy_seed),
                obs,
                episode_reward: 0.0,
                episode_steps: 0,
            });
        }
        let obs_dim = actors[0].env.obs_dim();
        let action_dim = actors[0].env.action_dim();
        let mut init_rng = ChaCha8Rng::seed_from_u64(master.random());
        let params = PolicyParams::new(obs_dim, action_dim, &config.hidden, &mut init_rng);
        let adam = Adam::new(params.n_params(), config.learning_rate);
        let normalizer = RunningNorm::new(obs_dim, config.normalize_observations);
        let rng = ChaCha8Rng::seed_from_u64(master.random());
        Ok(Self {
            state: TrainerState {
                config,
                params,
                adam,
                normalizer,
                rng,
                actors,
                iteration: 0,
                env_steps: 0,
            },
        })
    }

    pub fn from_state(state: TrainerState<E>) -> Self {
        Self { state }
    }

    pub fn params(&self) -> &PolicyParams {
        &self.state.params
    }

    pub fn done(&self) -> bool {
        self.state.iteration >= self.state.config.iterations()
    }

    /// Runs iterations until the budget is spent, calling `on_iteration`
    /// after each one.
    pub fn train(
        &mut self,
        mut on_iteration: impl FnMut(&Self, &IterationMetrics),
    ) -> Result<Vec<IterationMetrics>, TrainError> {
        let mut out = Vec::new();
        while !self.done() {
            let m = self.iterate()?;
            on_iteration(self, &m);
            out.push(m);
        }
        Ok(out)
    }

    /// One collect-and-update cycle.
    pub fn iterate(&mut self) -> Result<IterationMetrics, TrainError> {
        let st = &mut self.state;
        let cfg = st.config.clone();
        let params = &st.params;
        let norm = st.normalizer.clone();
        let rollouts: Vec<Result<Rollout, EnvFault>> = st
            .actors
            .par_iter_mut()
            .map(|a| collect(a, params, &norm, cfg.horizon))
            .collect();
        let mut parts = Vec::with_capacity(rollouts.len());
        for (actor, r) in rollouts.into_iter().enumerate() {
            parts.push(r.map_err(|fault| TrainError::Env { actor, fault })?);
        }

        let n = cfg.batch_size();
        let obs_dim = st.params.obs_dim();
        let act_dim = st.params.action_dim();
        let mut obs = Array2::zeros((n, obs_dim));
        let mut actions = Array2::zeros((n, act_dim));
        let mut log_probs = Vec::with_capacity(n);
        let mut advantages = Vec::with_capacity(n);
        let mut returns = Vec::with_capacity(n);
        let mut raw = Vec::with_capacity(n);
        let mut row = 0;
        for p in &parts {
            let (adv, ret) = compute_gae(
                &p.rewards,
                &p.values,
                &p.dones,
                p.last_value,
                cfg.gamma,
                cfg.gae_lambda,
            )
            .expect("aligned rollout");
            for t in 0..p.rewards.len() {
                obs.row_mut(row)
                    .assign(&ndarray::ArrayView1::from(&p.obs[t]));
                actions
                    .row_mut(row)
                    .assign(&ndarray::ArrayView1::from(&p.actions[t]));
                row += 1;
            }
            log_probs.extend_from_slice(&p.log_probs);
            advantages.extend(adv);
            returns.extend(ret);
            raw.extend(p.raw_obs.iter().cloned());
        }
        if cfg.normalize_advantages {
            normalize(&mut advantages);
        }

        let mut indices: Vec<usize> = (0..n).collect();
        let coef = cfg.coefficients();
        let mut last = LossReport::default();
        let mut flat = st.params.to_flat();
        for epoch in 0..cfg.epochs {
            indices.shuffle(&mut st.rng);
            for b in 0..cfg.n_minibatches {
                let lo = b * n / cfg.n_minibatches;
                let hi = (b + 1) * n / cfg.n_minibatches;
                let idx = &indices[lo..hi];
                let mb_obs = obs.select(Axis(0), idx);
                let mb_act = actions.select(Axis(0), idx);
                let lp: Vec<f64> = idx.iter().map(|&i| log_probs[i]).collect();
                let ad: Vec<f64> = idx.iter().map(|&i| advantages[i]).collect();
                let rt: Vec<f64> = idx.iter().map(|&i| returns[i]).collect();
                let mb = Minibatch {
                    obs: mb_obs.view(),
                    actions: mb_act.view(),
                    old_log_probs: &lp,
                    advantages: &ad,
                    returns: &rt,
                };
                let (report, grad) = loss_and_grad(&st.params, &mb, &coef);
                if !report.total.is_finite() {
                    return Err(TrainError::NonFinite { epoch, batch: b });
                }
                st.adam.step(&mut flat, &grad.to_flat());
                st.params.set_flat(&flat);
                st.params.clamp_log_std();
                flat = st.params.to_flat();
                last = report;
            }
        }
        st.normalizer.update(&raw);

        let episodes: Vec<&EpisodeStat> = parts.iter().flat_map(|p| &p.episodes).collect();
        let ne = episodes.len();
        let cte_count: usize = parts.iter().map(|p| p.cte_count).sum();
        let cte_sum: f64 = parts.iter().map(|p| p.cte_sum).sum();
        st.iteration += 1;
        st.env_steps += n as u64;
        Ok(IterationMetrics {
            iteration: st.iteration,
            env_steps: st.env_steps,
            episodes: ne,
            mean_episode_reward: mean(episodes.iter().map(|e| e.reward)),
            mean_episode_length: mean(episodes.iter().map(|e| e.length as f64)),
            collision_rate: mean(episodes.iter().map(|e| e.collision as u8 as f64)),
            success_rate: mean(episodes.iter().map(|e| e.success as u8 as f64)),
            mean_step_reward: parts.iter().flat_map(|p| &p.rewards).sum::<f64>() / n as f64,
            mean_abs_cross_track_error: (cte_count > 0).then(|| cte_sum / cte_count as f64),
            policy_loss: last.policy,
            value_loss: last.value,
            entropy: last.entropy,
            approx_kl: last.approx_kl,
            clip_fraction: last.clip_fraction,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ppo::Transition;

    /// One-step episodes with reward `-a^2`.
    #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
    struct Bandit;

    impl Environment for Bandit {
        fn obs_dim(&self) -> usize {
            1
        }
        fn action_dim(&self) -> usize {
            1
        }
        fn reset(&mut self) -> Result<Vec<f64>, EnvFault> {
            Ok(vec![1.0])
        }
        fn step(&mut self, a: &[f64]) -> Result<Transition, EnvFault> {
            Ok(Transition {
                obs: vec![1.0],
                reward: -a[0] * a[0],
                done: true,
                cross_track_error: None,
                collision: false,
                success: false,
            })
        }
    }

    fn bandit_config(iterations: u64) -> PpoConfig {
        PpoConfig {
            horizon: 64,
            n_actors: 2,
            epochs: 4,
            n_minibatches: 4,
            total_timesteps: iterations * 128,
            learning_rate: 3e-3,
            hidden: vec![8],
            ..Default::default()
        }
    }

    fn biased_trainer(iterations: u64, seed: u64) -> Trainer<Bandit> {
        let mut t = Trainer::new(bandit_config(iterations), |_, _| Bandit, seed).unwrap();
        // Start well away from the optimum.
        t.state.params.policy.layers.last_mut().unwrap().b[0] = 0.8;
        t
    }

    #[test]
    fn zero_budget_leaves_params() {
        let mut t = biased_trainer(0, 1);
        let before = t.state.params.clone();
        assert!(t.train(|_, _| {}).unwrap().is_empty());
        assert_eq!(t.state.params, before);
    }

    #[test]
    fn bandit_mean_action_goes_to_zero() {
        let mut t = biased_trainer(50, 2);
        let start = t
            .state
            .params
            .mean_action(&t.state.normalizer.normalize(&[1.0]))[0];
        let metrics = t.train(|_, _| {}).unwrap();
        assert_eq!(metrics.len(), 50);
        let end = t
            .state
            .params
            .mean_action(&t.state.normalizer.normalize(&[1.0]))[0];
        assert!(start.abs() > 0.5);
        assert!(end.abs() < 0.1, "mean action {end}");
    }

    #[test]
    fn runs_are_bit_identical() {
        let run = || {
            let mut t = biased_trainer(5, 3);
            let m = t.train(|_, _| {}).unwrap();
            (serde_json::to_string(&m).unwrap(), t.state.params)
        };
        assert_eq!(run(), run());
    }
}
