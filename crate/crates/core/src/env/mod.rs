//! The episodic decision process: scenario instantiation, own-ship and target
//! propagation, observation assembly, rewards and termination.

pub mod encounter;
pub mod generator;
pub mod scenario;

pub use encounter::{classify_encounter, Encounter, EncounterConfig};
pub use generator::{generate_training_scenario, GeneratorConfig};
pub use scenario::{
    Bounds, Pose, Scenario, ScenarioError, Spawn, StaticObstacle, TargetMotion, TargetPose,
    TargetVessel, TrackPoint, ValidationIssue,
};

use crate::dynamics::{
    self, ControlInput, ModelError, ShipConfig, SimulationFault, VesselModel, VesselState,
};
use crate::geometry::{OrientedRect, Point};
use crate::guidance::{build_path, nav_features, NavFeatures, PathSpec};
use crate::rewards::{total_reward, RewardConfig, RewardConfigError, RewardTerms};
use crate::sensing::{
    perception_vector, sense, Obstacle, SensorConfig, SensorConfigError, SensorFrame, SensorSuite,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::sync::Arc;
use thiserror::Error;

/// Maximum number of spawn draws before a scenario is rejected.
pub const MAX_SPAWN_ATTEMPTS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvConfig {
    /// Integration step (s).
    pub dt: f64,
    /// Look-ahead distance along the path (m).
    pub lookahead: f64,
    /// Fillet radius for path corners; defaults to two hull lengths.
    pub fillet_radius: Option<f64>,
    /// Margin around the waypoints that defines the default world bounds (m).
    pub world_margin: f64,
    /// Any ray at or below this distance counts as a collision (m).
    pub collision_distance: f64,
    pub ship: ShipConfig,
    pub sensor: SensorConfig,
    pub reward: RewardConfig,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            dt: 0.1,
            lookahead: 3000.0,
            fillet_radius: None,
            world_margin: 1500.0,
            collision_distance: 0.0,
            ship: ShipConfig::default(),
            sensor: SensorConfig::default(),
            reward: RewardConfig::default(),
        }
    }
}

#[derive(Debug, Error)]
pub enum EnvConfigError {
    #[error(transparent)]
    Ship(#[from] ModelError),
    #[error("sensor: {0}")]
    Sensor(#[from] SensorConfigError),
    #[error("reward: {0}")]
    Reward(#[from] RewardConfigError),
    #[error("env.{0}")]
    Field(String),
}

impl EnvConfig {
    pub fn build(&self) -> Result<EnvContext, EnvConfigError> {
        let model = VesselModel::from_config(&self.ship)?;
        let suite = self.sensor.build()?;
        self.reward.validate()?;
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(EnvConfigError::Field("dt must be positive".into()));
        }
        if !(self.lookahead.is_finite() && self.lookahead > 0.0) {
            return Err(EnvConfigError::Field("lookahead must be positive".into()));
        }
        if self
            .fillet_radius
            .is_some_and(|r| !(r.is_finite() && r >= 0.0))
        {
            return Err(EnvConfigError::Field(
                "fillet_radius must be non-negative".into(),
            ));
        }
        if !(self.world_margin.is_finite() && self.world_margin >= 0.0) {
            return Err(EnvConfigError::Field(
                "world_margin must be non-negative".into(),
            ));
        }
        Ok(EnvContext {
            config: self.clone(),
            model,
            suite,
        })
    }

    pub fn fillet(&self) -> f64 {
        self.fillet_radius.unwrap_or(2.0 * self.ship.length)
    }

    pub fn obs_dim(&self) -> usize {
        6 + 3 * self.sensor.n_sectors
    }
}

/// Validated configuration shared by all environment instances.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvContext {
    pub config: EnvConfig,
    pub model: VesselModel,
    pub suite: SensorSuite,
}

/// Where each episode's scenario comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ScenarioSource {
    Fixed { scenario: Scenario },
    Generated { generator: GeneratorConfig },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Collision,
    Goal,
    Timeout,
    LeftWorld,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub nav: [f64; 6],
    pub perception: Vec<f64>,
}

impl Observation {
    pub fn to_vec(&self) -> Vec<f64> {
        self.nav.iter().chain(&self.perception).copied().collect()
    }

    pub fn len(&self) -> usize {
        6 + self.perception.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub observation: Observation,
    pub reward: f64,
    pub terms: RewardTerms,
    pub nav: NavFeatures,
    pub done: bool,
    pub cause: Option<Termination>,
    /// The projection needed its grid fallback this step.
    pub projection_fallback: bool,
}

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("step called on a finished episode")]
    EpisodeFinished,
    #[error("step called before reset")]
    NotReset,
    #[error(transparent)]
    Fault(#[from] SimulationFault),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
}

/// One line of the trajectory log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub t: f64,
    pub x_n: f64,
    pub y_n: f64,
    pub psi: f64,
    pub u: f64,
    pub v: f64,
    pub r: f64,
    pub action: [f64; 2],
    pub reward: f64,
    pub terms: RewardTerms,
    pub cross_track_error: f64,
    pub progress: f64,
    pub cause: Option<Termination>,
    #[serde(default)]
    pub targets: Vec<TargetPose>,
}

/// Writes records as line-delimited JSON.
pub fn write_log<W: Write>(mut out: W, records: &[StepRecord]) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_log(text: &str) -> Result<Vec<StepRecord>, serde_json::Error> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(serde_json::from_str)
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
struct Episode {
    scenario: Scenario,
    path: PathSpec,
    bounds: Bounds,
    state: VesselState,
    omega: f64,
    steps: usize,
    done: Option<Termination>,
}

/// A single simulated vessel episode stream. Owns its RNG so that a run is a
/// pure function of the construction seed and the action sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "EnvSnapshot", try_from = "EnvSnapshot")]
pub struct VesselEnv {
    ctx: Arc<EnvContext>,
    source: ScenarioSource,
    rng: ChaCha8Rng,
    episode: Option<Episode>,
}

#[derive(Serialize, Deserialize)]
struct EpisodeSnapshot {
    scenario: Scenario,
    state: VesselState,
    omega: f64,
    steps: usize,
    done: Option<Termination>,
}

#[derive(Serialize, Deserialize)]
struct EnvSnapshot {
    config: EnvConfig,
    source: ScenarioSource,
    rng: ChaCha8Rng,
    episode: Option<EpisodeSnapshot>,
}

impl From<VesselEnv> for EnvSnapshot {
    fn from(env: VesselEnv) -> Self {
        EnvSnapshot {
            config: env.ctx.config.clone(),
            source: env.source,
            rng: env.rng,
            episode: env.episode.map(|e| EpisodeSnapshot {
                scenario: e.scenario,
                state: e.state,
                omega: e.omega,
                steps: e.steps,
                done: e.done,
            }),
        }
    }
}

impl TryFrom<EnvSnapshot> for VesselEnv {
    type Error = String;

    fn try_from(s: EnvSnapshot) -> Result<Self, String> {
        let ctx = Arc::new(s.config.build().map_err(|e| e.to_string())?);
        let episode = match s.episode {
            None => None,
            Some(e) => {
                let path = build_path(&e.scenario.waypoints, ctx.config.fillet())
                    .map_err(|e| e.to_string())?;
                let bounds = e.scenario.bounds_or(ctx.config.world_margin);
                Some(Episode {
                    scenario: e.scenario,
                    path,
                    bounds,
                    state: e.state,
                    omega: e.omega,
                    steps: e.steps,
                    done: e.done,
                })
            }
        };
        Ok(VesselEnv {
            ctx,
            source: s.source,
            rng: s.rng,
            episode,
        })
    }
}

impl VesselEnv {
    pub fn new(ctx: Arc<EnvContext>, source: ScenarioSource, seed: u64) -> Self {
        Self {
            ctx,
            source,
            rng: ChaCha8Rng::seed_from_u64(seed),
            episode: None,
        }
    }

    pub fn context(&self) -> &EnvContext {
        &self.ctx
    }

    pub fn obs_dim(&self) -> usize {
        6 + self.ctx.suite.perception_dim()
    }

    /// Starts a new episode from the configured scenario source.
    pub fn reset(&mut self) -> Result<Observation, EnvError> {
        let scenario = match &self.source {
            ScenarioSource::Fixed { scenario } => scenario.clone(),
            ScenarioSource::Generated { generator } => {
                let seed = self.rng.random();
                generate_training_scenario(generator, seed)?
            }
        };
        self.reset_with(scenario)
    }

    /// Starts a new episode in `scenario`.
    pub fn reset_with(&mut self, scenario: Scenario) -> Result<Observation, EnvError> {
        let cfg = &self.ctx.config;
        let hull = (self.ctx.model.length, self.ctx.model.width);
        let issues = scenario.validate(hull, cfg.fillet(), cfg.world_margin);
        if !issues.is_empty() {
            return Err(ScenarioError::Invalid(issues).into());
        }
        let path = build_path(&scenario.waypoints, cfg.fillet()).expect("validated path");
        let bounds = scenario.bounds_or(cfg.world_margin);
        let pose = match scenario.spawn {
            Spawn::Fixed { pose } => pose,
            Spawn::Random { lateral, heading } => {
                let mut found = None;
                for _ in 0..MAX_SPAWN_ATTEMPTS {
                    let a = self.rng.random_range(-1.0..=1.0);
                    let b = self.rng.random_range(-1.0..=1.0);
                    let pose =
                        scenario::random_spawn_pose(&scenario.waypoints, lateral, heading, a, b);
                    if spawn_is_clear(&scenario, &self.ctx.model, &pose) {
                        found = Some(pose);
                        break;
                    }
                }
                found.ok_or(ScenarioError::SpawnExhausted(MAX_SPAWN_ATTEMPTS))?
            }
        };
        let state = VesselState::at_rest(pose.x_n, pose.y_n, pose.psi);
        let omega = path.project(&state.position(), 0.0).omega;
        self.episode = Some(Episode {
            scenario,
            path,
            bounds,
            state,
            omega,
            steps: 0,
            done: None,
        });
        let (nav, _) = nav_features(&self.ep().path, &state, omega, cfg.lookahead);
        let frame = self.sense_now();
        Ok(Observation {
            nav: nav.to_array(),
            perception: perception_vector(&frame),
        })
    }

    fn ep(&self) -> &Episode {
        self.episode.as_ref().expect("episode started")
    }

    pub fn state(&self) -> Option<&VesselState> {
        self.episode.as_ref().map(|e| &e.state)
    }

    pub fn scenario(&self) -> Option<&Scenario> {
        self.episode.as_ref().map(|e| &e.scenario)
    }

    pub fn path(&self) -> Option<&PathSpec> {
        self.episode.as_ref().map(|e| &e.path)
    }

    pub fn steps(&self) -> usize {
        self.episode.as_ref().map_or(0, |e| e.steps)
    }

    /// Simulation time of the current episode (s).
    pub fn time(&self) -> f64 {
        self.steps() as f64 * self.ctx.config.dt
    }

    pub fn is_done(&self) -> bool {
        self.episode.as_ref().is_some_and(|e| e.done.is_some())
    }

    /// Target poses at the current time (absent targets are skipped).
    pub fn targets_now(&self) -> Vec<TargetPose> {
        let t = self.time();
        self.episode
            .as_ref()
            .map(|e| {
                e.scenario
                    .targets
                    .iter()
                    .filter_map(|tv| tv.pose_at(t))
                    .collect()
            })
            .unwrap_or_default()
    }

    /// Static obstacles followed by currently present target vessels.
    pub fn obstacles_now(&self) -> Vec<Obstacle> {
        let t = self.time();
        let ep = self.ep();
        ep.scenario
            .obstacles
            .iter()
            .map(|o| o.to_obstacle())
            .chain(
                ep.scenario
                    .targets
                    .iter()
                    .filter_map(|tv| tv.obstacle_at(t)),
            )
            .collect()
    }

    pub fn sense_now(&self) -> SensorFrame {
        let obstacles = self.obstacles_now();
        sense(
            &self.ep().state,
            &obstacles,
            &self.ctx.suite,
            self.ctx.model.width,
        )
    }

    fn collided(&self, frame: &SensorFrame) -> bool {
        let ep = self.ep();
        let hull = self.ctx.model.hull(&ep.state);
        let t = self.time();
        if frame
            .distances
            .iter()
            .any(|&d| d <= self.ctx.config.collision_distance)
        {
            return true;
        }
        ep.scenario
            .obstacles
            .iter()
            .any(|o| o.intersects_hull(&hull))
            || ep
                .scenario
                .targets
                .iter()
                .filter_map(|tv| tv.hull_at(t))
                .any(|h| hull.intersects_rect(&h))
    }

    /// Advances one step with a normalized action in `[-1, 1]^2`.
    pub fn step(&mut self, action: [f64; 2]) -> Result<StepResult, EnvError> {
        let ep = self.episode.as_ref().ok_or(EnvError::NotReset)?;
        if ep.done.is_some() {
            return Err(EnvError::EpisodeFinished);
        }
        let cfg = &self.ctx.config;
        let input = ControlInput::from_normalized(action, &self.ctx.model);
        let state = dynamics::step(&ep.state, &input, &self.ctx.model, cfg.dt)?;
        let (nav, proj) = nav_features(&ep.path, &state, ep.omega, cfg.lookahead);
        {
            let ep = self.episode.as_mut().expect("episode started");
            ep.state = state;
            ep.omega = nav.omega_bar;
            ep.steps += 1;
        }
        let frame = self.sense_now();
        let collision = self.collided(&frame);
        let terms = total_reward(&nav, &frame, self.ctx.model.u_max, collision, &cfg.reward);

        let ep = self.ep();
        let cause = if collision {
            Some(Termination::Collision)
        } else if nav.omega_bar >= ep.path.length() - ep.scenario.goal_radius {
            Some(Termination::Goal)
        } else if !ep.bounds.contains(&state.position()) {
            Some(Termination::LeftWorld)
        } else if ep.steps >= ep.scenario.max_steps {
            Some(Termination::Timeout)
        } else {
            None
        };
        self.episode.as_mut().expect("episode started").done = cause;
        Ok(StepResult {
            observation: Observation {
                nav: nav.to_array(),
                perception: perception_vector(&frame),
            },
            reward: terms.total,
            terms,
            nav,
            done: cause.is_some(),
            cause,
            projection_fallback: proj.used_fallback,
        })
    }

    /// Log record for the step that produced `result`.
    pub fn record(&self, action: [f64; 2], result: &StepResult) -> StepRecord {
        let s = self.ep().state;
        StepRecord {
            step: self.steps(),
            t: self.time(),
            x_n: s.x_n,
            y_n: s.y_n,
            psi: s.psi,
            u: s.u,
            v: s.v,
            r: s.r,
            action,
            reward: result.reward,
            terms: result.terms,
            cross_track_error: result.nav.cross_track_error,
            progress: result.nav.progress,
            cause: result.cause,
            targets: self.targets_now(),
        }
    }
}

fn spawn_is_clear(scenario: &Scenario, model: &VesselModel, pose: &Pose) -> bool {
    let hull = OrientedRect {
        center: Point::new(pose.x_n, pose.y_n),
        heading: pose.psi,
        length: model.length,
        width: model.width,
    };
    !scenario.obstacles.iter().any(|o| o.intersects_hull(&hull))
        && !scenario
            .targets
            .iter()
            .filter_map(|tv| tv.hull_at(0.0))
            .any(|h| hull.intersects_rect(&h))
}

impl crate::ppo::Environment for VesselEnv {
    fn obs_dim(&self) -> usize {
        VesselEnv::obs_dim(self)
    }

    fn action_dim(&self) -> usize {
        2
    }

    fn reset(&mut self) -> Result<Vec<f64>, crate::ppo::EnvFault> {
        VesselEnv::reset(self)
            .map(|o| o.to_vec())
            .map_err(|e| crate::ppo::EnvFault(e.to_string()))
    }

    fn step(&mut self, action: &[f64]) -> Result<crate::ppo::Transition, crate::ppo::EnvFault> {
        let r = VesselEnv::step(self, [action[0], action[1]])
            .map_err(|e| crate::ppo::EnvFault(e.to_string()))?;
        Ok(crate::ppo::Transition {
            obs: r.observation.to_vec(),
            reward: r.reward,
            done: r.done,
            cross_track_error: Some(r.nav.cross_track_error),
            collision: r.cause == Some(Termination::Collision),
            success: r.cause == Some(Termination::Goal),
        })
    }
}

/// A straight two-waypoint scenario with nothing in it.
pub fn straight_scenario(
    length: f64,
    spawn: Spawn,
    goal_radius: f64,
    max_steps: usize,
) -> Scenario {
    Scenario {
        name: "straight".into(),
        waypoints: vec![Point::new(0.0, 0.0), Point::new(length, 0.0)],
        obstacles: Vec::new(),
        targets: Vec::new(),
        spawn,
        goal_radius,
        max_steps,
        seed: 0,
        bounds: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sensing::Shape;
    use approx::assert_abs_diff_eq;

    fn ctx() -> Arc<EnvContext> {
        Arc::new(EnvConfig::default().build().unwrap())
    }

    fn fixed(sc: Scenario) -> ScenarioSource {
        ScenarioSource::Fixed { scenario: sc }
    }

    fn on_path() -> Spawn {
        Spawn::Fixed {
            pose: Pose {
                x_n: 0.0,
                y_n: 0.0,
                psi: 0.0,
            },
        }
    }

    #[test]
    fn reset_in_empty_world() {
        let mut env = VesselEnv::new(
            ctx(),
            fixed(straight_scenario(5000.0, on_path(), 100.0, 50)),
            1,
        );
        let obs = env.reset().unwrap();
        assert_eq!(obs.len(), 33);
        assert_eq!(&obs.nav[..4], &[0.0, 0.0, 0.0, 0.0]);
        assert!(obs.perception.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn idle_action_reward() {
        let mut env = VesselEnv::new(
            ctx(),
            fixed(straight_scenario(5000.0, on_path(), 100.0, 50)),
            1,
        );
        env.reset().unwrap();
        let r = env.step([0.0, 0.0]).unwrap();
        assert_eq!(env.state().unwrap().position(), Point::zeros());
        let lambda = r.terms.lambda;
        let expected = lambda * (0.1 * 1.1 - 0.01) + r.terms.colav_stat + r.terms.colav_dyn - 1.0;
        assert_abs_diff_eq!(r.reward, expected, epsilon = 1e-12);
        assert!((r.reward + 1.0).abs() < 0.1);
    }

    #[test]
    fn wall_ahead_causes_collision() {
        let mut sc = straight_scenario(5000.0, on_path(), 100.0, 10_000);
        sc.obstacles.push(StaticObstacle {
            id: 7,
            shape: Shape::polygon(vec![
                Point::new(1.0 + 0.6275, -50.0),
                Point::new(2.0 + 0.6275, -50.0),
                Point::new(2.0 + 0.6275, 50.0),
                Point::new(1.0 + 0.6275, 50.0),
            ]),
        });
        let mut env = VesselEnv::new(ctx(), fixed(sc), 3);
        env.reset().unwrap();
        let mut last = None;
        for _ in 0..200 {
            let r = env.step([1.0, 0.0]).unwrap();
            if r.done {
                last = Some(r);
                break;
            }
        }
        let r = last.expect("collision within 200 steps");
        assert_eq!(r.cause, Some(Termination::Collision));
        assert_eq!(r.reward, -10000.0);
        assert!(matches!(
            env.step([0.0, 0.0]),
            Err(EnvError::EpisodeFinished)
        ));
    }

    #[test]
    fn timeout_and_determinism() {
        let spawn = Spawn::Random {
            lateral: 5.0,
            heading: 0.5,
        };
        let run = || {
            let mut env =
                VesselEnv::new(ctx(), fixed(straight_scenario(5000.0, spawn, 100.0, 30)), 9);
            env.reset().unwrap();
            let mut out = Vec::new();
            loop {
                let r = env.step([0.5, -0.3]).unwrap();
                out.push(r.reward);
                if r.done {
                    assert_eq!(r.cause, Some(Termination::Timeout));
                    break;
                }
            }
            (out, *env.state().unwrap())
        };
        let (a, sa) = run();
        let (b, sb) = run();
        assert_eq!(a.len(), 30);
        assert_eq!(a, b);
        assert_eq!(sa, sb);
    }

    #[test]
    fn snapshot_round_trip_continues_identically() {
        let src = ScenarioSource::Generated {
            generator: GeneratorConfig::default(),
        };
        let mut env = VesselEnv::new(ctx(), src, 11);
        env.reset().unwrap();
        for _ in 0..5 {
            env.step([0.8, 0.1]).unwrap();
        }
        let json = serde_json::to_string(&env).unwrap();
        let mut copy: VesselEnv = serde_json::from_str(&json).unwrap();
        assert_eq!(copy, env);
        for _ in 0..5 {
            assert_eq!(
                copy.step([0.2, 0.9]).unwrap(),
                env.step([0.2, 0.9]).unwrap()
            );
        }
    }
}
