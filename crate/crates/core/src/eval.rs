//! Deterministic policy evaluation over scenario sets, with COLREGs
//! encounter bookkeeping.

use crate::data::{PresetError, ReplayPreset};
use crate::dynamics::VesselState;
use crate::env::{
    classify_encounter, generate_training_scenario, straight_scenario, Encounter, EncounterConfig,
    EnvContext, EnvError, Scenario, ScenarioError, ScenarioSource, Spawn, StepRecord, TargetMotion,
    TargetPose, TargetVessel, Termination, VesselEnv,
};
use crate::geometry::{cross, heading_vector, wrap_angle, Point};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScenarioSet {
    HeadOn,
    CrossingStarboard,
    CrossingPort,
    TrainingRandom,
    /// Bundled preset name or preset file path.
    Replay(String),
}

impl FromStr for ScenarioSet {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "head-on" => ScenarioSet::HeadOn,
            "crossing-starboard" => ScenarioSet::CrossingStarboard,
            "crossing-port" => ScenarioSet::CrossingPort,
            "training-random" => ScenarioSet::TrainingRandom,
            _ => match s.strip_prefix("replay:") {
                Some(p) if !p.is_empty() => ScenarioSet::Replay(p.to_string()),
                _ => {
                    return Err(format!(
                        "unknown scenario set `{s}` (expected head-on, crossing-starboard, crossing-port, training-random or replay:<preset>)"
                    ))
                }
            },
        })
    }
}

impl fmt::Display for ScenarioSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScenarioSet::HeadOn => f.write_str("head-on"),
            ScenarioSet::CrossingStarboard => f.write_str("crossing-starboard"),
            ScenarioSet::CrossingPort => f.write_str("crossing-port"),
            ScenarioSet::TrainingRandom => f.write_str("training-random"),
            ScenarioSet::Replay(p) => write!(f, "replay:{p}"),
        }
    }
}

/// Layout of the scripted encounter scenarios. The own-ship starts at the
/// origin heading north on a straight path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EncounterLayout {
    pub path_length: f64,
    /// Head-on targets start this far ahead, aimed at the own-ship's start.
    pub head_on_distance: f64,
    /// Crossing targets reach the path this far along it...
    pub crossing_along: f64,
    /// ...when an own-ship at this speed would (m/s).
    pub own_speed: f64,
    pub target_speed: f64,
    pub target_length: f64,
    pub target_width: f64,
    /// Head-on incoming angle sweep is `[-x, x]` degrees.
    pub head_on_sweep_deg: f64,
    /// Crossing course sweep around perpendicular is `[-x, x]` degrees.
    pub crossing_sweep_deg: f64,
    pub goal_radius: f64,
    pub max_steps: usize,
}

impl Default for EncounterLayout {
    fn default() -> Self {
        Self {
            path_length: 1500.0,
            head_on_distance: 1200.0,
            crossing_along: 700.0,
            own_speed: 1.5,
            target_speed: 1.5,
            target_length: 50.0,
            target_width: 10.0,
            head_on_sweep_deg: 5.0,
            crossing_sweep_deg: 30.0,
            goal_radius: 50.0,
            max_steps: 12_000,
        }
    }
}

fn sweep(k: usize, n: usize, half: f64) -> f64 {
    if n <= 1 {
        0.0
    } else {
        -half + 2.0 * half * k as f64 / (n - 1) as f64
    }
}

impl EncounterLayout {
    fn base(&self, name: String) -> Scenario {
        let mut s = straight_scenario(
            self.path_length,
            Spawn::Random {
                lateral: 0.0,
                heading: 0.0,
            },
            self.goal_radius,
            self.max_steps,
        );
        s.spawn = Spawn::Fixed {
            pose: crate::env::Pose {
                x_n: 0.0,
                y_n: 0.0,
                psi: 0.0,
            },
        };
        s.name = name;
        s
    }

    fn target(&self, position: Point, heading: f64) -> TargetVessel {
        TargetVessel {
            id: 1,
            length: self.target_length,
            width: self.target_width,
            motion: TargetMotion::Linear {
                position,
                velocity: heading_vector(heading) * self.target_speed,
            },
        }
    }

    /// Target on a reciprocal course offset by `theta_deg`, aimed at the
    /// own-ship's starting position.
    pub fn head_on(&self, theta_deg: f64) -> Scenario {
        let th = theta_deg.to_radians();
        let mut s = self.base(format!("head-on {theta_deg:+.2}deg"));
        s.targets.push(self.target(
            heading_vector(th) * self.head_on_distance,
            th + std::f64::consts::PI,
        ));
        s
    }

    /// Target crossing the path from starboard (`starboard = true`) or port,
    /// its course `delta_deg` away from perpendicular.
    pub fn crossing(&self, starboard: bool, delta_deg: f64) -> Scenario {
        let side = if starboard { -1.0 } else { 1.0 };
        let heading = side * std::f64::consts::FRAC_PI_2 + delta_deg.to_radians();
        let meet = Point::new(self.crossing_along, 0.0);
        let t = self.crossing_along / self.own_speed;
        let name = if starboard {
            "crossing-starboard"
        } else {
            "crossing-port"
        };
        let mut s = self.base(format!("{name} {delta_deg:+.2}deg"));
        s.targets.push(self.target(
            meet - heading_vector(heading) * self.target_speed * t,
            heading,
        ));
        s
    }
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Preset(#[from] PresetError),
    #[error("episode {episode}: {source}")]
    Env { episode: usize, source: EnvError },
}

/// One evaluation episode before it is run.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeSpec {
    pub scenario: Scenario,
    /// Seeds the environment's own RNG (random spawns).
    pub env_seed: u64,
    /// Swept geometric parameter in degrees, for scripted sets.
    pub parameter: Option<f64>,
}

pub fn build_episodes(
    set: &ScenarioSet,
    n: usize,
    seed: u64,
    source: &ScenarioSource,
    layout: &EncounterLayout,
) -> Result<Vec<EpisodeSpec>, EvalError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let seeds: Vec<u64> = (0..n).map(|_| rng.random()).collect();
    let replay = match set {
        ScenarioSet::Replay(spec) => {
            let (preset, base) = ReplayPreset::resolve(spec)?;
            Some(preset.build(&base)?)
        }
        _ => None,
    };
    let mut out = Vec::with_capacity(n);
    for (k, &env_seed) in seeds.iter().enumerate() {
        let (scenario, parameter) = match set {
            ScenarioSet::HeadOn => {
                let th = sweep(k, n, layout.head_on_sweep_deg);
                (layout.head_on(th), Some(th))
            }
            ScenarioSet::CrossingStarboard | ScenarioSet::CrossingPort => {
                let d = sweep(k, n, layout.crossing_sweep_deg);
                (
                    layout.crossing(*set == ScenarioSet::CrossingStarboard, d),
                    Some(d),
                )
            }
            ScenarioSet::TrainingRandom => match source {
                ScenarioSource::Generated { generator } => {
                    (generate_training_scenario(generator, env_seed)?, None)
                }
                ScenarioSource::Fixed { scenario } => (scenario.clone(), None),
            },
            ScenarioSet::Replay(_) => (replay.clone().expect("built above"), None),
        };
        out.push(EpisodeSpec {
            scenario,
            env_seed,
            parameter,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EncounterOutcome {
    PassPortSide,
    PassStarboardSide,
    CrossedAstern,
    CrossedAhead,
    Collision,
    Unresolved,
}

impl EncounterOutcome {
    pub fn label(self) -> &'static str {
        match self {
            Self::PassPortSide => "pass-port-side",
            Self::PassStarboardSide => "pass-starboard-side",
            Self::CrossedAstern => "crossed-astern",
            Self::CrossedAhead => "crossed-ahead",
            Self::Collision => "collision",
            Self::Unresolved => "unresolved",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncounterEvent {
    pub target_id: u32,
    pub classification: Encounter,
    /// Step at which the encounter was first classified.
    pub first_step: usize,
    /// Relative bearing of the target at classification (deg, + starboard).
    pub initial_bearing_deg: f64,
    /// Closest centre-to-centre distance (m).
    pub min_distance: f64,
    pub outcome: EncounterOutcome,
    /// `None` where the rules leave the manoeuvre open.
    pub compliant: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub index: usize,
    pub scenario: String,
    pub env_seed: u64,
    pub parameter: Option<f64>,
    pub outcome: Termination,
    pub steps: usize,
    pub total_reward: f64,
    pub mean_abs_cte: f64,
    pub max_abs_cte: f64,
    /// Final path progress as a fraction of path length.
    pub progress: f64,
    pub encounters: Vec<EncounterEvent>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub episodes: usize,
    pub goal: usize,
    pub collision: usize,
    pub timeout: usize,
    pub left_world: usize,
    pub success_rate: f64,
    pub collision_rate: f64,
    pub mean_total_reward: f64,
    pub mean_abs_cte: f64,
    pub encounter_outcomes: BTreeMap<String, usize>,
    pub compliant: usize,
    pub non_compliant: usize,
}

impl Aggregate {
    pub fn from_episodes(eps: &[EpisodeRecord]) -> Self {
        let n = eps.len();
        let count = |t: Termination| eps.iter().filter(|e| e.outcome == t).count();
        let mean = |f: &dyn Fn(&EpisodeRecord) -> f64| {
            if n == 0 {
                0.0
            } else {
                eps.iter().map(f).sum::<f64>() / n as f64
            }
        };
        let mut encounter_outcomes = BTreeMap::new();
        let (mut compliant, mut non_compliant) = (0, 0);
        for ev in eps.iter().flat_map(|e| &e.encounters) {
            *encounter_outcomes
                .entry(ev.outcome.label().to_string())
                .or_insert(0) += 1;
            match ev.compliant {
                Some(true) => compliant += 1,
                Some(false) => non_compliant += 1,
                None => {}
            }
        }
        let goal = count(Termination::Goal);
        let collision = count(Termination::Collision);
        Self {
            episodes: n,
            goal,
            collision,
            timeout: count(Termination::Timeout),
            left_world: count(Termination::LeftWorld),
            success_rate: if n == 0 { 0.0 } else { goal as f64 / n as f64 },
            collision_rate: if n == 0 {
                0.0
            } else {
                collision as f64 / n as f64
            },
            mean_total_reward: mean(&|e| e.total_reward),
            mean_abs_cte: mean(&|e| e.mean_abs_cte),
            encounter_outcomes,
            compliant,
            non_compliant,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub scenario_set: String,
    pub seed: u64,
    pub config_hash: String,
    pub episodes: Vec<EpisodeRecord>,
    pub aggregate: Aggregate,
}

struct Tracker {
    id: u32,
    class: Encounter,
    first_step: usize,
    initial_bearing: f64,
    min_distance: f64,
    bearing_at_min: f64,
    side: Option<f64>,
    crossed_ahead: Option<bool>,
}

fn target_state(p: &TargetPose) -> VesselState {
    VesselState {
        u: p.velocity.norm(),
        ..VesselState::at_rest(p.position.x, p.position.y, p.heading)
    }
}

impl Tracker {
    fn observe(
        &mut self,
        own: &VesselState,
        target: &TargetPose,
        step: usize,
        cfg: &EncounterConfig,
    ) {
        let d = target.position - own.position();
        let bearing = wrap_angle(d.y.atan2(d.x) - own.psi);
        if self.class == Encounter::None {
            let c = classify_encounter(own, &target_state(target), cfg);
            if c != Encounter::None {
                self.class = c;
                self.first_step = step;
                self.initial_bearing = bearing;
            }
        }
        if d.norm() < self.min_distance {
            self.min_distance = d.norm();
            self.bearing_at_min = bearing;
        }
        // Side of the target's course line the own-ship is on.
        let course = heading_vector(target.heading);
        let rel = own.position() - target.position;
        let side = cross(&course, &rel).signum();
        if let Some(prev) = self.side {
            if prev != side && self.crossed_ahead.is_none() {
                self.crossed_ahead = Some(course.dot(&rel) > 0.0);
            }
        }
        self.side = Some(side);
    }

    fn finish(self, collided: bool) -> Option<EncounterEvent> {
        if self.class == Encounter::None {
            return None;
        }
        let outcome = if collided {
            EncounterOutcome::Collision
        } else {
            match self.class {
                Encounter::CrossingFromStarboard | Encounter::CrossingFromPort => {
                    match self.crossed_ahead {
                        Some(true) => EncounterOutcome::CrossedAhead,
                        Some(false) => EncounterOutcome::CrossedAstern,
                        None => EncounterOutcome::Unresolved,
                    }
                }
                _ if self.bearing_at_min < 0.0 => EncounterOutcome::PassPortSide,
                _ => EncounterOutcome::PassStarboardSide,
            }
        };
        let compliant = match (self.class, outcome) {
            (_, EncounterOutcome::Collision) => Some(false),
            (Encounter::HeadOn, o) => Some(o == EncounterOutcome::PassPortSide),
            (Encounter::CrossingFromStarboard, EncounterOutcome::CrossedAstern) => Some(true),
            // Crossing ahead of a broad-angle target is recorded, not failed.
            (Encounter::CrossingFromStarboard, EncounterOutcome::CrossedAhead) => {
                (self.initial_bearing.abs() <= std::f64::consts::FRAC_PI_4).then_some(false)
            }
            _ => None,
        };
        Some(EncounterEvent {
            target_id: self.id,
            classification: self.class,
            first_step: self.first_step,
            initial_bearing_deg: self.initial_bearing.to_degrees(),
            min_distance: self.min_distance,
            outcome,
            compliant,
        })
    }
}

/// Runs one episode to termination. Returns the record and, when
/// `keep_log`, the per-step trajectory.
pub fn run_episode<P>(
    ctx: &Arc<EnvContext>,
    index: usize,
    spec: &EpisodeSpec,
    policy: &P,
    enc: &EncounterConfig,
    keep_log: bool,
) -> Result<(EpisodeRecord, Vec<StepRecord>), EnvError>
where
    P: Fn(&[f64]) -> [f64; 2] + ?Sized,
{
    let mut env = VesselEnv::new(
        ctx.clone(),
        ScenarioSource::Fixed {
            scenario: spec.scenario.clone(),
        },
        spec.env_seed,
    );
    let mut obs = env.reset()?.to_vec();
    let mut trackers: Vec<Tracker> = spec
        .scenario
        .targets
        .iter()
        .map(|t| Tracker {
            id: t.id,
            class: Encounter::None,
            first_step: 0,
            initial_bearing: 0.0,
            min_distance: f64::INFINITY,
            bearing_at_min: 0.0,
            side: None,
            crossed_ahead: None,
        })
        .collect();
    let mut log = Vec::new();
    let (mut total, mut cte_sum, mut cte_max) = (0.0, 0.0f64, 0.0f64);
    loop {
        let action = policy(&obs);
        let res = env.step(action)?;
        total += res.reward;
        let e = res.nav.cross_track_error.abs();
        cte_sum += e;
        cte_max = cte_max.max(e);
        let own = *env.state().expect("running");
        for tp in env.targets_now() {
            if let Some(tr) = trackers.iter_mut().find(|t| t.id == tp.id) {
                tr.observe(&own, &tp, env.steps(), enc);
            }
        }
        if keep_log {
            log.push(env.record(action, &res));
        }
        obs = res.observation.to_vec();
        if let Some(cause) = res.cause {
            let hull = ctx.model.hull(&own);
            let t = env.time();
            let hit = |id: u32| {
                cause == Termination::Collision
                    && spec
                        .scenario
                        .targets
                        .iter()
                        .find(|tv| tv.id == id)
                        .and_then(|tv| tv.hull_at(t))
                        .is_some_and(|h| hull.intersects_rect(&h))
            };
            let encounters = trackers.into_iter().filter_map(|t| {
                let c = hit(t.id);
                t.finish(c)
            });
            let steps = env.steps();
            let record = EpisodeRecord {
                index,
                scenario: spec.scenario.name.clone(),
                env_seed: spec.env_seed,
                parameter: spec.parameter,
                outcome: cause,
                steps,
                total_reward: total,
                mean_abs_cte: cte_sum / steps as f64,
                max_abs_cte: cte_max,
                progress: res.nav.progress,
                encounters: encounters.collect(),
            };
            return Ok((record, log));
        }
    }
}

/// Runs every episode in parallel; results are in episode order. Logs are
/// kept for the first `keep_logs` episodes.
pub fn evaluate<P>(
    ctx: &Arc<EnvContext>,
    specs: &[EpisodeSpec],
    policy: &P,
    enc: &EncounterConfig,
    keep_logs: usize,
) -> Result<(Vec<EpisodeRecord>, Vec<Vec<StepRecord>>), EvalError>
where
    P: Fn(&[f64]) -> [f64; 2] + Sync + ?Sized,
{
    let results: Vec<_> = specs
        .par_iter()
        .enumerate()
        .map(|(k, spec)| {
            run_episode(ctx, k, spec, policy, enc, k < keep_logs)
                .map_err(|source| EvalError::Env { episode: k, source })
        })
        .collect();
    let mut records = Vec::with_capacity(specs.len());
    let mut logs = Vec::new();
    for r in results {
        let (rec, log) = r?;
        records.push(rec);
        if !log.is_empty() {
            logs.push(log);
        }
    }
    Ok((records, logs))
}
