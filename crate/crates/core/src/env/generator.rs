//! Stochastic training scenarios: a random smooth path with circular
//! obstacles scattered near it and target vessels on straight courses that
//! cross or follow it.

use super::scenario::{
    path_start_pose, Scenario, ScenarioError, Spawn, StaticObstacle, TargetMotion, TargetVessel,
    ValidationIssue,
};
use crate::geometry::{heading_vector, Point};
use crate::guidance::build_path;
use crate::sensing::Shape;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Attempts before generation gives up.
pub const MAX_ATTEMPTS: usize = 100;

/// Sampling ranges. Every `[lo, hi]` pair is inclusive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorConfig {
    /// Total waypoint polyline length (m).
    pub path_length: [f64; 2],
    pub n_legs: [usize; 2],
    /// Largest course change between legs (deg).
    pub max_turn_deg: f64,
    pub n_static: [usize; 2],
    pub static_radius: [f64; 2],
    /// Largest distance from the path to an obstacle centre (m).
    pub static_offset: f64,
    pub n_targets: [usize; 2],
    pub target_speed: [f64; 2],
    pub target_length: [f64; 2],
    pub target_width_ratio: f64,
    /// Own-ship speed used to time target crossings (m/s).
    pub nominal_speed: f64,
    /// Minimum free distance around the spawn and the goal (m).
    pub clearance: f64,
    pub fillet_radius: f64,
    pub spawn: Spawn,
    pub goal_radius: f64,
    pub max_steps: usize,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            path_length: [5000.0, 12000.0],
            n_legs: [1, 4],
            max_turn_deg: 60.0,
            n_static: [5, 25],
            static_radius: [50.0, 400.0],
            static_offset: 600.0,
            n_targets: [2, 8],
            target_speed: [1.0, 6.0],
            target_length: [30.0, 120.0],
            target_width_ratio: 0.2,
            nominal_speed: 2.0,
            clearance: 50.0,
            fillet_radius: 2.51,
            spawn: Spawn::default(),
            goal_radius: 100.0,
            max_steps: 10_000,
        }
    }
}

fn uniform(rng: &mut ChaCha8Rng, r: [f64; 2]) -> f64 {
    if r[0] == r[1] {
        r[0]
    } else {
        rng.random_range(r[0]..=r[1])
    }
}

fn count(rng: &mut ChaCha8Rng, r: [usize; 2]) -> usize {
    rng.random_range(r[0]..=r[1])
}

impl GeneratorConfig {
    pub fn validate(&self) -> Vec<ValidationIssue> {
        let mut issues = Vec::new();
        let mut check = |ok: bool, field: &str, msg: &str| {
            if !ok {
                issues.push(ValidationIssue {
                    field: format!("generator.{field}"),
                    message: msg.into(),
                });
            }
        };
        let range = |r: [f64; 2]| r[0].is_finite() && r[1].is_finite() && r[0] <= r[1];
        check(
            range(self.path_length) && self.path_length[0] > 0.0,
            "path_length",
            "needs 0 < lo <= hi",
        );
        check(
            self.n_legs[0] >= 1 && self.n_legs[0] <= self.n_legs[1],
            "n_legs",
            "needs 1 <= lo <= hi",
        );
        check(
            self.n_static[0] <= self.n_static[1],
            "n_static",
            "needs lo <= hi",
        );
        check(
            range(self.static_radius) && self.static_radius[0] > 0.0,
            "static_radius",
            "needs 0 < lo <= hi",
        );
        check(
            self.n_targets[0] <= self.n_targets[1],
            "n_targets",
            "needs lo <= hi",
        );
        check(
            range(self.target_speed) && self.target_speed[0] >= 0.0,
            "target_speed",
            "needs 0 <= lo <= hi",
        );
        check(
            range(self.target_length) && self.target_length[0] > 0.0,
            "target_length",
            "needs 0 < lo <= hi",
        );
        check(
            self.target_width_ratio > 0.0,
            "target_width_ratio",
            "must be positive",
        );
        check(
            self.nominal_speed > 0.0,
            "nominal_speed",
            "must be positive",
        );
        check(self.clearance >= 0.0, "clearance", "must be non-negative");
        check(self.max_steps > 0, "max_steps", "must be positive");
        issues
    }
}

/// Draws one scenario; the result is a pure function of `(cfg, seed)`.
pub fn generate_training_scenario(
    cfg: &GeneratorConfig,
    seed: u64,
) -> Result<Scenario, ScenarioError> {
    let issues = cfg.validate();
    if !issues.is_empty() {
        return Err(ScenarioError::Invalid(issues));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_ATTEMPTS {
        if let Some(sc) = attempt(cfg, &mut rng, seed) {
            return Ok(sc);
        }
    }
    Err(ScenarioError::SpawnExhausted(MAX_ATTEMPTS))
}

fn attempt(cfg: &GeneratorConfig, rng: &mut ChaCha8Rng, seed: u64) -> Option<Scenario> {
    let total = uniform(rng, cfg.path_length);
    let legs = count(rng, cfg.n_legs);
    let max_turn = cfg.max_turn_deg.to_radians();
    let mut course = rng.random_range(-PI..PI);
    let mut waypoints = vec![Point::zeros()];
    for k in 0..legs {
        if k > 0 && max_turn > 0.0 {
            course += rng.random_range(-max_turn..=max_turn);
        }
        let last = *waypoints.last().expect("non-empty");
        waypoints.push(last + heading_vector(course) * (total / legs as f64));
    }
    let path = build_path(&waypoints, cfg.fillet_radius).ok()?;
    let length = path.length();
    let start = waypoints[0];
    let goal = *waypoints.last().expect("non-empty");

    let mut obstacles = Vec::new();
    let mut next_id = 1;
    for _ in 0..count(rng, cfg.n_static) {
        let omega = rng.random_range(0.0..=length);
        let radius = uniform(rng, cfg.static_radius);
        let side = heading_vector(path.path_angle(omega) + PI / 2.0);
        let offset = rng.random_range(-cfg.static_offset..=cfg.static_offset);
        let center = path.position(omega) + side * offset;
        obstacles.push(StaticObstacle {
            id: next_id,
            shape: Shape::Circle { center, radius },
        });
        next_id += 1;
    }
    let clear = |p: &Point, obs: &[StaticObstacle]| {
        obs.iter().all(|o| match &o.shape {
            Shape::Circle { center, radius } => (p - center).norm() > radius + cfg.clearance,
            _ => true,
        })
    };
    if !clear(&start, &obstacles) || !clear(&goal, &obstacles) {
        return None;
    }

    let mut targets = Vec::new();
    for _ in 0..count(rng, cfg.n_targets) {
        let omega = rng.random_range(0.2 * length..=0.9 * length);
        let speed = uniform(rng, cfg.target_speed);
        let tlen = uniform(rng, cfg.target_length);
        let gamma = path.path_angle(omega);
        let heading = if rng.random_bool(0.2) {
            // Following or opposing traffic along the path.
            let base = if rng.random_bool(0.5) {
                gamma
            } else {
                gamma + PI
            };
            base + rng.random_range(-0.25..=0.25)
        } else {
            let side = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            gamma + side * rng.random_range(PI / 6.0..=5.0 * PI / 6.0)
        };
        let velocity = heading_vector(heading) * speed;
        let t_cross = omega / cfg.nominal_speed;
        let position = path.position(omega) - velocity * t_cross;
        if (position - start).norm() <= tlen + cfg.clearance {
            return None;
        }
        targets.push(TargetVessel {
            id: next_id,
            length: tlen,
            width: tlen * cfg.target_width_ratio,
            motion: TargetMotion::Linear { position, velocity },
        });
        next_id += 1;
    }

    let spawn = match cfg.spawn {
        Spawn::Random {
            lateral: 0.0,
            heading: 0.0,
        } => Spawn::Fixed {
            pose: path_start_pose(&waypoints),
        },
        s => s,
    };
    Some(Scenario {
        name: format!("generated-{seed}"),
        waypoints,
        obstacles,
        targets,
        spawn,
        goal_radius: cfg.goal_radius,
        max_steps: cfg.max_steps,
        seed,
        bounds: None,
    })
}
