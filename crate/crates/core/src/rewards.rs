//! Reward shaping: path following, static and dynamic obstacle penalties with
//! COLREGs sector weighting, and the λ blend between the two objectives.

use crate::guidance::NavFeatures;
use crate::sensing::SensorFrame;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

/// Exponent clamp for the dynamic raw penalty.
pub const MAX_EXPONENT: f64 = 50.0;

const SECTOR_EDGE: f64 = 112.5 * PI / 180.0;

#[derive(Debug, Error, PartialEq)]
pub enum RewardConfigError {
    #[error("reward parameter `{0}` must be finite")]
    NonFinite(&'static str),
    #[error("distance scalings must satisfy gamma_x_stb < gamma_x_port <= gamma_x_stern")]
    SectorOrdering,
    #[error("`{0}` must be negative")]
    NotNegative(&'static str),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardConfig {
    /// Cross-track error scaling (1/m).
    #[serde(alias = "gamma_eps")]
    pub gamma_e: f64,
    pub gamma_r: f64,
    pub alpha_x: f64,
    pub gamma_theta_stat: f64,
    pub gamma_theta_dyn: f64,
    /// Static obstacle distance scaling (1/m).
    pub gamma_x: f64,
    pub gamma_v_stb_pos: f64,
    pub gamma_v_stb_neg: f64,
    pub gamma_v_port_pos: f64,
    pub gamma_v_port_neg: f64,
    pub gamma_v_stern_pos: f64,
    pub gamma_v_stern_neg: f64,
    pub gamma_x_stb: f64,
    pub gamma_x_port: f64,
    pub gamma_x_stern: f64,
    pub alpha_lambda_pos: f64,
    pub alpha_lambda_neg: f64,
    pub gamma_lambda_pos: f64,
    pub gamma_lambda_neg: f64,
    #[serde(alias = "r_collision")]
    pub r_coll: f64,
    pub r_exists: f64,
}

impl Default for RewardConfig {
    fn default() -> Self {
        Self {
            gamma_e: 0.5,
            gamma_r: 0.1,
            alpha_x: 75.0,
            gamma_theta_stat: 10.0,
            gamma_theta_dyn: 1.0,
            gamma_x: 0.01,
            gamma_v_stb_pos: 0.004,
            gamma_v_stb_neg: 0.05,
            gamma_v_port_pos: 0.007,
            gamma_v_port_neg: 0.005,
            gamma_v_stern_pos: 0.007,
            gamma_v_stern_neg: 0.005,
            gamma_x_stb: 0.007,
            gamma_x_port: 0.009,
            gamma_x_stern: 0.01,
            alpha_lambda_pos: 4.0,
            alpha_lambda_neg: 2.0,
            gamma_lambda_pos: 0.003,
            gamma_lambda_neg: 0.005,
            r_coll: -10000.0,
            r_exists: -1.0,
        }
    }
}

impl RewardConfig {
    pub fn validate(&self) -> Result<(), RewardConfigError> {
        let fields = [
            ("gamma_e", self.gamma_e),
            ("gamma_r", self.gamma_r),
            ("alpha_x", self.alpha_x),
            ("gamma_theta_stat", self.gamma_theta_stat),
            ("gamma_theta_dyn", self.gamma_theta_dyn),
            ("gamma_x", self.gamma_x),
            ("gamma_v_stb_pos", self.gamma_v_stb_pos),
            ("gamma_v_stb_neg", self.gamma_v_stb_neg),
            ("gamma_v_port_pos", self.gamma_v_port_pos),
            ("gamma_v_port_neg", self.gamma_v_port_neg),
            ("gamma_v_stern_pos", self.gamma_v_stern_pos),
            ("gamma_v_stern_neg", self.gamma_v_stern_neg),
            ("gamma_x_stb", self.gamma_x_stb),
            ("gamma_x_port", self.gamma_x_port),
            ("gamma_x_stern", self.gamma_x_stern),
            ("alpha_lambda_pos", self.alpha_lambda_pos),
            ("alpha_lambda_neg", self.alpha_lambda_neg),
            ("gamma_lambda_pos", self.gamma_lambda_pos),
            ("gamma_lambda_neg", self.gamma_lambda_neg),
            ("r_coll", self.r_coll),
            ("r_exists", self.r_exists),
        ];
        if let Some((name, _)) = fields.iter().find(|(_, v)| !v.is_finite()) {
            return Err(RewardConfigError::NonFinite(name));
        }
        if !(self.gamma_x_stb < self.gamma_x_port && self.gamma_x_port <= self.gamma_x_stern) {
            return Err(RewardConfigError::SectorOrdering);
        }
        if self.r_coll >= 0.0 {
            return Err(RewardConfigError::NotNegative("r_coll"));
        }
        if self.r_exists >= 0.0 {
            return Err(RewardConfigError::NotNegative("r_exists"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColregsSector {
    Starboard,
    Port,
    Stern,
}

/// Sector of a body-relative angle: starboard `[0, 112.5°)`, port
/// `[-112.5°, 0)`, stern otherwise.
pub fn colregs_sector(theta: f64) -> ColregsSector {
    if (0.0..SECTOR_EDGE).contains(&theta) {
        ColregsSector::Starboard
    } else if (-SECTOR_EDGE..0.0).contains(&theta) {
        ColregsSector::Port
    } else {
        ColregsSector::Stern
    }
}

pub fn path_reward(nav: &NavFeatures, u_max: f64, cfg: &RewardConfig) -> f64 {
    let g = cfg.gamma_r;
    let velocity = nav.u / u_max * nav.heading_error.cos() + g;
    let cte = (-cfg.gamma_e * nav.cross_track_error.abs()).exp() + g;
    velocity * cte - g * g
}

pub fn static_weight(theta: f64, cfg: &RewardConfig) -> f64 {
    1.0 / (1.0 + cfg.gamma_theta_stat * theta.abs())
}

pub fn static_penalty(x: f64, theta: f64, cfg: &RewardConfig) -> f64 {
    -static_weight(theta, cfg) * cfg.alpha_x * (-cfg.gamma_x * x).exp()
}

pub fn dynamic_weight(theta: f64, cfg: &RewardConfig) -> f64 {
    1.0 / (1.0 + (cfg.gamma_theta_dyn * theta.abs()).exp())
}

pub fn zeta_x(theta: f64, cfg: &RewardConfig) -> f64 {
    match colregs_sector(theta) {
        ColregsSector::Starboard => cfg.gamma_x_stb,
        ColregsSector::Port => cfg.gamma_x_port,
        ColregsSector::Stern => cfg.gamma_x_stern,
    }
}

pub fn zeta_v(theta: f64, v_y: f64, cfg: &RewardConfig) -> f64 {
    let approaching = v_y >= 0.0;
    match (colregs_sector(theta), approaching) {
        (ColregsSector::Starboard, true) => cfg.gamma_v_stb_pos,
        (ColregsSector::Starboard, false) => cfg.gamma_v_stb_neg,
        (ColregsSector::Port, true) => cfg.gamma_v_port_pos,
        (ColregsSector::Port, false) => cfg.gamma_v_port_neg,
        (ColregsSector::Stern, true) => cfg.gamma_v_stern_pos,
        (ColregsSector::Stern, false) => cfg.gamma_v_stern_neg,
    }
}

/// Unweighted dynamic penalty `alpha_x * exp((zeta_v v_y - zeta_x) x)`, with
/// the exponent clamped to `[-50, 50]`.
pub fn dynamic_raw_penalty(x: f64, theta: f64, v_y: f64, cfg: &RewardConfig) -> f64 {
    let exponent = (zeta_v(theta, v_y, cfg) * v_y - zeta_x(theta, cfg)) * x;
    cfg.alpha_x * exponent.clamp(-MAX_EXPONENT, MAX_EXPONENT).exp()
}

pub fn dynamic_penalty(x: f64, theta: f64, v_y: f64, cfg: &RewardConfig) -> f64 {
    -dynamic_weight(theta, cfg) * dynamic_raw_penalty(x, theta, v_y, cfg)
}

pub fn lambda_i(x: f64, v_y: f64, cfg: &RewardConfig) -> f64 {
    let (alpha, gamma) = if v_y >= 0.0 {
        (cfg.alpha_lambda_pos, cfg.gamma_lambda_pos)
    } else {
        (cfg.alpha_lambda_neg, cfg.gamma_lambda_neg)
    };
    1.0 / (1.0 + (-gamma * x + alpha).exp())
}

/// One ray as seen by the reward system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayReading {
    pub distance: f64,
    pub angle: f64,
    pub dynamic: bool,
    pub approach_speed: f64,
}

pub fn readings(frame: &SensorFrame) -> Vec<RayReading> {
    (0..frame.distances.len())
        .map(|i| RayReading {
            distance: frame.distances[i],
            angle: frame.angles[i],
            dynamic: frame.dynamic_hit[i],
            approach_speed: frame.ray_approach_speed[i],
        })
        .collect()
}

/// Weighted-average static penalty. Rays that hit a dynamic obstacle enter at
/// `max_range`.
pub fn static_colav_reward(rays: &[RayReading], max_range: f64, cfg: &RewardConfig) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for ray in rays {
        let x = if ray.dynamic { max_range } else { ray.distance };
        let w = static_weight(ray.angle, cfg);
        num += w * cfg.alpha_x * (-cfg.gamma_x * x).exp();
        den += w;
    }
    if den == 0.0 {
        0.0
    } else {
        -num / den
    }
}

/// Weighted-average dynamic penalty and `min_i lambda_i`. Rays without a
/// dynamic hit enter at `max_range` with zero approach speed.
pub fn dynamic_colav_reward(rays: &[RayReading], max_range: f64, cfg: &RewardConfig) -> (f64, f64) {
    let (mut num, mut den) = (0.0, 0.0);
    let mut lambda_min = f64::INFINITY;
    for ray in rays {
        let (x, v_y) = if ray.dynamic {
            (ray.distance, ray.approach_speed)
        } else {
            (max_range, 0.0)
        };
        let lambda = lambda_i(x, v_y, cfg);
        lambda_min = lambda_min.min(lambda);
        let w = dynamic_weight(ray.angle, cfg);
        num += (1.0 - lambda) * w * dynamic_raw_penalty(x, ray.angle, v_y, cfg);
        den += w;
    }
    if rays.is_empty() {
        return (0.0, 1.0);
    }
    (-num / den, lambda_min)
}

/// Per-term breakdown of one step's reward.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RewardTerms {
    pub path: f64,
    pub lambda: f64,
    pub colav_stat: f64,
    pub colav_dyn: f64,
    pub exists: f64,
    pub collision: bool,
    pub total: f64,
}

pub fn total_reward_from_rays(
    nav: &NavFeatures,
    rays: &[RayReading],
    max_range: f64,
    u_max: f64,
    collided: bool,
    cfg: &RewardConfig,
) -> RewardTerms {
    let path = path_reward(nav, u_max, cfg);
    let colav_stat = static_colav_reward(rays, max_range, cfg);
    let (colav_dyn, lambda) = dynamic_colav_reward(rays, max_range, cfg);
    let total = if collided {
        cfg.r_coll
    } else {
        lambda * path + colav_stat + colav_dyn + cfg.r_exists
    };
    RewardTerms {
        path,
        lambda,
        colav_stat,
        colav_dyn,
        exists: cfg.r_exists,
        collision: collided,
        total,
    }
}

pub fn total_reward(
    nav: &NavFeatures,
    frame: &SensorFrame,
    u_max: f64,
    collided: bool,
    cfg: &RewardConfig,
) -> RewardTerms {
    total_reward_from_rays(nav, &readings(frame), frame.max_range, u_max, collided, cfg)
}
