//! Geometric COLREGs encounter classification between own-ship and a target.

use crate::dynamics::VesselState;
use crate::geometry::wrap_angle;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Encounter {
    HeadOn,
    CrossingFromStarboard,
    CrossingFromPort,
    Overtaking,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EncounterConfig {
    /// Targets further away than this are not classified (m).
    pub range: f64,
    /// Half-width of the head-on bearing window (deg).
    pub head_on_bearing_deg: f64,
    /// Tolerance on reciprocal headings (deg).
    pub reciprocal_tolerance_deg: f64,
    /// Edge of the stern sector (deg).
    pub stern_sector_deg: f64,
}

impl Default for EncounterConfig {
    fn default() -> Self {
        Self {
            range: 3000.0,
            head_on_bearing_deg: 22.5,
            reciprocal_tolerance_deg: 10.0,
            stern_sector_deg: 112.5,
        }
    }
}

/// Classifies the situation from the own-ship's point of view. Target
/// velocity is taken from its body-frame `u`, `v` and heading.
pub fn classify_encounter(
    own: &VesselState,
    target: &VesselState,
    cfg: &EncounterConfig,
) -> Encounter {
    let d = target.position() - own.position();
    if d.norm() > cfg.range || d.norm() == 0.0 {
        return Encounter::None;
    }
    let bearing = wrap_angle(d.y.atan2(d.x) - own.psi);
    let reciprocal =
        wrap_angle(target.psi - own.psi - PI).abs() <= cfg.reciprocal_tolerance_deg.to_radians();
    let relative_velocity = target.ned_velocity() - own.ned_velocity();
    let closing = relative_velocity.dot(&d) < 0.0;

    if bearing.abs() <= cfg.head_on_bearing_deg.to_radians() && reciprocal {
        return Encounter::HeadOn;
    }
    let stern = cfg.stern_sector_deg.to_radians();
    // Bearing of own-ship as seen from the target.
    let from_target = wrap_angle((-d.y).atan2(-d.x) - target.psi);
    if from_target.abs() > stern && closing {
        return Encounter::Overtaking;
    }
    if !closing {
        return Encounter::None;
    }
    if bearing >= 0.0 && bearing < stern {
        Encounter::CrossingFromStarboard
    } else if bearing < 0.0 && bearing > -stern {
        Encounter::CrossingFromPort
    } else {
        Encounter::None
    }
}
