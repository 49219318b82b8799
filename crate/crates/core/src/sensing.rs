//! Rangefinder suite: ray casting, sector partitioning, distance pooling,
//! closeness mapping and per-sector velocity decomposition.
//!
//! Ray `i` points at body-relative angle `theta_i = -pi + i * 2pi / N`
//! (positive towards starboard), so ray 0 looks astern and ray `N/2` dead
//! ahead. Distances are measured from the vessel origin.

use crate::dynamics::VesselState;
use crate::geometry::{
    heading_vector, point_in_rings, point_segment_distance, ray_circle, ray_segment, Point,
};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SensorConfigError {
    #[error("need n_sensors >= n_sectors >= 1 (got {n_sensors} sensors, {n_sectors} sectors)")]
    Counts { n_sensors: usize, n_sectors: usize },
    #[error("max_range must be positive and finite, got {0}")]
    Range(f64),
    #[error("gamma_c must be finite, got {0}")]
    Gamma(f64),
    #[error("sector map is not surjective for gamma_c = {gamma_c}: sectors {missing:?} receive no sensors")]
    NotSurjective { gamma_c: f64, missing: Vec<usize> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ObstacleKind {
    #[default]
    Static,
    Dynamic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Shape {
    Circle {
        center: Point,
        radius: f64,
    },
    /// Simple polygon; `holes` (if any) are evaluated with the even-odd rule.
    Polygon {
        exterior: Vec<Point>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        holes: Vec<Vec<Point>>,
    },
}

impl Shape {
    pub fn polygon(exterior: Vec<Point>) -> Self {
        Shape::Polygon {
            exterior,
            holes: Vec::new(),
        }
    }

    pub fn contains(&self, p: &Point) -> bool {
        match self {
            Shape::Circle { center, radius } => (p - center).norm() <= *radius,
            Shape::Polygon { exterior, holes } => {
                let mut rings = Vec::with_capacity(1 + holes.len());
                rings.push(exterior.clone());
                rings.extend(holes.iter().cloned());
                point_in_rings(p, &rings)
            }
        }
    }

    pub fn rings(&self) -> Vec<Vec<Point>> {
        match self {
            Shape::Circle { .. } => Vec::new(),
            Shape::Polygon { exterior, holes } => std::iter::once(exterior.clone())
                .chain(holes.iter().cloned())
                .collect(),
        }
    }

    /// Smallest distance from `p` to the shape boundary.
    pub fn boundary_distance(&self, p: &Point) -> f64 {
        match self {
            Shape::Circle { center, radius } => ((p - center).norm() - radius).abs(),
            Shape::Polygon { exterior, holes } => std::iter::once(exterior)
                .chain(holes)
                .flat_map(|r| (0..r.len()).map(move |i| (r[i], r[(i + 1) % r.len()])))
                .map(|(a, b)| point_segment_distance(p, &a, &b))
                .fold(f64::INFINITY, f64::min),
        }
    }
}

/// An obstacle as seen by the sensors at one instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Obstacle {
    pub id: u32,
    pub shape: Shape,
    #[serde(default)]
    pub kind: ObstacleKind,
    /// NED velocity (m/s); zero for static obstacles.
    #[serde(default = "Point::zeros")]
    pub velocity: Point,
}

impl Obstacle {
    pub fn circle(id: u32, center: Point, radius: f64) -> Self {
        Self {
            id,
            shape: Shape::Circle { center, radius },
            kind: ObstacleKind::Static,
            velocity: Point::zeros(),
        }
    }

    pub fn is_dynamic(&self) -> bool {
        self.kind == ObstacleKind::Dynamic
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Pooling {
    Min,
    Max,
    #[default]
    Feasibility,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensorConfig {
    pub n_sensors: usize,
    /// Maximum detection range S_r (m).
    pub max_range: f64,
    pub n_sectors: usize,
    /// Sector density parameter; larger values concentrate sectors ahead.
    pub gamma_c: f64,
    pub pooling: Pooling,
}

impl Default for SensorConfig {
    fn default() -> Self {
        Self {
            n_sensors: 180,
            max_range: 1500.0,
            n_sectors: 9,
            gamma_c: 13.0,
            pooling: Pooling::Feasibility,
        }
    }
}

impl SensorConfig {
    /// Angle between neighbouring rays.
    pub fn angle_step(&self) -> f64 {
        2.0 * PI / self.n_sensors as f64
    }

    pub fn ray_angle(&self, i: usize) -> f64 {
        -PI + i as f64 * self.angle_step()
    }

    /// Validates the configuration and precomputes the sector layout.
    pub fn build(&self) -> Result<SensorSuite, SensorConfigError> {
        let (n, d) = (self.n_sensors, self.n_sectors);
        if d < 1 || n < d {
            return Err(SensorConfigError::Counts {
                n_sensors: n,
                n_sectors: d,
            });
        }
        if !(self.max_range.is_finite() && self.max_range > 0.0) {
            return Err(SensorConfigError::Range(self.max_range));
        }
        if !self.gamma_c.is_finite() {
            return Err(SensorConfigError::Gamma(self.gamma_c));
        }
        let sector_of: Vec<usize> = (0..n).map(|i| sector_of(i, self)).collect();
        let mut ranges = vec![(usize::MAX, 0usize); d];
        for (i, &k) in sector_of.iter().enumerate() {
            ranges[k].0 = ranges[k].0.min(i);
            ranges[k].1 = ranges[k].1.max(i);
        }
        let missing: Vec<usize> = (0..d).filter(|&k| ranges[k].0 == usize::MAX).collect();
        if !missing.is_empty() {
            return Err(SensorConfigError::NotSurjective {
                gamma_c: self.gamma_c,
                missing,
            });
        }
        let centers = ranges
            .iter()
            .map(|&(a, b)| 0.5 * (self.ray_angle(a) + self.ray_angle(b)))
            .collect();
        Ok(SensorSuite {
            config: self.clone(),
            angles: (0..n).map(|i| self.ray_angle(i)).collect(),
            sector_of,
            sector_ranges: ranges.into_iter().map(|(a, b)| (a, b + 1)).collect(),
            sector_centers: centers,
        })
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Sector index of sensor `i`: a logistic partition that is finest ahead.
pub fn sector_of(i: usize, cfg: &SensorConfig) -> usize {
    let d = cfg.n_sectors as f64;
    let g = cfg.gamma_c;
    let x = g * i as f64 / cfg.n_sensors as f64 - 0.5 * g;
    let k = (d * sigmoid(x) - d * sigmoid(-0.5 * g)).floor();
    (k.max(0.0) as usize).min(cfg.n_sectors - 1)
}

/// Validated sensor configuration with the sector layout precomputed.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorSuite {
    pub config: SensorConfig,
    /// Body-relative ray angles.
    pub angles: Vec<f64>,
    pub sector_of: Vec<usize>,
    /// Half-open ray index range of each sector.
    pub sector_ranges: Vec<(usize, usize)>,
    /// Body-relative angle of each sector's center line.
    pub sector_centers: Vec<f64>,
}

impl SensorSuite {
    pub fn n_sensors(&self) -> usize {
        self.config.n_sensors
    }

    pub fn n_sectors(&self) -> usize {
        self.config.n_sectors
    }

    pub fn max_range(&self) -> f64 {
        self.config.max_range
    }

    /// Length of the perception feature vector.
    pub fn perception_dim(&self) -> usize {
        3 * self.n_sectors()
    }
}

/// Raw ray measurements.
#[derive(Debug, Clone, PartialEq)]
pub struct RayScan {
    pub distances: Vec<f64>,
    /// Index into the obstacle slice of the nearest hit, if any.
    pub hits: Vec<Option<usize>>,
}

/// Casts all rays of the suite from the vessel origin. Obstacles entirely out
/// of range are culled; a vessel origin inside an obstacle reads 0 on every ray.
pub fn cast_rays(pose: &VesselState, obstacles: &[Obstacle], suite: &SensorSuite) -> RayScan {
    let n = suite.n_sensors();
    let range = suite.max_range();
    let origin = pose.position();
    let mut distances = vec![range; n];
    let mut hits = vec![None; n];
    let dirs: Vec<Point> = suite
        .angles
        .iter()
        .map(|a| heading_vector(pose.psi + a))
        .collect();

    let mut record = |i: usize, t: f64, idx: usize| {
        if t < distances[i] {
            distances[i] = t;
            hits[i] = Some(idx);
        }
    };

    for (idx, obs) in obstacles.iter().enumerate() {
        match &obs.shape {
            Shape::Circle { center, radius } => {
                if (center - origin).norm() - radius > range {
                    continue;
                }
                for (i, dir) in dirs.iter().enumerate() {
                    if let Some(t) = ray_circle(&origin, dir, center, *radius) {
                        record(i, t, idx);
                    }
                }
            }
            shape @ Shape::Polygon { exterior, holes } => {
                if shape.contains(&origin) {
                    for i in 0..n {
                        record(i, 0.0, idx);
                    }
                    continue;
                }
                let near_edges: Vec<(Point, Point)> = std::iter::once(exterior)
                    .chain(holes)
                    .flat_map(|r| (0..r.len()).map(move |i| (r[i], r[(i + 1) % r.len()])))
                    .filter(|(a, b)| point_segment_distance(&origin, a, b) <= range)
                    .collect();
                if near_edges.is_empty() {
                    continue;
                }
                for (i, dir) in dirs.iter().enumerate() {
                    for (a, b) in &near_edges {
                        if let Some(t) = ray_segment(&origin, dir, a, b) {
                            record(i, t, idx);
                        }
                    }
                }
            }
        }
    }
    RayScan { distances, hits }
}

pub fn pool_min(measurements: &[f64]) -> f64 {
    measurements.iter().copied().fold(f64::INFINITY, f64::min)
}

pub fn pool_max(measurements: &[f64]) -> f64 {
    measurements
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Largest distance a vessel of width `width` can feasibly reach within a
/// sector. Distance levels are visited in ascending order and the first level
/// whose widest opening is no wider than the vessel is returned; if every
/// level admits an opening, the sector maximum is returned.
pub fn pool_feasibility(measurements: &[f64], theta: f64, width: f64) -> f64 {
    let mut order: Vec<usize> = (0..measurements.len()).collect();
    order.sort_by(|&a, &b| measurements[a].total_cmp(&measurements[b]).then(a.cmp(&b)));
    let mut prev_level = f64::NAN;
    for &i in &order {
        let level = measurements[i];
        // Equal levels produce identical scans.
        if level == prev_level {
            continue;
        }
        prev_level = level;
        let arc = theta * level;
        let mut opening = arc / 2.0;
        let mut passable = false;
        for &x in measurements {
            if x > level {
                opening += arc;
                if opening > width {
                    passable = true;
                    break;
                }
            } else {
                opening += arc / 2.0;
                if opening > width {
                    passable = true;
                    break;
                }
                opening = 0.0;
            }
        }
        if !passable {
            return level;
        }
    }
    pool_max(measurements)
}

/// Logarithmic closeness: 1 at contact, 0 at or beyond `max_range`.
pub fn closeness(distance: f64, max_range: f64) -> f64 {
    (1.0 - (distance + 1.0).ln() / (max_range + 1.0).ln()).clamp(0.0, 1.0)
}

/// Expresses an NED velocity in the frame of sector `sector`: `y` runs along
/// the sector center line towards the vessel (approach is positive) and `x`
/// completes a right-handed frame with the down axis.
pub fn decompose_velocity(
    velocity: &Point,
    sector: usize,
    pose: &VesselState,
    suite: &SensorSuite,
) -> (f64, f64) {
    let bearing = pose.psi + suite.sector_centers[sector];
    decompose_along(velocity, bearing)
}

/// Same as [`decompose_velocity`] for an arbitrary NED bearing.
pub fn decompose_along(velocity: &Point, bearing: f64) -> (f64, f64) {
    let y_axis = -heading_vector(bearing);
    let x_axis = Point::new(y_axis.y, -y_axis.x);
    (velocity.dot(&x_axis), velocity.dot(&y_axis))
}

/// Everything the perception pipeline produces for one step.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorFrame {
    pub distances: Vec<f64>,
    pub hits: Vec<Option<usize>>,
    /// Obstacle id of each ray hit.
    pub hit_ids: Vec<Option<u32>>,
    /// Body-relative ray angles.
    pub angles: Vec<f64>,
    /// True where the ray's nearest hit is a dynamic obstacle.
    pub dynamic_hit: Vec<bool>,
    /// Velocity component towards the vessel along each ray (0 without a
    /// dynamic hit).
    pub ray_approach_speed: Vec<f64>,
    pub sector_distances: Vec<f64>,
    pub sector_closeness: Vec<f64>,
    pub sector_velocities: Vec<(f64, f64)>,
    pub max_range: f64,
}

/// Runs the full perception pipeline against an obstacle snapshot.
pub fn sense(
    pose: &VesselState,
    obstacles: &[Obstacle],
    suite: &SensorSuite,
    vessel_width: f64,
) -> SensorFrame {
    let scan = cast_rays(pose, obstacles, suite);
    let theta = suite.config.angle_step();
    let range = suite.max_range();

    let sector_distances: Vec<f64> = suite
        .sector_ranges
        .iter()
        .map(|&(a, b)| {
            let w = &scan.distances[a..b];
            match suite.config.pooling {
                Pooling::Min => pool_min(w),
                Pooling::Max => pool_max(w),
                Pooling::Feasibility => pool_feasibility(w, theta, vessel_width),
            }
        })
        .collect();
    let sector_closeness = sector_distances
        .iter()
        .map(|&d| closeness(d, range))
        .collect();

    let n = suite.n_sensors();
    let mut dynamic_hit = vec![false; n];
    let mut ray_approach_speed = vec![0.0; n];
    // Nearest ray per dynamic obstacle: (distance, ray index).
    let mut nearest: Vec<Option<(f64, usize)>> = vec![None; obstacles.len()];
    for i in 0..n {
        let Some(idx) = scan.hits[i] else { continue };
        let obs = &obstacles[idx];
        if !obs.is_dynamic() {
            continue;
        }
        dynamic_hit[i] = true;
        ray_approach_speed[i] = decompose_along(&obs.velocity, pose.psi + suite.angles[i]).1;
        let d = scan.distances[i];
        if nearest[idx].is_none_or(|(best, _)| d < best) {
            nearest[idx] = Some((d, i));
        }
    }
    let mut closest_in_sector: Vec<Option<(f64, usize)>> = vec![None; suite.n_sectors()];
    for (idx, entry) in nearest.iter().enumerate() {
        let Some((d, ray)) = *entry else { continue };
        let k = suite.sector_of[ray];
        if closest_in_sector[k].is_none_or(|(best, _)| d < best) {
            closest_in_sector[k] = Some((d, idx));
        }
    }
    let sector_velocities = closest_in_sector
        .iter()
        .enumerate()
        .map(|(k, c)| match c {
            Some((_, idx)) => decompose_velocity(&obstacles[*idx].velocity, k, pose, suite),
            None => (0.0, 0.0),
        })
        .collect();

    SensorFrame {
        hit_ids: scan
            .hits
            .iter()
            .map(|h| h.map(|i| obstacles[i].id))
            .collect(),
        distances: scan.distances,
        hits: scan.hits,
        angles: suite.angles.clone(),
        dynamic_hit,
        ray_approach_speed,
        sector_distances,
        sector_closeness,
        sector_velocities,
        max_range: range,
    }
}

/// `[c_1, v_x1, v_y1, ..., c_D, v_xD, v_yD]`.
pub fn perception_vector(frame: &SensorFrame) -> Vec<f64> {
    frame
        .sector_closeness
        .iter()
        .zip(&frame.sector_velocities)
        .flat_map(|(&c, &(vx, vy))| [c, vx, vy])
        .collect()
}
