//! Scenario description: path, static obstacles, target vessels, spawn and
//! episode limits. Scenarios are stored as JSON.

use crate::geometry::{
    heading_vector, is_simple_ring, signed_area, wrap_angle, OrientedRect, Point,
};
use crate::guidance::build_path;
use crate::sensing::{Obstacle, ObstacleKind, Shape};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::fmt;
use std::path::Path;

fn default_goal_radius() -> f64 {
    100.0
}

fn default_max_steps() -> usize {
    10_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: String,
    pub waypoints: Vec<Point>,
    #[serde(default)]
    pub obstacles: Vec<StaticObstacle>,
    #[serde(default)]
    pub targets: Vec<TargetVessel>,
    pub spawn: Spawn,
    #[serde(default = "default_goal_radius")]
    pub goal_radius: f64,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
    #[serde(default)]
    pub seed: u64,
    /// World bounds; defaults to the waypoint bounding box grown by the
    /// environment's world margin.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<Bounds>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bounds {
    pub min: Point,
    pub max: Point,
}

impl Bounds {
    pub fn contains(&self, p: &Point) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn around(points: &[Point], margin: f64) -> Self {
        let mut min = Point::new(f64::INFINITY, f64::INFINITY);
        let mut max = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in points {
            min = min.inf(p);
            max = max.sup(p);
        }
        let m = Point::new(margin, margin);
        Self {
            min: min - m,
            max: max + m,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StaticObstacle {
    pub id: u32,
    pub shape: Shape,
}

impl StaticObstacle {
    pub fn to_obstacle(&self) -> Obstacle {
        Obstacle {
            id: self.id,
            shape: self.shape.clone(),
            kind: ObstacleKind::Static,
            velocity: Point::zeros(),
        }
    }

    pub fn intersects_hull(&self, hull: &OrientedRect) -> bool {
        match &self.shape {
            Shape::Circle { center, radius } => hull.intersects_circle(center, *radius),
            shape @ Shape::Polygon { .. } => hull.intersects_rings(&shape.rings()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetVessel {
    pub id: u32,
    pub length: f64,
    pub width: f64,
    pub motion: TargetMotion,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrackPoint {
    /// Seconds since scenario start.
    pub t: f64,
    pub position: Point,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TargetMotion {
    /// Constant NED velocity from `position` at t = 0.
    Linear { position: Point, velocity: Point },
    /// Piecewise-linear interpolation of recorded positions. The vessel is
    /// absent outside the recorded time span.
    Track { points: Vec<TrackPoint> },
}

/// Target vessel state at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetPose {
    pub id: u32,
    pub position: Point,
    pub heading: f64,
    pub velocity: Point,
}

impl TargetVessel {
    pub fn pose_at(&self, t: f64) -> Option<TargetPose> {
        let (position, velocity) = match &self.motion {
            TargetMotion::Linear { position, velocity } => (position + velocity * t, *velocity),
            TargetMotion::Track { points } => interpolate_track(points, t)?,
        };
        let heading = if velocity.norm() > 0.0 {
            velocity.y.atan2(velocity.x)
        } else {
            match &self.motion {
                TargetMotion::Track { points } if points.len() >= 2 => {
                    let d = points[points.len() - 1].position - points[0].position;
                    d.y.atan2(d.x)
                }
                _ => 0.0,
            }
        };
        Some(TargetPose {
            id: self.id,
            position,
            heading,
            velocity,
        })
    }

    pub fn hull_at(&self, t: f64) -> Option<OrientedRect> {
        self.pose_at(t).map(|p| OrientedRect {
            center: p.position,
            heading: p.heading,
            length: self.length,
            width: self.width,
        })
    }

    /// Sensor view of the target: a dynamic rectangular obstacle.
    pub fn obstacle_at(&self, t: f64) -> Option<Obstacle> {
        let pose = self.pose_at(t)?;
        let hull = self.hull_at(t)?;
        Some(Obstacle {
            id: self.id,
            shape: Shape::polygon(hull.corners().to_vec()),
            kind: ObstacleKind::Dynamic,
            velocity: pose.velocity,
        })
    }
}

/// Position and segment velocity at time `t`; exact at sample times.
pub fn interpolate_track(points: &[TrackPoint], t: f64) -> Option<(Point, Point)> {
    let first = points.first()?;
    let last = points.last()?;
    if t < first.t || t > last.t {
        return None;
    }
    if points.len() == 1 {
        return Some((first.position, Point::zeros()));
    }
    let k = points
        .partition_point(|p| p.t <= t)
        .clamp(1, points.len() - 1);
    let (a, b) = (&points[k - 1], &points[k]);
    let velocity = (b.position - a.position) / (b.t - a.t);
    if t == a.t {
        return Some((a.position, velocity));
    }
    if t == b.t {
        return Some((b.position, velocity));
    }
    let s = (t - a.t) / (b.t - a.t);
    Some((a.position + (b.position - a.position) * s, velocity))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pose {
    pub x_n: f64,
    pub y_n: f64,
    pub psi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Spawn {
    Fixed {
        pose: Pose,
    },
    /// At the path start, displaced sideways by up to `lateral` metres and
    /// rotated off the path direction by up to `heading` radians.
    Random {
        lateral: f64,
        heading: f64,
    },
}

impl Default for Spawn {
    fn default() -> Self {
        Spawn::Random {
            lateral: 0.0,
            heading: 0.0,
        }
    }
}

/// Spawn pose on the path start, heading along the path.
pub fn path_start_pose(waypoints: &[Point]) -> Pose {
    let d = waypoints[1] - waypoints[0];
    Pose {
        x_n: waypoints[0].x,
        y_n: waypoints[0].y,
        psi: d.y.atan2(d.x),
    }
}

/// Pose for a random spawn given two uniform samples in `[-1, 1]`.
pub fn random_spawn_pose(waypoints: &[Point], lateral: f64, heading: f64, a: f64, b: f64) -> Pose {
    let start = path_start_pose(waypoints);
    let side = heading_vector(start.psi + std::f64::consts::FRAC_PI_2);
    let p = Point::new(start.x_n, start.y_n) + side * (a * lateral);
    Pose {
        x_n: p.x,
        y_n: p.y,
        psi: wrap_angle(start.psi + b * heading),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationIssue {
    pub field: String,
    pub message: String,
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("cannot read scenario {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed scenario: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid scenario: {}", .0.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<ValidationIssue>),
    #[error("no valid spawn found after {0} attempts")]
    SpawnExhausted(usize),
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_json() + "\n")
    }

    pub fn bounds_or(&self, margin: f64) -> Bounds {
        self.bounds
            .unwrap_or_else(|| Bounds::around(&self.waypoints, margin))
    }

    /// Checks every scenario invariant that does not depend on the random
    /// spawn draw. `hull` gives the own-ship dimensions (length, width).
    pub fn validate(
        &self,
        hull: (f64, f64),
        fillet_radius: f64,
        margin: f64,
    ) -> Vec<ValidationIssue> {
        let mut issues = Vec::new();
        let mut push =
            |field: String, message: String| issues.push(ValidationIssue { field, message });

        if let Err(e) = build_path(&self.waypoints, fillet_radius) {
            push("waypoints".into(), e.to_string());
        }
        if !(self.goal_radius.is_finite() && self.goal_radius >= 0.0) {
            push(
                "goal_radius".into(),
                "must be finite and non-negative".into(),
            );
        }
        if self.max_steps == 0 {
            push("max_steps".into(), "must be positive".into());
        }
        let bounds = self.bounds_or(margin);
        if bounds.min.x >= bounds.max.x || bounds.min.y >= bounds.max.y {
            push("bounds".into(), "min must be strictly below max".into());
        }
        for (i, end) in [self.waypoints.first(), self.waypoints.last()]
            .iter()
            .enumerate()
        {
            if let Some(p) = end {
                if !bounds.contains(p) {
                    let which = if i == 0 { "first" } else { "last" };
                    push(
                        "waypoints".into(),
                        format!("{which} waypoint outside world bounds"),
                    );
                }
            }
        }

        let mut ids = HashSet::new();
        for (k, ob) in self.obstacles.iter().enumerate() {
            let field = format!("obstacles[{k}]");
            if !ids.insert(ob.id) {
                push(format!("{field}.id"), format!("duplicate id {}", ob.id));
            }
            match &ob.shape {
                Shape::Circle { center, radius } => {
                    if !(radius.is_finite() && *radius > 0.0)
                        || !center.iter().all(|v| v.is_finite())
                    {
                        push(
                            format!("{field}.shape"),
                            "circle needs a finite centre and positive radius".into(),
                        );
                    }
                }
                Shape::Polygon { exterior, holes } => {
                    for (r, ring) in std::iter::once(exterior).chain(holes).enumerate() {
                        let name = if r == 0 {
                            "exterior".to_string()
                        } else {
                            format!("holes[{}]", r - 1)
                        };
                        if ring.len() < 3 || !is_simple_ring(ring) || signed_area(ring).abs() <= 0.0
                        {
                            push(
                                format!("{field}.shape.{name}"),
                                "polygon must be simple with at least 3 vertices and non-zero area"
                                    .into(),
                            );
                        }
                    }
                }
            }
        }
        for (k, tv) in self.targets.iter().enumerate() {
            let field = format!("targets[{k}]");
            if !ids.insert(tv.id) {
                push(format!("{field}.id"), format!("duplicate id {}", tv.id));
            }
            if !(tv.length > 0.0 && tv.width > 0.0) {
                push(field.clone(), "length and width must be positive".into());
            }
            if let TargetMotion::Track { points } = &tv.motion {
                if points.is_empty() {
                    push(format!("{field}.motion.points"), "track is empty".into());
                }
                if let Some(j) = points.windows(2).position(|w| w[1].t <= w[0].t) {
                    push(
                        format!("{field}.motion.points[{}]", j + 1),
                        "timestamps must strictly increase".into(),
                    );
                }
            }
        }

        match self.spawn {
            Spawn::Fixed { pose } => {
                let hull = OrientedRect {
                    center: Point::new(pose.x_n, pose.y_n),
                    heading: pose.psi,
                    length: hull.0,
                    width: hull.1,
                };
                for ob in &self.obstacles {
                    if ob.intersects_hull(&hull) {
                        push("spawn".into(), format!("spawn inside obstacle {}", ob.id));
                    }
                }
                for tv in &self.targets {
                    if tv.hull_at(0.0).is_some_and(|h| hull.intersects_rect(&h)) {
                        push(
                            "spawn".into(),
                            format!("spawn inside target vessel {}", tv.id),
                        );
                    }
                }
                if !bounds.contains(&hull.center) {
                    push("spawn".into(), "spawn outside world bounds".into());
                }
            }
            Spawn::Random { lateral, heading } => {
                if !(lateral >= 0.0 && heading >= 0.0 && lateral.is_finite() && heading.is_finite())
                {
                    push(
                        "spawn".into(),
                        "random spawn ranges must be finite and non-negative".into(),
                    );
                }
            }
        }
        issues
    }
}
