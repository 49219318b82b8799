//! Real-world scenarios: terrain polygons as static obstacles and recorded
//! AIS tracks as target vessels.

use super::ais::AisTrack;
use crate::env::scenario::{
    interpolate_track, path_start_pose, Bounds, Scenario, Spawn, StaticObstacle, TargetMotion,
    TargetVessel, TrackPoint,
};
use crate::geometry::{point_in_rings, segments_intersect, Point};
use crate::sensing::Shape;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReplayError {
    #[error("path needs at least two waypoints")]
    TooFewWaypoints,
    #[error("time window [{0}, {1}] is empty")]
    Window(f64, f64),
    #[error("path crosses land at waypoint {index} ({x:.1}, {y:.1})")]
    Land { index: usize, x: f64, y: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReplayOptions {
    /// AIS carries no reliable hull size; every target gets these.
    pub target_length: f64,
    pub target_width: f64,
    /// Distance from the path bounding box to the world edge, metres.
    pub margin: f64,
    pub goal_radius: f64,
    pub max_steps: usize,
}

impl Default for ReplayOptions {
    fn default() -> Self {
        Self {
            target_length: 50.0,
            target_width: 10.0,
            margin: 1500.0,
            goal_radius: 100.0,
            max_steps: 10_000,
        }
    }
}

/// Index of the first waypoint that lies on land or ends a leg crossing land.
pub fn first_land_waypoint(waypoints: &[Point], land: &[Shape]) -> Option<usize> {
    let all: Vec<Vec<Vec<Point>>> = land.iter().map(Shape::rings).collect();
    (0..waypoints.len()).find(|&k| {
        let p = &waypoints[k];
        if all.iter().any(|r| point_in_rings(p, r)) {
            return true;
        }
        k > 0
            && all.iter().flatten().any(|ring| {
                (0..ring.len()).any(|i| {
                    segments_intersect(&waypoints[k - 1], p, &ring[i], &ring[(i + 1) % ring.len()])
                })
            })
    })
}

fn shape_bbox(shape: &Shape) -> Bounds {
    match shape {
        Shape::Circle { center, radius } => Bounds::around(&[*center], *radius),
        Shape::Polygon { exterior, .. } => Bounds::around(exterior, 0.0),
    }
}

fn overlaps(a: &Bounds, b: &Bounds) -> bool {
    a.min.x <= b.max.x && b.min.x <= a.max.x && a.min.y <= b.max.y && b.min.y <= a.max.y
}

fn translate(shape: &Shape, origin: &Point) -> Shape {
    match shape {
        Shape::Circle { center, radius } => Shape::Circle {
            center: center - origin,
            radius: *radius,
        },
        Shape::Polygon { exterior, holes } => Shape::Polygon {
            exterior: exterior.iter().map(|p| p - origin).collect(),
            holes: holes
                .iter()
                .map(|h| h.iter().map(|p| p - origin).collect())
                .collect(),
        },
    }
}

/// Track samples inside `window`, with exact interpolated end points, shifted
/// so the window starts at t = 0.
fn clip_track(track: &AisTrack, (t0, t1): (f64, f64), origin: &Point) -> Vec<TrackPoint> {
    let raw: Vec<TrackPoint> = track
        .points
        .iter()
        .map(|p| TrackPoint {
            t: p.t,
            position: p.position,
        })
        .collect();
    let mut out = Vec::new();
    let mut push = |t: f64, position: Point| {
        if out.last().is_none_or(|q: &TrackPoint| t > q.t) {
            out.push(TrackPoint {
                t: t - t0,
                position: position - origin,
            });
        }
    };
    if let Some((p, _)) = interpolate_track(&raw, t0) {
        push(t0, p);
    }
    for p in raw.iter().filter(|p| p.t > t0 && p.t < t1) {
        push(p.t, p.position);
    }
    if let Some((p, _)) = interpolate_track(&raw, t1) {
        push(t1, p);
    }
    out
}

/// Builds a replay scenario in a local frame centred on `origin` (absolute
/// NED zone-33 coordinates). `waypoints` and `land` are absolute as well.
pub fn build_replay_scenario(
    name: &str,
    land: &[Shape],
    tracks: &[AisTrack],
    waypoints: &[Point],
    window: (f64, f64),
    origin: Point,
    opts: &ReplayOptions,
) -> Result<Scenario, ReplayError> {
    if waypoints.len() < 2 {
        return Err(ReplayError::TooFewWaypoints);
    }
    if !(window.1 > window.0) {
        return Err(ReplayError::Window(window.0, window.1));
    }
    if let Some(index) = first_land_waypoint(waypoints, land) {
        let p = waypoints[index];
        return Err(ReplayError::Land {
            index,
            x: p.x,
            y: p.y,
        });
    }
    let local: Vec<Point> = waypoints.iter().map(|p| p - origin).collect();
    let bounds = Bounds::around(&local, opts.margin);
    let obstacles: Vec<StaticObstacle> = land
        .iter()
        .map(|s| translate(s, &origin))
        .filter(|s| overlaps(&shape_bbox(s), &bounds))
        .enumerate()
        .map(|(k, shape)| StaticObstacle {
            id: k as u32 + 1,
            shape,
        })
        .collect();
    let first_target = obstacles.len() as u32 + 1;
    let targets = tracks
        .iter()
        .map(|t| clip_track(t, window, &origin))
        .filter(|pts| !pts.is_empty())
        .enumerate()
        .map(|(k, points)| TargetVessel {
            id: first_target + k as u32,
            length: opts.target_length,
            width: opts.target_width,
            motion: TargetMotion::Track { points },
        })
        .collect();
    Ok(Scenario {
        name: name.to_string(),
        spawn: Spawn::Fixed {
            pose: path_start_pose(&local),
        },
        waypoints: local,
        obstacles,
        targets,
        goal_radius: opts.goal_radius,
        max_steps: opts.max_steps,
        seed: 0,
        bounds: Some(bounds),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::ais::AisPoint;

    fn track(pts: &[(f64, f64, f64)]) -> AisTrack {
        AisTrack {
            id: "t".into(),
            points: pts
                .iter()
                .map(|&(t, x, y)| AisPoint {
                    t,
                    lat: 0.0,
                    lon: 0.0,
                    speed_knots: None,
                    heading_deg: None,
                    position: Point::new(x, y),
                })
                .collect(),
        }
    }

    fn path() -> Vec<Point> {
        vec![Point::new(1000.0, 2000.0), Point::new(3000.0, 2000.0)]
    }

    #[test]
    fn empty_tracks_give_static_only() {
        let s = build_replay_scenario(
            "x",
            &[],
            &[],
            &path(),
            (0.0, 100.0),
            Point::new(1000.0, 2000.0),
            &ReplayOptions::default(),
        )
        .unwrap();
        assert!(s.targets.is_empty());
        assert_eq!(s.waypoints[0], Point::zeros());
    }

    #[test]
    fn track_is_clipped_to_window() {
        let t = track(&[(0.0, 0.0, 0.0), (100.0, 100.0, 0.0), (200.0, 200.0, 0.0)]);
        let s = build_replay_scenario(
            "x",
            &[],
            &[t],
            &path(),
            (50.0, 150.0),
            Point::zeros(),
            &ReplayOptions::default(),
        )
        .unwrap();
        let TargetMotion::Track { points } = &s.targets[0].motion else {
            panic!()
        };
        let got: Vec<(f64, f64)> = points.iter().map(|p| (p.t, p.position.x)).collect();
        assert_eq!(got, vec![(0.0, 50.0), (50.0, 100.0), (100.0, 150.0)]);
    }

    #[test]
    fn land_crossing_names_waypoint() {
        let island = Shape::polygon(vec![
            Point::new(1900.0, 1900.0),
            Point::new(2100.0, 1900.0),
            Point::new(2100.0, 2100.0),
            Point::new(1900.0, 2100.0),
        ]);
        let err = build_replay_scenario(
            "x",
            &[island.clone()],
            &[],
            &path(),
            (0.0, 1.0),
            Point::zeros(),
            &ReplayOptions::default(),
        );
        assert!(matches!(err, Err(ReplayError::Land { index: 1, .. })));
        let on_land = vec![Point::new(2000.0, 2000.0), Point::new(3000.0, 2000.0)];
        let err = build_replay_scenario(
            "x",
            &[island],
            &[],
            &on_land,
            (0.0, 1.0),
            Point::zeros(),
            &ReplayOptions::default(),
        );
        assert!(matches!(err, Err(ReplayError::Land { index: 0, .. })));
    }
}
