//! Desired path representation and the path-relative navigation features.
//!
//! Paths are built from waypoints as straight legs joined by circular fillets
//! and parameterized by arc length `omega` in `[0, L]`.

use crate::dynamics::VesselState;
use crate::geometry::{cross, wrap_angle, Point};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Newton-Raphson iteration cap for path projection.
pub const MAX_NEWTON_ITERATIONS: usize = 20;
const NEWTON_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum PathError {
    #[error("a path needs at least two waypoints, got {0}")]
    TooFewWaypoints(usize),
    #[error("waypoint {index} duplicates waypoint {}", index - 1)]
    DuplicateWaypoint { index: usize },
    #[error("waypoint {index} is not finite")]
    NonFinite { index: usize },
    #[error("fillet radius must be finite and non-negative, got {0}")]
    BadFilletRadius(f64),
}

#[derive(Debug, Clone, PartialEq)]
enum Segment {
    Line {
        start: Point,
        dir: Point,
        length: f64,
    },
    Arc {
        center: Point,
        radius: f64,
        start_angle: f64,
        /// +1 for a starboard (clockwise) turn, -1 for port.
        turn: f64,
        length: f64,
    },
}

impl Segment {
    fn length(&self) -> f64 {
        match self {
            Segment::Line { length, .. } | Segment::Arc { length, .. } => *length,
        }
    }

    /// Position, first and second derivative w.r.t. arc length.
    fn eval(&self, s: f64) -> (Point, Point, Point) {
        match *self {
            Segment::Line { start, dir, .. } => (start + dir * s, dir, Point::zeros()),
            Segment::Arc {
                center,
                radius,
                start_angle,
                turn,
                ..
            } => {
                let a = start_angle + turn * s / radius;
                let (sin, cos) = a.sin_cos();
                let radial = Point::new(cos, sin);
                (
                    center + radial * radius,
                    Point::new(-sin, cos) * turn,
                    -radial / radius,
                )
            }
        }
    }
}

/// Arc-length parameterized path through a list of waypoints.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSpec {
    waypoints: Vec<Point>,
    segments: Vec<Segment>,
    /// Arc length at the start of each segment.
    offsets: Vec<f64>,
    length: f64,
}

/// Outcome of a projection onto the path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    pub omega: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Newton did not converge and a local grid refinement was used instead.
    pub used_fallback: bool,
}

/// Builds a path from waypoints. Corners are rounded with circular arcs of
/// `fillet_radius`, shrunk where the adjacent legs are too short. A radius of
/// zero yields the plain polyline.
pub fn build_path(waypoints: &[Point], fillet_radius: f64) -> Result<PathSpec, PathError> {
    if waypoints.len() < 2 {
        return Err(PathError::TooFewWaypoints(waypoints.len()));
    }
    if !(fillet_radius.is_finite() && fillet_radius >= 0.0) {
        return Err(PathError::BadFilletRadius(fillet_radius));
    }
    for (i, w) in waypoints.iter().enumerate() {
        if !(w.x.is_finite() && w.y.is_finite()) {
            return Err(PathError::NonFinite { index: i });
        }
        if i > 0 && (w - waypoints[i - 1]).norm() < 1e-9 {
            return Err(PathError::DuplicateWaypoint { index: i });
        }
    }

    let n = waypoints.len();
    let legs: Vec<(Point, f64)> = waypoints
        .windows(2)
        .map(|w| {
            let d = w[1] - w[0];
            let len = d.norm();
            (d / len, len)
        })
        .collect();

    // Tangent length consumed at each interior corner, plus the fillet arc.
    let mut trims = vec![0.0; n];
    let mut arcs: Vec<Option<Segment>> = vec![None; n];
    for k in 1..n - 1 {
        let (d_in, len_in) = legs[k - 1];
        let (d_out, len_out) = legs[k];
        let phi = cross(&d_in, &d_out).atan2(d_in.dot(&d_out));
        if fillet_radius == 0.0 || phi.abs() < 1e-9 || phi.abs() > std::f64::consts::PI - 1e-9 {
            continue;
        }
        let half_tan = (0.5 * phi.abs()).tan();
        let trim = (fillet_radius * half_tan)
            .min(0.5 * len_in)
            .min(0.5 * len_out);
        let radius = trim / half_tan;
        let start = waypoints[k] - d_in * trim;
        let turn = phi.signum();
        let normal = if turn > 0.0 {
            Point::new(-d_in.y, d_in.x)
        } else {
            Point::new(d_in.y, -d_in.x)
        };
        let center = start + normal * radius;
        let radial = start - center;
        trims[k] = trim;
        arcs[k] = Some(Segment::Arc {
            center,
            radius,
            start_angle: radial.y.atan2(radial.x),
            turn,
            length: radius * phi.abs(),
        });
    }

    let mut segments = Vec::with_capacity(2 * n);
    for k in 0..n - 1 {
        let (dir, len) = legs[k];
        let line_len = len - trims[k] - trims[k + 1];
        if line_len > 1e-12 {
            segments.push(Segment::Line {
                start: waypoints[k] + dir * trims[k],
                dir,
                length: line_len,
            });
        }
        if let Some(arc) = arcs[k + 1].take() {
            segments.push(arc);
        }
    }

    let mut offsets = Vec::with_capacity(segments.len());
    let mut acc = 0.0;
    for s in &segments {
        offsets.push(acc);
        acc += s.length();
    }
    Ok(PathSpec {
        waypoints: waypoints.to_vec(),
        segments,
        offsets,
        length: acc,
    })
}

impl PathSpec {
    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn waypoints(&self) -> &[Point] {
        &self.waypoints
    }

    fn locate(&self, omega: f64) -> (usize, f64) {
        let omega = omega.clamp(0.0, self.length);
        let idx = match self.offsets.partition_point(|&o| o <= omega) {
            0 => 0,
            i => i - 1,
        };
        (idx, omega - self.offsets[idx])
    }

    /// Position, unit tangent and second derivative at `omega` (clamped).
    pub fn eval(&self, omega: f64) -> (Point, Point, Point) {
        let (idx, s) = self.locate(omega);
        self.segments[idx].eval(s)
    }

    pub fn position(&self, omega: f64) -> Point {
        self.eval(omega).0
    }

    pub fn tangent(&self, omega: f64) -> Point {
        self.eval(omega).1
    }

    /// Path angle `atan2(y', x')` at `omega`.
    pub fn path_angle(&self, omega: f64) -> f64 {
        let t = self.tangent(omega);
        t.y.atan2(t.x)
    }

    /// Local minimizer of the squared distance to `pos`, warm-started at
    /// `omega_init`. Newton-Raphson with at most
    /// [`MAX_NEWTON_ITERATIONS`] steps; on failure a grid refinement around
    /// the warm start is used and flagged.
    pub fn project(&self, pos: &Point, omega_init: f64) -> Projection {
        let mut omega = omega_init.clamp(0.0, self.length);
        for it in 1..=MAX_NEWTON_ITERATIONS {
            let (p, d1, d2) = self.eval(omega);
            let e = pos - p;
            let grad = -e.dot(&d1);
            let hess = d1.norm_squared() - e.dot(&d2);
            let max_step = e.norm() + 1.0;
            let step = if hess > 1e-9 { -grad / hess } else { -grad };
            let next = (omega + step.clamp(-max_step, max_step)).clamp(0.0, self.length);
            let delta = next - omega;
            omega = next;
            if delta.abs() < NEWTON_TOLERANCE {
                return Projection {
                    omega,
                    iterations: it,
                    converged: true,
                    used_fallback: false,
                };
            }
        }
        Projection {
            omega: self.refine_on_grid(pos, omega_init),
            iterations: MAX_NEWTON_ITERATIONS,
            converged: false,
            used_fallback: true,
        }
    }

    fn refine_on_grid(&self, pos: &Point, omega_init: f64) -> f64 {
        const SAMPLES: usize = 200;
        let center = omega_init.clamp(0.0, self.length);
        let reach = 2.0 * (pos - self.position(center)).norm() + 1.0;
        let (mut lo, mut hi) = ((center - reach).max(0.0), (center + reach).min(self.length));
        let dist2 = |w: f64| (pos - self.position(w)).norm_squared();
        let mut best = center;
        loop {
            let h = (hi - lo) / SAMPLES as f64;
            let mut best_d = f64::INFINITY;
            for i in 0..=SAMPLES {
                let w = lo + h * i as f64;
                let d = dist2(w);
                if d < best_d {
                    best_d = d;
                    best = w;
                }
            }
            if h < 1e-8 {
                return best;
            }
            lo = (best - 2.0 * h).max(0.0);
            hi = (best + 2.0 * h).min(self.length);
        }
    }

    /// Distance from `pos` to the path point at `omega_bar`.
    pub fn cross_track_error(&self, pos: &Point, omega_bar: f64) -> f64 {
        (pos - self.position(omega_bar)).norm()
    }

    /// Heading change needed to point at the look-ahead point.
    pub fn heading_error(&self, state: &VesselState, omega_bar: f64, delta_la: f64) -> f64 {
        let target = self.position(omega_bar + delta_la);
        let d = target - state.position();
        if d.norm() == 0.0 {
            return 0.0;
        }
        wrap_angle(d.y.atan2(d.x) - state.psi)
    }

    /// Heading relative to the path direction at the look-ahead point.
    pub fn lookahead_heading_error(
        &self,
        state: &VesselState,
        omega_bar: f64,
        delta_la: f64,
    ) -> f64 {
        wrap_angle(self.path_angle(omega_bar + delta_la) - state.psi)
    }
}

/// Navigation part of the observation plus bookkeeping values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NavFeatures {
    pub u: f64,
    pub v: f64,
    pub r: f64,
    pub cross_track_error: f64,
    pub heading_error: f64,
    pub lookahead_heading_error: f64,
    pub omega_bar: f64,
    pub progress: f64,
}

impl NavFeatures {
    /// The six features in observation order.
    pub fn to_array(&self) -> [f64; 6] {
        [
            self.u,
            self.v,
            self.r,
            self.cross_track_error,
            self.heading_error,
            self.lookahead_heading_error,
        ]
    }
}

pub fn nav_features(
    path: &PathSpec,
    state: &VesselState,
    omega_prev: f64,
    delta_la: f64,
) -> (NavFeatures, Projection) {
    assert!(delta_la > 0.0, "look-ahead distance must be positive");
    let pos = state.position();
    let proj = path.project(&pos, omega_prev);
    let omega = proj.omega;
    let nav = NavFeatures {
        u: state.u,
        v: state.v,
        r: state.r,
        cross_track_error: path.cross_track_error(&pos, omega),
        heading_error: path.heading_error(state, omega, delta_la),
        lookahead_heading_error: path.lookahead_heading_error(state, omega, delta_la),
        omega_bar: omega,
        progress: omega / path.length(),
    };
    (nav, proj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn p(x: f64, y: f64) -> Point {
        Point::new(x, y)
    }

    fn straight() -> PathSpec {
        build_path(&[p(0.0, 0.0), p(1000.0, 0.0)], 2.5).unwrap()
    }

    fn random_polyline(rng: &mut ChaCha8Rng) -> Vec<Point> {
        let mut pts = vec![p(0.0, 0.0)];
        let mut heading: f64 = rng.random_range(-PI..PI);
        for _ in 0..rng.random_range(2..7) {
            heading += rng.random_range(-1.2..1.2);
            let len = rng.random_range(30.0..200.0);
            let last = *pts.last().unwrap();
            pts.push(last + Point::new(heading.cos(), heading.sin()) * len);
        }
        pts
    }

    #[test]
    fn straight_line_evaluates() {
        let path = straight();
        assert_abs_diff_eq!(path.length(), 1000.0, epsilon = 1e-12);
        assert_abs_diff_eq!(path.position(500.0), p(500.0, 0.0), epsilon = 1e-12);
    }

    #[test]
    fn polyline_without_fillets() {
        let path = build_path(&[p(0.0, 0.0), p(100.0, 0.0), p(100.0, 100.0)], 0.0).unwrap();
        assert_abs_diff_eq!(path.length(), 200.0, epsilon = 1e-12);
        assert_abs_diff_eq!(path.position(100.0), p(100.0, 0.0), epsilon = 1e-12);
        assert_abs_diff_eq!(path.position(150.0), p(100.0, 50.0), epsilon = 1e-12);
    }

    #[test]
    fn fillet_shortens_corner() {
        let path = build_path(&[p(0.0, 0.0), p(100.0, 0.0), p(100.0, 100.0)], 10.0).unwrap();
        // Two legs of 90 plus a quarter circle of radius 10.
        assert_abs_diff_eq!(path.length(), 180.0 + 5.0 * PI, epsilon = 1e-9);
        // Tangent is continuous across the fillet.
        let a = path.tangent(90.0 - 1e-9);
        let b = path.tangent(90.0 + 1e-9);
        assert_abs_diff_eq!(a, b, epsilon = 1e-6);
    }

    #[test]
    fn rejects_bad_waypoints() {
        assert_eq!(
            build_path(&[p(0.0, 0.0)], 1.0),
            Err(PathError::TooFewWaypoints(1))
        );
        assert_eq!(
            build_path(&[p(0.0, 0.0), p(1.0, 0.0), p(1.0, 0.0)], 1.0),
            Err(PathError::DuplicateWaypoint { index: 2 })
        );
    }

    #[test]
    fn arc_length_parameterization_is_lipschitz() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let path = build_path(&random_polyline(&mut rng), rng.random_range(0.0..40.0)).unwrap();
            for _ in 0..200 {
                let w = rng.random_range(0.0..path.length());
                let h = rng.random_range(0.0..20.0);
                let d = (path.position(w + h) - path.position(w)).norm();
                assert!(d <= h + 1e-9, "{d} > {h}");
            }
        }
    }

    #[test]
    fn derivative_matches_position_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..30 {
            let path = build_path(&random_polyline(&mut rng), 20.0).unwrap();
            for _ in 0..50 {
                let w = rng.random_range(1.0..path.length() - 1.0);
                let h = 1e-5;
                let fd = (path.position(w + h) - path.position(w - h)) / (2.0 * h);
                let fd_angle = fd.y.atan2(fd.x);
                assert!(wrap_angle(fd_angle - path.path_angle(w)).abs() < 1e-4);
            }
        }
    }

    #[test]
    fn projection_perpendicular_foot_and_clamp() {
        let path = straight();
        let proj = path.project(&p(500.0, 100.0), 490.0);
        assert!(proj.converged);
        assert_abs_diff_eq!(proj.omega, 500.0, epsilon = 1e-9);
        assert_eq!(path.project(&p(-50.0, 0.0), 0.0).omega, 0.0);
        assert_abs_diff_eq!(
            path.cross_track_error(&p(500.0, 100.0), 500.0),
            100.0,
            epsilon = 1e-12
        );
        assert_eq!(path.cross_track_error(&p(300.0, 0.0), 300.0), 0.0);
    }

    #[test]
    fn kinked_polyline_falls_back_to_grid() {
        let path = build_path(&[p(0.0, 0.0), p(100.0, 0.0), p(100.0, 100.0)], 0.0).unwrap();
        let pos = p(110.0, -10.0);
        let proj = path.project(&pos, 95.0);
        assert_abs_diff_eq!(proj.omega, 100.0, epsilon = 1e-5);
    }

    #[test]
    fn heading_error_cases() {
        let path = build_path(&[p(0.0, 0.0), p(0.0, 1000.0)], 0.0).unwrap();
        // Vessel at origin facing north, look-ahead point due east.
        let s = VesselState::at_rest(0.0, 0.0, 0.0);
        assert_abs_diff_eq!(
            path.heading_error(&s, 0.0, 100.0),
            PI / 2.0,
            epsilon = 1e-12
        );
        let east = VesselState::at_rest(0.0, 0.0, PI / 2.0);
        assert_abs_diff_eq!(path.heading_error(&east, 0.0, 100.0), 0.0, epsilon = 1e-12);
        // Look-ahead point coincides with the vessel.
        let on_end = VesselState::at_rest(0.0, 1000.0, 1.0);
        assert_eq!(path.heading_error(&on_end, 1000.0, 100.0), 0.0);
    }

    #[test]
    fn heading_error_wraps() {
        // Look-ahead bearing -3pi/4 (south-west), heading 3pi/4.
        let dir = Point::new((-0.75 * PI).cos(), (-0.75 * PI).sin());
        let path = build_path(&[p(0.0, 0.0), dir * 1000.0], 0.0).unwrap();
        let s = VesselState::at_rest(0.0, 0.0, 0.75 * PI);
        assert_abs_diff_eq!(
            path.heading_error(&s, 0.0, 100.0),
            PI / 2.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn lookahead_heading_error_cases() {
        let east_path = build_path(&[p(0.0, 0.0), p(0.0, 1000.0)], 0.0).unwrap();
        let west_path = build_path(&[p(0.0, 0.0), p(0.0, -1000.0)], 0.0).unwrap();
        let north = VesselState::at_rest(0.0, 0.0, 0.0);
        let east = VesselState::at_rest(0.0, 0.0, PI / 2.0);
        assert_abs_diff_eq!(
            east_path.lookahead_heading_error(&east, 0.0, 50.0),
            0.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            east_path.lookahead_heading_error(&north, 0.0, 50.0),
            PI / 2.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            west_path.lookahead_heading_error(&north, 0.0, 50.0),
            -PI / 2.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn nav_features_straight_path() {
        let path = straight();
        let model = crate::dynamics::VesselModel::default();
        let s = VesselState {
            x_n: 200.0,
            u: model.u_max,
            ..Default::default()
        };
        let (nav, _) = nav_features(&path, &s, 190.0, 50.0);
        assert_abs_diff_eq!(
            nav.to_array().as_slice(),
            [model.u_max, 0.0, 0.0, 0.0, 0.0, 0.0].as_slice(),
            epsilon = 1e-12
        );
        let offset = VesselState::at_rest(200.0, 100.0, 0.0);
        let (nav, _) = nav_features(&path, &offset, 190.0, 50.0);
        assert_abs_diff_eq!(nav.cross_track_error, 100.0, epsilon = 1e-9);
        assert_eq!((nav.u, nav.v, nav.r), (0.0, 0.0, 0.0));
        assert_abs_diff_eq!(nav.progress, 0.2, epsilon = 1e-12);
    }

    #[test]
    fn nav_features_compose_individual_features() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let path = build_path(&random_polyline(&mut rng), 15.0).unwrap();
            let w = rng.random_range(0.0..path.length());
            let pos = path.position(w)
                + Point::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
            let s = VesselState {
                x_n: pos.x,
                y_n: pos.y,
                psi: rng.random_range(-3.0..3.0),
                u: rng.random_range(0.0..2.0),
                v: rng.random_range(-0.2..0.2),
                r: rng.random_range(-0.2..0.2),
            };
            let (nav, proj) = nav_features(&path, &s, w, 40.0);
            assert_eq!(nav.omega_bar, proj.omega);
            assert_eq!(
                nav.cross_track_error,
                path.cross_track_error(&pos, proj.omega)
            );
            assert_eq!(nav.heading_error, path.heading_error(&s, proj.omega, 40.0));
            assert_eq!(
                nav.lookahead_heading_error,
                path.lookahead_heading_error(&s, proj.omega, 40.0)
            );
        }
    }

    #[test]
    fn angle_features_invariant_to_full_turns() {
        let path = build_path(&[p(0.0, 0.0), p(50.0, 80.0), p(200.0, 40.0)], 10.0).unwrap();
        let s = VesselState::at_rest(30.0, 20.0, 0.4);
        let t = VesselState {
            psi: 0.4 + 2.0 * PI,
            ..s
        };
        assert_abs_diff_eq!(
            path.heading_error(&s, 20.0, 30.0),
            path.heading_error(&t, 20.0, 30.0),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            path.lookahead_heading_error(&s, 20.0, 30.0),
            path.lookahead_heading_error(&t, 20.0, 30.0),
            epsilon = 1e-12
        );
    }

    #[test]
    fn warm_started_projection_does_not_teleport() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..20 {
            let path = build_path(&random_polyline(&mut rng), 25.0).unwrap();
            let mut pos = path.position(0.0) + Point::new(1.0, 1.0);
            let mut omega = path.project(&pos, 0.0).omega;
            for _ in 0..200 {
                let ahead = path.position(omega + 3.0);
                let step = (ahead - pos).normalize() * rng.random_range(0.5..5.0);
                pos += step;
                let next = path.project(&pos, omega).omega;
                assert!((next - omega).abs() <= 10.0 * step.norm() + 1e-9);
                omega = next;
            }
        }
    }
}
