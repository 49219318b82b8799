//! Planar geometry shared by the sensor model, collision checks and terrain
//! processing.
//!
//! All points live in the NED plane: `x` is north, `y` is east (metres).
//! Angles are measured clockwise from north, the usual heading convention.

use nalgebra::Vector2;
use std::f64::consts::PI;

pub type Point = Vector2<f64>;

const TWO_PI: f64 = 2.0 * PI;

/// Wraps an angle to `(-pi, pi]`.
pub fn wrap_angle(angle: f64) -> f64 {
    let w = angle.rem_euclid(TWO_PI);
    if w > PI {
        w - TWO_PI
    } else {
        w
    }
}

/// Unit vector pointing along the NED bearing `angle`.
#[inline]
pub fn heading_vector(angle: f64) -> Point {
    Point::new(angle.cos(), angle.sin())
}

/// 2-D cross product `a.x * b.y - a.y * b.x`.
#[inline]
pub fn cross(a: &Point, b: &Point) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Nearest non-negative ray parameter where the ray hits the circle boundary.
/// A ray starting inside the disc reports 0.
pub fn ray_circle(origin: &Point, dir: &Point, center: &Point, radius: f64) -> Option<f64> {
    let oc = origin - center;
    let c = oc.norm_squared() - radius * radius;
    if c <= 0.0 {
        return Some(0.0);
    }
    let b = oc.dot(dir);
    if b > 0.0 {
        return None;
    }
    let disc = b * b - c;
    if disc < 0.0 {
        return None;
    }
    let t = -b - disc.sqrt();
    (t >= 0.0).then_some(t)
}

/// Ray parameter at which the ray crosses segment `a`-`b`, if it does.
pub fn ray_segment(origin: &Point, dir: &Point, a: &Point, b: &Point) -> Option<f64> {
    let e = b - a;
    let denom = cross(dir, &e);
    if denom.abs() < 1e-15 {
        return None;
    }
    let ao = a - origin;
    let t = cross(&ao, &e) / denom;
    let s = cross(&ao, dir) / denom;
    (t >= 0.0 && (0.0..=1.0).contains(&s)).then_some(t)
}

/// Even-odd point-in-ring test. The ring is implicitly closed.
pub fn point_in_ring(p: &Point, ring: &[Point]) -> bool {
    let n = ring.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (ring[i], ring[j]);
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Signed shoelace area of a closed ring.
pub fn signed_area(ring: &[Point]) -> f64 {
    let n = ring.len();
    let mut acc = 0.0;
    for i in 0..n {
        let (a, b) = (ring[i], ring[(i + 1) % n]);
        acc += a.x * b.y - b.x * a.y;
    }
    0.5 * acc
}

fn orient(a: &Point, b: &Point, c: &Point) -> f64 {
    cross(&(b - a), &(c - a))
}

fn on_segment(a: &Point, b: &Point, p: &Point) -> bool {
    p.x >= a.x.min(b.x) - 1e-12
        && p.x <= a.x.max(b.x) + 1e-12
        && p.y >= a.y.min(b.y) - 1e-12
        && p.y <= a.y.max(b.y) + 1e-12
}

/// Closed-segment intersection test (touching counts).
pub fn segments_intersect(p1: &Point, p2: &Point, q1: &Point, q2: &Point) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(q1, q2, p1))
        || (d2 == 0.0 && on_segment(q1, q2, p2))
        || (d3 == 0.0 && on_segment(p1, p2, q1))
        || (d4 == 0.0 && on_segment(p1, p2, q2))
}

/// True when no two non-adjacent edges of the ring intersect.
pub fn is_simple_ring(ring: &[Point]) -> bool {
    let n = ring.len();
    if n < 3 {
        return false;
    }
    for i in 0..n {
        let (a1, a2) = (ring[i], ring[(i + 1) % n]);
        for j in (i + 1)..n {
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            let (b1, b2) = (ring[j], ring[(j + 1) % n]);
            if segments_intersect(&a1, &a2, &b1, &b2) {
                return false;
            }
        }
    }
    true
}

/// Distance from `p` to the closed segment `a`-`b`.
pub fn point_segment_distance(p: &Point, a: &Point, b: &Point) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a).dot(&ab) / len2).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

/// Oriented rectangle, used for vessel hulls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientedRect {
    pub center: Point,
    pub heading: f64,
    pub length: f64,
    pub width: f64,
}

impl OrientedRect {
    /// Corners in order bow-starboard, stern-starboard, stern-port, bow-port.
    pub fn corners(&self) -> [Point; 4] {
        let fwd = heading_vector(self.heading) * (0.5 * self.length);
        let stb = heading_vector(self.heading + 0.5 * PI) * (0.5 * self.width);
        [
            self.center + fwd + stb,
            self.center - fwd + stb,
            self.center - fwd - stb,
            self.center + fwd - stb,
        ]
    }

    pub fn contains(&self, p: &Point) -> bool {
        let d = p - self.center;
        let fwd = heading_vector(self.heading);
        let stb = heading_vector(self.heading + 0.5 * PI);
        d.dot(&fwd).abs() <= 0.5 * self.length && d.dot(&stb).abs() <= 0.5 * self.width
    }

    /// Distance from `p` to the rectangle (0 when inside).
    pub fn distance_to(&self, p: &Point) -> f64 {
        let d = p - self.center;
        let lon = d.dot(&heading_vector(self.heading)).abs() - 0.5 * self.length;
        let lat = d.dot(&heading_vector(self.heading + 0.5 * PI)).abs() - 0.5 * self.width;
        Point::new(lon.max(0.0), lat.max(0.0)).norm()
    }

    pub fn intersects_circle(&self, center: &Point, radius: f64) -> bool {
        self.distance_to(center) <= radius
    }

    /// Overlap with an even-odd region given by one or more rings.
    pub fn intersects_rings(&self, rings: &[Vec<Point>]) -> bool {
        let corners = self.corners();
        for ring in rings {
            let n = ring.len();
            for i in 0..n {
                let (a, b) = (ring[i], ring[(i + 1) % n]);
                for k in 0..4 {
                    if segments_intersect(&corners[k], &corners[(k + 1) % 4], &a, &b) {
                        return true;
                    }
                }
            }
        }
        // No edge crossings: either fully inside, fully outside, or the region
        // lies inside the rectangle.
        if point_in_rings(&self.center, rings) {
            return true;
        }
        rings
            .iter()
            .filter_map(|r| r.first())
            .any(|p| self.contains(p))
    }

    pub fn intersects_rect(&self, other: &OrientedRect) -> bool {
        let ring = other.corners().to_vec();
        self.intersects_rings(std::slice::from_ref(&ring))
    }
}

/// Even-odd containment over a set of rings (outer boundaries plus holes).
pub fn point_in_rings(p: &Point, rings: &[Vec<Point>]) -> bool {
    rings.iter().filter(|r| point_in_ring(p, r)).count() % 2 == 1
}
