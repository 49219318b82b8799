//! Coastline extraction: marching squares on the cell-centre lattice,
//! Ramer-Douglas-Peucker simplification and hole assignment.

use super::terrain::TerrainGrid;
use crate::geometry::{is_simple_ring, point_in_ring, point_segment_distance, signed_area, Point};
use crate::sensing::Shape;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContourConfig {
    /// Cells strictly above this elevation are land.
    pub sea_level: f64,
    /// Maximum deviation of the simplified boundary, metres.
    pub tolerance: f64,
    /// Polygons with smaller area are dropped; 0 keeps every skerry.
    pub min_area: f64,
}

impl Default for ContourConfig {
    fn default() -> Self {
        Self {
            sea_level: 0.0,
            tolerance: 5.0,
            min_area: 0.0,
        }
    }
}

/// Lattice edge: from vertex (i, j) east (`false`) or north (`true`).
type EdgeId = (usize, usize, bool);

struct Lattice {
    values: Vec<f64>,
    width: usize,
    x0: f64,
    y0: f64,
    cell: f64,
    level: f64,
}

impl Lattice {
    /// Pads the grid with a ring of sea so every contour closes. Index i
    /// runs south to north.
    fn new(grid: &TerrainGrid, level: f64) -> Self {
        let (r, c) = (grid.rows(), grid.cols());
        let width = c + 2;
        let mut values = vec![level - 1.0; (r + 2) * width];
        for i in 1..=r {
            for j in 1..=c {
                values[i * width + j] = grid.elevation[(r - i, j - 1)];
            }
        }
        Self {
            values,
            width,
            x0: grid.x_ll - 0.5 * grid.cell_size,
            y0: grid.y_ll - 0.5 * grid.cell_size,
            cell: grid.cell_size,
            level,
        }
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.width + j]
    }

    fn land(&self, i: usize, j: usize) -> bool {
        self.at(i, j) > self.level
    }

    /// Interpolated crossing on an edge as (easting, northing). The clamp
    /// keeps crossings of neighbouring edges distinct when a vertex sits
    /// exactly at sea level.
    fn crossing(&self, (i, j, north): EdgeId) -> Point {
        let (i2, j2) = if north { (i + 1, j) } else { (i, j + 1) };
        let (a, b) = (self.at(i, j), self.at(i2, j2));
        let t = ((self.level - a) / (b - a)).clamp(1e-6, 1.0 - 1e-6);
        let fi = i as f64 + t * (i2 as f64 - i as f64);
        let fj = j as f64 + t * (j2 as f64 - j as f64);
        Point::new(self.x0 + fj * self.cell, self.y0 + fi * self.cell)
    }
}

/// Closed contour rings around land, counter-clockwise in (easting,
/// northing) for land and clockwise for enclosed water.
fn trace(lat: &Lattice, rows: usize) -> Vec<Vec<Point>> {
    let mut next: BTreeMap<EdgeId, EdgeId> = BTreeMap::new();
    for i in 0..rows - 1 {
        for j in 0..lat.width - 1 {
            let corners = [(i, j), (i, j + 1), (i + 1, j + 1), (i + 1, j)];
            let edges: [EdgeId; 4] = [
                (i, j, false),
                (i, j + 1, true),
                (i + 1, j, false),
                (i, j, true),
            ];
            let land = corners.map(|(a, b)| lat.land(a, b));
            let exits: Vec<usize> = (0..4).filter(|&k| land[k] && !land[(k + 1) % 4]).collect();
            let entries: Vec<usize> = (0..4).filter(|&k| !land[k] && land[(k + 1) % 4]).collect();
            if exits.is_empty() {
                continue;
            }
            let centre = corners.iter().map(|&(a, b)| lat.at(a, b)).sum::<f64>() / 4.0 > lat.level;
            for &x in &exits {
                // Saddles: a land centre joins the land corners.
                let n = if centre {
                    (1..4).map(|d| (x + d) % 4).find(|k| entries.contains(k))
                } else {
                    (1..4)
                        .map(|d| (x + 4 - d) % 4)
                        .find(|k| entries.contains(k))
                };
                next.insert(edges[x], edges[n.expect("entries balance exits")]);
            }
        }
    }
    let mut rings = Vec::new();
    while let Some((&start, _)) = next.first_key_value() {
        let mut ring = Vec::new();
        let mut cur = start;
        loop {
            ring.push(lat.crossing(cur));
            cur = next.remove(&cur).expect("contours close");
            if cur == start {
                break;
            }
        }
        rings.push(ring);
    }
    rings
}

fn rdp_open(points: &[Point], tol: f64, out: &mut Vec<Point>) {
    let last = points.len() - 1;
    let (mut worst, mut idx) = (0.0, 0);
    for (k, p) in points.iter().enumerate().take(last).skip(1) {
        let d = point_segment_distance(p, &points[0], &points[last]);
        if d > worst {
            worst = d;
            idx = k;
        }
    }
    if worst > tol {
        rdp_open(&points[..=idx], tol, out);
        out.pop();
        rdp_open(&points[idx..], tol, out);
    } else {
        out.push(points[0]);
        out.push(points[last]);
    }
}

/// Simplifies a closed ring (no repeated closing vertex).
pub fn simplify_ring(ring: &[Point], tol: f64) -> Vec<Point> {
    if ring.len() < 4 {
        return ring.to_vec();
    }
    let far = (1..ring.len())
        .max_by(|&a, &b| {
            (ring[a] - ring[0])
                .norm()
                .total_cmp(&(ring[b] - ring[0]).norm())
        })
        .unwrap();
    let mut out = Vec::new();
    rdp_open(&ring[..=far], tol, &mut out);
    out.pop();
    let mut tail: Vec<Point> = ring[far..].to_vec();
    tail.push(ring[0]);
    rdp_open(&tail, tol, &mut out);
    out.pop();
    out
}

/// Land polygons at the configured sea level, in the NED plane
/// (x = northing, y = easting).
pub fn terrain_to_obstacles(grid: &TerrainGrid, cfg: &ContourConfig) -> Vec<Shape> {
    let lat = Lattice::new(grid, cfg.sea_level);
    let mut exteriors = Vec::new();
    let mut holes = Vec::new();
    for raw in trace(&lat, grid.rows() + 2) {
        let simple = simplify_ring(&raw, cfg.tolerance);
        let ring = if simple.len() >= 3 && is_simple_ring(&simple) {
            simple
        } else {
            raw
        };
        let area = signed_area(&ring);
        if area.abs() <= cfg.min_area.max(0.0) || ring.len() < 3 {
            continue;
        }
        let ned: Vec<Point> = ring.iter().map(|p| Point::new(p.y, p.x)).collect();
        if area > 0.0 {
            exteriors.push((area, ned, Vec::new()));
        } else {
            holes.push(ned);
        }
    }
    for hole in holes {
        let owner = exteriors
            .iter_mut()
            .filter(|(_, ext, _)| point_in_ring(&hole[0], ext))
            .min_by(|a, b| a.0.total_cmp(&b.0));
        if let Some((_, _, hs)) = owner {
            hs.push(hole);
        }
    }
    exteriors
        .into_iter()
        .map(|(_, exterior, holes)| Shape::Polygon { exterior, holes })
        .collect()
}
