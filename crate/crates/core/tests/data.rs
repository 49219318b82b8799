mod common;

use colav::data::ais::{load_ais, parse_ais};
use colav::data::contour::{terrain_to_obstacles, ContourConfig};
use colav::data::presets::ReplayPreset;
use colav::data::terrain::{load_terrain, TerrainGrid};
use colav::data::utm::{latlon_to_utm33, utm33_to_latlon, Hemisphere};
use colav::geometry::Point;
use colav::sensing::Shape;
use common::fixture;
use ndarray::Array2;
use proptest::prelude::*;

/// Classical Transverse Mercator series (powers of the longitude offset).
fn snyder_utm33(lat: f64, lon: f64) -> (f64, f64) {
    let a = 6_378_137.0;
    let f = 1.0 / 298.257_223_563;
    let k0 = 0.9996;
    let e2 = f * (2.0 - f);
    let (e4, e6) = (e2 * e2, e2 * e2 * e2);
    let ep2 = e2 / (1.0 - e2);
    let phi = lat.to_radians();
    let (s, c, t) = (phi.sin(), phi.cos(), phi.tan());
    let n = a / (1.0 - e2 * s * s).sqrt();
    let tt = t * t;
    let cc = ep2 * c * c;
    let aa = (lon - 15.0).to_radians() * c;
    let m = a
        * ((1.0 - e2 / 4.0 - 3.0 * e4 / 64.0 - 5.0 * e6 / 256.0) * phi
            - (3.0 * e2 / 8.0 + 3.0 * e4 / 32.0 + 45.0 * e6 / 1024.0) * (2.0 * phi).sin()
            + (15.0 * e4 / 256.0 + 45.0 * e6 / 1024.0) * (4.0 * phi).sin()
            - (35.0 * e6 / 3072.0) * (6.0 * phi).sin());
    let x = k0
        * n
        * (aa
            + (1.0 - tt + cc) * aa.powi(3) / 6.0
            + (5.0 - 18.0 * tt + tt * tt + 72.0 * cc - 58.0 * ep2) * aa.powi(5) / 120.0);
    let y = k0
        * (m + n
            * t
            * (aa * aa / 2.0
                + (5.0 - tt + 9.0 * cc + 4.0 * cc * cc) * aa.powi(4) / 24.0
                + (61.0 - 58.0 * tt + tt * tt + 600.0 * cc - 330.0 * ep2) * aa.powi(6) / 720.0));
    (500_000.0 + x, y)
}

#[test]
fn projection_matches_reference_point() {
    // Reference from an external geodesy library (EPSG:32633).
    let (e, n) = latlon_to_utm33(63.4305, 10.3951).unwrap();
    assert!((e - 270_340.022_844_982_74).abs() < 0.5, "{e}");
    assert!((n - 7_041_816.279_809_575_5).abs() < 0.5, "{n}");
}

#[test]
fn projection_rejects_polar_latitudes() {
    assert!(latlon_to_utm33(85.0, 10.0).is_err());
    assert!(latlon_to_utm33(-81.0, 10.0).is_err());
    assert!(latlon_to_utm33(60.0, f64::NAN).is_err());
}

proptest! {
    #[test]
    fn projection_agrees_with_classical_series(lat in 55.0f64..72.0, lon in 9.0f64..21.0) {
        let (e, n) = latlon_to_utm33(lat, lon).unwrap();
        let (eo, no) = snyder_utm33(lat, lon);
        prop_assert!((e - eo).abs() < 0.05 && (n - no).abs() < 0.05, "({}, {}) vs ({}, {})", e, n, eo, no);
    }

    #[test]
    fn projection_round_trips(lat in -79.0f64..83.0, lon in 6.0f64..24.0) {
        let (e, n) = latlon_to_utm33(lat, lon).unwrap();
        let hemi = if lat < 0.0 { Hemisphere::South } else { Hemisphere::North };
        let (lat2, lon2) = utm33_to_latlon(e, n, hemi).unwrap();
        prop_assert!((lat - lat2).abs() < 1e-6 && (lon - lon2).abs() < 1e-6);
    }
}

#[test]
fn terrain_fixture_is_stable() {
    let grid = load_terrain(&fixture("terrain_small.asc")).unwrap();
    assert_eq!((grid.rows(), grid.cols()), (20, 20));
    assert_eq!(grid.cell_size, 50.0);
    assert_eq!(
        grid.checksum(),
        include_str!("fixtures/terrain_small.sha256").trim()
    );
    let again = TerrainGrid::parse(&grid.to_asc()).unwrap();
    assert_eq!(again, grid);
}

#[test]
fn island_becomes_one_polygon() {
    let grid = load_terrain(&fixture("terrain_small.asc")).unwrap();
    let land = terrain_to_obstacles(&grid, &ContourConfig::default());
    assert_eq!(land.len(), 1);
    let Shape::Polygon { exterior, holes } = &land[0] else {
        panic!("expected a polygon")
    };
    assert!(holes.is_empty());
    let centre = Point::new(7_041_550.0, 270_500.0);
    for p in exterior {
        // Elevation reaches zero 240 m from the peak.
        let r = (p - centre).norm();
        assert!((r - 240.0).abs() < 15.0, "vertex at radius {r}");
    }
}

fn ramp(x_ll: f64, y_ll: f64) -> TerrainGrid {
    // Elevation rises eastward; the zero crossing sits at easting x_ll + 237.
    let cell = 10.0;
    let elevation = Array2::from_shape_fn((12, 40), |(_, j)| {
        x_ll + (j as f64 + 0.5) * cell - (x_ll + 237.0)
    });
    TerrainGrid {
        x_ll,
        y_ll,
        cell_size: cell,
        elevation,
    }
}

#[test]
fn straight_coast_is_straight() {
    let grid = ramp(1000.0, 5000.0);
    let land = terrain_to_obstacles(&grid, &ContourConfig::default());
    assert_eq!(land.len(), 1);
    let Shape::Polygon { exterior, .. } = &land[0] else {
        panic!("expected a polygon")
    };
    let west = exterior.iter().map(|p| p.y).fold(f64::INFINITY, f64::min);
    assert!((west - 1237.0).abs() < 1e-9, "{west}");
    let on_coast: Vec<&Point> = exterior
        .iter()
        .filter(|p| (p.y - 1237.0).abs() < 1e-9)
        .collect();
    assert!(on_coast.len() >= 2);
    let span = on_coast.iter().map(|p| p.x).fold(f64::MIN, f64::max)
        - on_coast.iter().map(|p| p.x).fold(f64::MAX, f64::min);
    assert!(span >= 100.0, "coast spans {span} m");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn contours_follow_translation(dx in -50i32..50, dy in -50i32..50) {
        let base = load_terrain(&fixture("terrain_small.asc")).unwrap();
        let shifted = TerrainGrid { x_ll: base.x_ll + dx as f64 * 10.0, y_ll: base.y_ll + dy as f64 * 10.0, ..base.clone() };
        let a = terrain_to_obstacles(&base, &ContourConfig::default());
        let b = terrain_to_obstacles(&shifted, &ContourConfig::default());
        prop_assert_eq!(a.len(), b.len());
        let offset = Point::new(dy as f64 * 10.0, dx as f64 * 10.0);
        for (sa, sb) in a.iter().zip(&b) {
            let (Shape::Polygon { exterior: ea, .. }, Shape::Polygon { exterior: eb, .. }) = (sa, sb) else {
                panic!("expected polygons")
            };
            prop_assert_eq!(ea.len(), eb.len());
            for (p, q) in ea.iter().zip(eb) {
                prop_assert!((q - p - offset).norm() < 1e-6);
            }
        }
    }
}

#[test]
fn ais_constant_velocity_track() {
    let load = load_ais(&fixture("ais_small.csv")).unwrap();
    assert_eq!(load.skipped, 1);
    assert_eq!(load.tracks.len(), 2);
    let east = load.tracks.iter().find(|t| t.id == "257000001").unwrap();
    assert_eq!(east.points.len(), 21);
    for s in east.derived_speeds() {
        assert!((s - 5.0).abs() / 5.0 < 0.01, "{s}");
    }
    // Both timestamp notations land on the same clock.
    let north = load.tracks.iter().find(|t| t.id == "257000002").unwrap();
    assert_eq!(north.start(), 1_600_000_000.0);
}

#[test]
fn ais_header_must_name_positions() {
    let text = "id,timestamp,lon\n1,0,10.0\n";
    assert!(parse_ais(text.as_bytes()).is_err());
}

#[test]
fn replay_fixture_builds_a_scenario() {
    let path = fixture("replay_small.toml");
    let (preset, base) = ReplayPreset::resolve(path.to_str().unwrap()).unwrap();
    let scenario = preset.build(&base).unwrap();
    assert_eq!(scenario.obstacles.len(), 1);
    assert!(!scenario.targets.is_empty());
    assert_eq!(scenario.waypoints.len(), 3);
    // The local frame is centred near the route.
    assert!(scenario.waypoints.iter().all(|p| p.norm() < 2000.0));
}

#[test]
fn builtin_presets_parse() {
    for name in ReplayPreset::builtin_names() {
        let p = ReplayPreset::builtin(name).unwrap();
        assert!(p.waypoints.len() >= 2);
        assert!(p.planar_waypoints().is_ok());
    }
}
