//! Builds a real-data style scenario from an elevation grid, an AIS log and
//! geodetic waypoints, using the small synthetic island shipped with the
//! tests.
//!
//!     cargo run --example replay_island

use colav::data::ais::load_ais;
use colav::data::contour::{terrain_to_obstacles, ContourConfig};
use colav::data::presets::ReplayPreset;
use colav::data::terrain::load_terrain;
use colav::data::utm::latlon_to_utm33;
use colav::sensing::Shape;
use std::path::Path;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");

    let grid = load_terrain(&dir.join("terrain_small.asc"))?;
    println!(
        "terrain {}x{} cells of {} m, sha256 {}",
        grid.rows(),
        grid.cols(),
        grid.cell_size,
        &grid.checksum()[..12]
    );
    for shape in terrain_to_obstacles(&grid, &ContourConfig::default()) {
        if let Shape::Polygon { exterior, holes } = shape {
            println!(
                "land polygon with {} vertices, {} holes",
                exterior.len(),
                holes.len()
            );
        }
    }

    let ais = load_ais(&dir.join("ais_small.csv"))?;
    println!(
        "{} AIS tracks, {} rows skipped",
        ais.tracks.len(),
        ais.skipped
    );
    for t in &ais.tracks {
        let speeds = t.derived_speeds();
        let mean = speeds.iter().sum::<f64>() / speeds.len().max(1) as f64;
        println!(
            "  {}: {} reports over {:.0} s, mean speed {mean:.2} m/s",
            t.id,
            t.points.len(),
            t.end() - t.start()
        );
    }

    let (e, n) = latlon_to_utm33(63.4305, 10.3951)?;
    println!("63.4305N 10.3951E -> zone 33 ({e:.2} E, {n:.2} N)");

    let path = dir.join("replay_small.toml");
    let (preset, base) = ReplayPreset::resolve(path.to_str().expect("utf-8 path"))?;
    let sc = preset.build(&base)?;
    println!(
        "scenario `{}`: {} waypoints, {} static obstacles, {} targets",
        sc.name,
        sc.waypoints.len(),
        sc.obstacles.len(),
        sc.targets.len()
    );
    Ok(())
}
