//! Named replay presets. A preset names a terrain grid, an AIS log and a
//! geodetic waypoint list; data paths are resolved against a base directory
//! because the recordings are not distributed with the crate.
//!
//! ```toml
//! name = "trondheim"
//! approximate = true
//! terrain = "trondheim/terrain.asc"
//! ais = "trondheim/ais.csv"
//! waypoints = [[63.475, 10.2], [63.445, 10.395]]   # [lat, lon] degrees
//! window_start = 1600000000.0                      # optional, Unix s
//! duration = 1000.0
//! [contour]                                        # optional
//! [options]                                        # optional
//! ```

use super::ais::{load_ais, AisError};
use super::contour::{terrain_to_obstacles, ContourConfig};
use super::replay::{build_replay_scenario, ReplayError, ReplayOptions};
use super::terrain::{load_terrain, TerrainError};
use super::utm::{latlon_to_utm33, ProjectionError};
use crate::env::Scenario;
use crate::geometry::Point;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

const BUILTIN: [(&str, &str); 3] = [
    (
        "orland-agdenes",
        include_str!("../../presets/replay/orland_agdenes.toml"),
    ),
    (
        "trondheim",
        include_str!("../../presets/replay/trondheim.toml"),
    ),
    ("froan", include_str!("../../presets/replay/froan.toml")),
];

#[derive(Debug, Error)]
pub enum PresetError {
    #[error("unknown preset `{0}` (expected orland-agdenes, trondheim, froan or a .toml path)")]
    Unknown(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("preset: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("terrain: {0}")]
    Terrain(#[from] TerrainError),
    #[error("ais: {0}")]
    Ais(#[from] AisError),
    #[error("waypoint {index}: {source}")]
    Projection {
        index: usize,
        source: ProjectionError,
    },
    #[error("ais log has no tracks to define a time window")]
    NoTracks,
    #[error(transparent)]
    Replay(#[from] ReplayError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReplayPreset {
    pub name: String,
    #[serde(default)]
    pub description: String,
    /// Waypoints were digitised from figures rather than surveyed.
    #[serde(default)]
    pub approximate: bool,
    pub terrain: PathBuf,
    pub ais: PathBuf,
    /// `[lat, lon]` in degrees.
    pub waypoints: Vec<[f64; 2]>,
    /// Start of the replay window; defaults to the earliest AIS report.
    #[serde(default)]
    pub window_start: Option<f64>,
    pub duration: f64,
    #[serde(default)]
    pub contour: ContourConfig,
    #[serde(default)]
    pub options: ReplayOptions,
}

impl ReplayPreset {
    pub fn builtin_names() -> impl Iterator<Item = &'static str> {
        BUILTIN.iter().map(|(n, _)| *n)
    }

    pub fn builtin(name: &str) -> Option<Self> {
        BUILTIN
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, text)| toml::from_str(text).expect("bundled presets parse"))
    }

    pub fn load(path: &Path) -> Result<Self, PresetError> {
        let text = std::fs::read_to_string(path).map_err(|source| PresetError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Ok(toml::from_str(&text)?)
    }

    /// A bundled name, or a preset file whose data paths are relative to it.
    pub fn resolve(spec: &str) -> Result<(Self, PathBuf), PresetError> {
        if let Some(p) = Self::builtin(spec) {
            return Ok((p, PathBuf::from(".")));
        }
        let path = Path::new(spec);
        if path.extension().is_some_and(|e| e == "toml") {
            let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
            return Ok((Self::load(path)?, base));
        }
        Err(PresetError::Unknown(spec.to_string()))
    }

    /// Waypoints in absolute NED zone-33 coordinates.
    pub fn planar_waypoints(&self) -> Result<Vec<Point>, PresetError> {
        self.waypoints
            .iter()
            .enumerate()
            .map(|(index, &[lat, lon])| {
                latlon_to_utm33(lat, lon)
                    .map(|(e, n)| Point::new(n, e))
                    .map_err(|source| PresetError::Projection { index, source })
            })
            .collect()
    }

    pub fn build(&self, base: &Path) -> Result<Scenario, PresetError> {
        let grid = load_terrain(&base.join(&self.terrain))?;
        let land = terrain_to_obstacles(&grid, &self.contour);
        let ais = load_ais(&base.join(&self.ais))?;
        let waypoints = self.planar_waypoints()?;
        let start = match self.window_start {
            Some(t) => t,
            None => ais
                .tracks
                .iter()
                .map(|t| t.start())
                .min_by(f64::total_cmp)
                .ok_or(PresetError::NoTracks)?,
        };
        Ok(build_replay_scenario(
            &self.name,
            &land,
            &ais.tracks,
            &waypoints,
            (start, start + self.duration),
            waypoints[0],
            &self.options,
        )?)
    }
}
