//! Real-world inputs: terrain rasters, AIS logs, the zone-33 projection and
//! replay scenario assembly.

pub mod ais;
pub mod contour;
pub mod presets;
pub mod replay;
pub mod terrain;
pub mod utm;

pub use ais::{load_ais, AisLoad, AisPoint, AisTrack};
pub use contour::{terrain_to_obstacles, ContourConfig};
pub use presets::{PresetError, ReplayPreset};
pub use replay::{build_replay_scenario, ReplayError, ReplayOptions};
pub use terrain::{load_terrain, TerrainGrid};
pub use utm::{latlon_to_utm33, utm33_to_latlon, Hemisphere};
