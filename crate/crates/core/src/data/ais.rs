//! AIS position reports in delimited text.
//!
//! Header: `id,timestamp,lat,lon,speed,heading`. `timestamp` is either Unix
//! seconds or an RFC 3339 instant; `speed` (knots) and `heading` (degrees)
//! may be empty. Rows that fail to parse are skipped and counted.

use super::utm::latlon_to_utm33;
use crate::geometry::Point;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;
use thiserror::Error;

/// Larger gaps between reports split a vessel's history into separate tracks.
pub const MAX_GAP_S: f64 = 600.0;
pub const KNOT: f64 = 1852.0 / 3600.0;

#[derive(Debug, Error)]
pub enum AisError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("missing column `{0}` in header")]
    Column(&'static str),
    #[error("malformed header: {0}")]
    Header(csv::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AisPoint {
    pub t: f64,
    pub lat: f64,
    pub lon: f64,
    pub speed_knots: Option<f64>,
    pub heading_deg: Option<f64>,
    /// Zone-33 position in the NED plane (x = northing, y = easting).
    pub position: Point,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AisTrack {
    pub id: String,
    /// Strictly increasing in `t`.
    pub points: Vec<AisPoint>,
}

impl AisTrack {
    pub fn start(&self) -> f64 {
        self.points[0].t
    }

    pub fn end(&self) -> f64 {
        self.points[self.points.len() - 1].t
    }

    /// Planar speed between consecutive reports, m/s.
    pub fn derived_speeds(&self) -> Vec<f64> {
        self.points
            .windows(2)
            .map(|w| (w[1].position - w[0].position).norm() / (w[1].t - w[0].t))
            .collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AisLoad {
    pub tracks: Vec<AisTrack>,
    /// Rows dropped as unparseable, out of domain or duplicated in time.
    pub skipped: usize,
    pub warnings: Vec<String>,
}

fn parse_time(s: &str) -> Option<f64> {
    if let Ok(v) = s.parse::<f64>() {
        return v.is_finite().then_some(v);
    }
    let dt = chrono::DateTime::parse_from_rfc3339(s).ok()?;
    Some(dt.timestamp() as f64 + dt.timestamp_subsec_nanos() as f64 * 1e-9)
}

fn optional(s: &str) -> Result<Option<f64>, ()> {
    if s.is_empty() {
        return Ok(None);
    }
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(Some(v)),
        _ => Err(()),
    }
}

pub fn parse_ais<R: std::io::Read>(reader: R) -> Result<AisLoad, AisError> {
    let mut rdr = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers().map_err(AisError::Header)?.clone();
    let col = |name: &'static str| {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or(AisError::Column(name))
    };
    let load = AisLoad::default();
    if headers.is_empty() {
        return Ok(load);
    }
    let idx = [
        col("id")?,
        col("timestamp")?,
        col("lat")?,
        col("lon")?,
        col("speed")?,
        col("heading")?,
    ];

    let mut load = load;
    let mut by_id: BTreeMap<String, Vec<AisPoint>> = BTreeMap::new();
    for (k, rec) in rdr.records().enumerate() {
        let line = k + 2;
        let mut skip = |why: String| {
            load.skipped += 1;
            log::warn!("AIS line {line}: {why}");
            load.warnings.push(format!("line {line}: {why}"));
        };
        let rec = match rec {
            Ok(r) => r,
            Err(e) => {
                skip(e.to_string());
                continue;
            }
        };
        let field = |i: usize| rec.get(idx[i]).unwrap_or("");
        let id = field(0).to_string();
        let parsed = (|| {
            if id.is_empty() {
                return Err("empty id".to_string());
            }
            let t = parse_time(field(1)).ok_or("bad timestamp")?;
            let lat: f64 = field(2).parse().map_err(|_| "bad latitude")?;
            let lon: f64 = field(3).parse().map_err(|_| "bad longitude")?;
            let speed = optional(field(4)).map_err(|_| "bad speed")?;
            let heading = optional(field(5)).map_err(|_| "bad heading")?;
            let (e, n) = latlon_to_utm33(lat, lon).map_err(|e| e.to_string())?;
            Ok(AisPoint {
                t,
                lat,
                lon,
                speed_knots: speed,
                heading_deg: heading,
                position: Point::new(n, e),
            })
        })();
        match parsed {
            Ok(p) => by_id.entry(id).or_default().push(p),
            Err(why) => skip(why),
        }
    }

    for (id, mut pts) in by_id {
        pts.sort_by(|a, b| a.t.total_cmp(&b.t));
        let before = pts.len();
        pts.dedup_by(|b, a| a.t == b.t);
        if pts.len() < before {
            load.skipped += before - pts.len();
            load.warnings.push(format!(
                "vessel {id}: {} duplicate timestamps dropped",
                before - pts.len()
            ));
        }
        let mut current: Vec<AisPoint> = Vec::new();
        for p in pts {
            if current.last().is_some_and(|q| p.t - q.t > MAX_GAP_S) {
                load.tracks.push(AisTrack {
                    id: id.clone(),
                    points: std::mem::take(&mut current),
                });
            }
            current.push(p);
        }
        if !current.is_empty() {
            load.tracks.push(AisTrack {
                id,
                points: current,
            });
        }
    }
    Ok(load)
}

pub fn load_ais(path: &Path) -> Result<AisLoad, AisError> {
    let file = std::fs::File::open(path).map_err(|source| AisError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_ais(file)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> AisLoad {
        parse_ais(s.as_bytes()).unwrap()
    }

    #[test]
    fn empty_input() {
        assert!(parse("").tracks.is_empty());
        assert!(parse("id,timestamp,lat,lon,speed,heading\n")
            .tracks
            .is_empty());
    }

    #[test]
    fn two_rows_one_track() {
        let l =
            parse("id,timestamp,lat,lon,speed,heading\nA,0,63.4,10.4,5,90\nA,10,63.4,10.401,,\n");
        assert_eq!(l.tracks.len(), 1);
        assert_eq!(l.tracks[0].points.len(), 2);
        assert_eq!(l.tracks[0].points[1].speed_knots, None);
    }

    #[test]
    fn groups_sorts_and_splits() {
        let l = parse(
            "id,timestamp,lat,lon,speed,heading\n\
             B,20,63.41,10.4,,\nA,10,63.4,10.4,,\nB,0,63.40,10.4,,\nA,0,63.4,10.3,,\n\
             A,2000,63.4,10.5,,\nB,x,1,1,,\nC,5,95,10,,\n",
        );
        assert_eq!(l.skipped, 2);
        let ids: Vec<(&str, usize)> = l
            .tracks
            .iter()
            .map(|t| (t.id.as_str(), t.points.len()))
            .collect();
        assert_eq!(ids, vec![("A", 2), ("A", 1), ("B", 2)]);
        assert_eq!(l.tracks[2].points[0].t, 0.0);
    }

    #[test]
    fn rfc3339_timestamps() {
        let l = parse("id,timestamp,lat,lon,speed,heading\nA,1970-01-01T00:01:00Z,63,10,,\n");
        assert_eq!(l.tracks[0].points[0].t, 60.0);
    }

    #[test]
    fn missing_column_is_an_error() {
        assert!(matches!(
            parse_ais("id,lat,lon\n".as_bytes()),
            Err(AisError::Column("timestamp"))
        ));
    }
}
