//! Elevation rasters in the ESRI ASCII grid format.
//!
//! ```text
//! ncols        4
//! nrows        3
//! xllcorner    270000.0      (or xllcenter)
//! yllcorner    7040000.0     (or yllcenter)
//! cellsize     10.0
//! NODATA_value -9999         (optional)
//! <nrows lines of ncols values, northernmost row first>
//! ```
//!
//! Coordinates are zone-33 easting/northing in metres.

use ndarray::Array2;
use sha2::{Digest, Sha256};
use std::path::Path;
use thiserror::Error;

/// Elevation assigned to no-data cells; far below any sea level.
pub const NO_DATA: f64 = -9999.0;

#[derive(Debug, Error)]
pub enum TerrainError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TerrainGrid {
    /// Easting of the western edge of the grid.
    pub x_ll: f64,
    /// Northing of the southern edge of the grid.
    pub y_ll: f64,
    pub cell_size: f64,
    /// Elevations in metres; row 0 is the northernmost row.
    pub elevation: Array2<f64>,
}

impl TerrainGrid {
    pub fn rows(&self) -> usize {
        self.elevation.nrows()
    }

    pub fn cols(&self) -> usize {
        self.elevation.ncols()
    }

    /// (easting, northing) of the centre of cell (row, col).
    pub fn cell_center(&self, row: usize, col: usize) -> (f64, f64) {
        (
            self.x_ll + (col as f64 + 0.5) * self.cell_size,
            self.y_ll + ((self.rows() - row) as f64 - 0.5) * self.cell_size,
        )
    }

    /// SHA-256 over the little-endian bytes of the row-major elevations.
    pub fn checksum(&self) -> String {
        let mut h = Sha256::new();
        for v in self.elevation.iter() {
            h.update(v.to_le_bytes());
        }
        hex::encode(h.finalize())
    }

    pub fn parse(text: &str) -> Result<Self, TerrainError> {
        let err = |line: usize, message: String| TerrainError::Parse { line, message };
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l))
            .filter(|(_, l)| !l.trim().is_empty());

        let mut ncols = None;
        let mut nrows = None;
        let mut x = None;
        let mut y = None;
        let mut centered = (false, false);
        let mut cell = None;
        let mut nodata = None;
        let mut first_data = None;
        for (no, line) in lines.by_ref() {
            let mut parts = line.split_whitespace();
            let key = parts.next().unwrap_or_default().to_ascii_lowercase();
            let value = parts.next();
            let known = matches!(
                key.as_str(),
                "ncols"
                    | "nrows"
                    | "xllcorner"
                    | "xllcenter"
                    | "yllcorner"
                    | "yllcenter"
                    | "cellsize"
                    | "nodata_value"
            );
            if !known {
                first_data = Some((no, line));
                break;
            }
            let value = value.ok_or_else(|| err(no, format!("header key `{key}` has no value")))?;
            if parts.next().is_some() {
                return Err(err(no, format!("header key `{key}` has trailing tokens")));
            }
            let num: f64 = value
                .parse()
                .map_err(|_| err(no, format!("`{value}` is not a number")))?;
            let count = |v: f64| {
                if v >= 1.0 && v.fract() == 0.0 {
                    Ok(v as usize)
                } else {
                    Err(err(no, format!("{key} must be a positive integer")))
                }
            };
            match key.as_str() {
                "ncols" => ncols = Some(count(num)?),
                "nrows" => nrows = Some(count(num)?),
                "xllcorner" | "xllcenter" => {
                    x = Some(num);
                    centered.0 = key == "xllcenter";
                }
                "yllcorner" | "yllcenter" => {
                    y = Some(num);
                    centered.1 = key == "yllcenter";
                }
                "cellsize" => {
                    if !(num > 0.0 && num.is_finite()) {
                        return Err(err(no, "cellsize must be positive".into()));
                    }
                    cell = Some(num);
                }
                _ => nodata = Some(num),
            }
        }
        let header_line = first_data.map_or(text.lines().count() + 1, |(n, _)| n);
        let missing = |k: &str| err(header_line, format!("header is missing `{k}`"));
        let ncols = ncols.ok_or_else(|| missing("ncols"))?;
        let nrows = nrows.ok_or_else(|| missing("nrows"))?;
        let cell = cell.ok_or_else(|| missing("cellsize"))?;
        let mut x = x.ok_or_else(|| missing("xllcorner"))?;
        let mut y = y.ok_or_else(|| missing("yllcorner"))?;
        if centered.0 {
            x -= cell / 2.0;
        }
        if centered.1 {
            y -= cell / 2.0;
        }

        let mut values = Vec::with_capacity(ncols * nrows);
        let mut rows = 0;
        for (no, line) in first_data.into_iter().chain(lines) {
            let before = values.len();
            for tok in line.split_whitespace() {
                let v: f64 = tok
                    .parse()
                    .map_err(|_| err(no, format!("`{tok}` is not a number")))?;
                let v = if Some(v) == nodata { NO_DATA } else { v };
                if !v.is_finite() {
                    return Err(err(no, "elevation is not finite".into()));
                }
                values.push(v);
            }
            if values.len() - before != ncols {
                return Err(err(
                    no,
                    format!("expected {ncols} values, found {}", values.len() - before),
                ));
            }
            rows += 1;
            if rows > nrows {
                return Err(err(no, format!("more than {nrows} data rows")));
            }
        }
        if rows != nrows {
            return Err(err(
                text.lines().count(),
                format!("expected {nrows} data rows, found {rows}"),
            ));
        }
        let elevation = Array2::from_shape_vec((nrows, ncols), values).expect("counted");
        Ok(Self {
            x_ll: x,
            y_ll: y,
            cell_size: cell,
            elevation,
        })
    }

    pub fn to_asc(&self) -> String {
        let mut s = format!(
            "ncols {}\nnrows {}\nxllcorner {}\nyllcorner {}\ncellsize {}\nNODATA_value {}\n",
            self.cols(),
            self.rows(),
            self.x_ll,
            self.y_ll,
            self.cell_size,
            NO_DATA
        );
        for row in self.elevation.rows() {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        s
    }
}

pub fn load_terrain(path: &Path) -> Result<TerrainGrid, TerrainError> {
    let text = std::fs::read_to_string(path).map_err(|source| TerrainError::Io {
        path: path.display().to_string(),
        source,
    })?;
    TerrainGrid::parse(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "ncols 2\nnrows 2\nxllcorner 100\nyllcorner 200\ncellsize 10\nNODATA_value -1\n1.5 -1\n-3 4\n";

    #[test]
    fn parses_and_round_trips() {
        let g = TerrainGrid::parse(SMALL).unwrap();
        assert_eq!(g.elevation, ndarray::array![[1.5, NO_DATA], [-3.0, 4.0]]);
        assert_eq!(g.cell_center(0, 0), (105.0, 215.0));
        assert_eq!(TerrainGrid::parse(&g.to_asc()).unwrap(), g);
    }

    #[test]
    fn center_registration() {
        let g = TerrainGrid::parse("ncols 1\nnrows 1\nxllcenter 5\nyllcenter 5\ncellsize 10\n0\n")
            .unwrap();
        assert_eq!((g.x_ll, g.y_ll), (0.0, 0.0));
    }

    #[test]
    fn errors_carry_line_numbers() {
        let bad_row = SMALL.replace("-3 4", "-3");
        match TerrainGrid::parse(&bad_row) {
            Err(TerrainError::Parse { line, .. }) => assert_eq!(line, 8),
            other => panic!("{other:?}"),
        }
        match TerrainGrid::parse("ncols 2\nnrows x\n") {
            Err(TerrainError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(TerrainGrid::parse("ncols 1\nnrows 1\ncellsize 1\n0\n").is_err());
    }
}
