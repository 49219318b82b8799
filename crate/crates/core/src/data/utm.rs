//! Transverse Mercator projection (Krüger n-series, fourth order) fixed to
//! UTM zone 33 on WGS84.

use thiserror::Error;

pub const SEMI_MAJOR: f64 = 6_378_137.0;
pub const FLATTENING: f64 = 1.0 / 298.257_223_563;
pub const SCALE: f64 = 0.9996;
pub const FALSE_EASTING: f64 = 500_000.0;
pub const FALSE_NORTHING_SOUTH: f64 = 10_000_000.0;
/// Central meridian of zone 33 in degrees.
pub const CENTRAL_MERIDIAN: f64 = 15.0;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum ProjectionError {
    #[error("latitude {0}° outside the UTM domain (-80, 84)")]
    Latitude(f64),
    #[error("longitude {0}° is not finite")]
    Longitude(f64),
    #[error("coordinates ({0}, {1}) are not finite")]
    Planar(f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hemisphere {
    North,
    South,
}

struct Series {
    a_hat: f64,
    alpha: [f64; 4],
    beta: [f64; 4],
    delta: [f64; 4],
    n: f64,
}

fn series() -> Series {
    let n = FLATTENING / (2.0 - FLATTENING);
    let (n2, n3, n4) = (n * n, n * n * n, n * n * n * n);
    Series {
        a_hat: SEMI_MAJOR / (1.0 + n) * (1.0 + n2 / 4.0 + n4 / 64.0),
        alpha: [
            n / 2.0 - 2.0 * n2 / 3.0 + 5.0 * n3 / 16.0 + 41.0 * n4 / 180.0,
            13.0 * n2 / 48.0 - 3.0 * n3 / 5.0 + 557.0 * n4 / 1440.0,
            61.0 * n3 / 240.0 - 103.0 * n4 / 140.0,
            49561.0 * n4 / 161_280.0,
        ],
        beta: [
            n / 2.0 - 2.0 * n2 / 3.0 + 37.0 * n3 / 96.0 - n4 / 360.0,
            n2 / 48.0 + n3 / 15.0 - 437.0 * n4 / 1440.0,
            17.0 * n3 / 480.0 - 37.0 * n4 / 840.0,
            4397.0 * n4 / 161_280.0,
        ],
        delta: [
            2.0 * n - 2.0 * n2 / 3.0 - 2.0 * n3 + 116.0 * n4 / 45.0,
            7.0 * n2 / 3.0 - 8.0 * n3 / 5.0 - 227.0 * n4 / 45.0,
            56.0 * n3 / 15.0 - 136.0 * n4 / 35.0,
            4279.0 * n4 / 630.0,
        ],
        n,
    }
}

/// Projects geodetic WGS84 degrees to zone-33 (easting, northing) in metres,
/// regardless of the point's natural zone. Southern latitudes use the
/// 10 000 km false northing.
pub fn latlon_to_utm33(lat: f64, lon: f64) -> Result<(f64, f64), ProjectionError> {
    if !(lat > -80.0 && lat < 84.0) {
        return Err(ProjectionError::Latitude(lat));
    }
    if !lon.is_finite() {
        return Err(ProjectionError::Longitude(lon));
    }
    let s = series();
    let phi = lat.to_radians();
    let lam = (lon - CENTRAL_MERIDIAN).to_radians();
    let k = 2.0 * s.n.sqrt() / (1.0 + s.n);
    let t = (phi.sin().atanh() - k * (k * phi.sin()).atanh()).sinh();
    let xi_p = t.atan2(lam.cos());
    let eta_p = (lam.sin() / (1.0 + t * t).sqrt()).atanh();
    let mut xi = xi_p;
    let mut eta = eta_p;
    for (j, a) in s.alpha.iter().enumerate() {
        let m = 2.0 * (j + 1) as f64;
        xi += a * (m * xi_p).sin() * (m * eta_p).cosh();
        eta += a * (m * xi_p).cos() * (m * eta_p).sinh();
    }
    let easting = FALSE_EASTING + SCALE * s.a_hat * eta;
    let mut northing = SCALE * s.a_hat * xi;
    if lat < 0.0 {
        northing += FALSE_NORTHING_SOUTH;
    }
    Ok((easting, northing))
}

/// Inverse of [`latlon_to_utm33`]; returns (lat°, lon°).
pub fn utm33_to_latlon(
    easting: f64,
    northing: f64,
    hemisphere: Hemisphere,
) -> Result<(f64, f64), ProjectionError> {
    if !(easting.is_finite() && northing.is_finite()) {
        return Err(ProjectionError::Planar(easting, northing));
    }
    let s = series();
    let n0 = match hemisphere {
        Hemisphere::North => 0.0,
        Hemisphere::South => FALSE_NORTHING_SOUTH,
    };
    let xi = (northing - n0) / (SCALE * s.a_hat);
    let eta = (easting - FALSE_EASTING) / (SCALE * s.a_hat);
    let mut xi_p = xi;
    let mut eta_p = eta;
    for (j, b) in s.beta.iter().enumerate() {
        let m = 2.0 * (j + 1) as f64;
        xi_p -= b * (m * xi).sin() * (m * eta).cosh();
        eta_p -= b * (m * xi).cos() * (m * eta).sinh();
    }
    let chi = (xi_p.sin() / eta_p.cosh()).asin();
    let mut phi = chi;
    for (j, d) in s.delta.iter().enumerate() {
        phi += d * (2.0 * (j + 1) as f64 * chi).sin();
    }
    let lam = eta_p.sinh().atan2(xi_p.cos());
    Ok((phi.to_degrees(), CENTRAL_MERIDIAN + lam.to_degrees()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn origin_of_zone() {
        let (e, n) = latlon_to_utm33(0.0, 15.0).unwrap();
        assert!((e - 500_000.0).abs() < 1e-9);
        assert!(n.abs() < 1e-9);
    }

    #[test]
    fn rejects_polar_latitudes() {
        assert_eq!(
            latlon_to_utm33(84.0, 15.0),
            Err(ProjectionError::Latitude(84.0))
        );
        assert!(latlon_to_utm33(-80.0, 15.0).is_err());
        assert!(latlon_to_utm33(10.0, f64::NAN).is_err());
    }

    #[test]
    fn southern_hemisphere_round_trip() {
        let (e, n) = latlon_to_utm33(-33.9, 18.4).unwrap();
        assert!(n > 6_000_000.0);
        let (lat, lon) = utm33_to_latlon(e, n, Hemisphere::South).unwrap();
        assert!((lat + 33.9).abs() < 1e-9 && (lon - 18.4).abs() < 1e-9);
    }
}
