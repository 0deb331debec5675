//! Viewports and great-circle distance.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const EARTH_RADIUS_KM: f64 = 6371.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeoError {
    #[error("latitude {0} is outside [-90, 90]")]
    Latitude(f64),
    #[error("longitude {0} is outside [-180, 180]")]
    Longitude(f64),
    #[error("viewport west {west} is east of east {east} (antimeridian wrap is not supported)")]
    Wraps { west: f64, east: f64 },
    #[error("viewport south {south} is north of north {north}")]
    Inverted { south: f64, north: f64 },
    #[error("bbox must be four comma-separated decimals west,south,east,north: {0:?}")]
    BboxFormat(String),
}

pub fn check_latitude(lat: f64) -> Result<f64, GeoError> {
    if (-90.0..=90.0).contains(&lat) {
        Ok(lat)
    } else {
        Err(GeoError::Latitude(lat))
    }
}

pub fn check_longitude(lon: f64) -> Result<f64, GeoError> {
    if (-180.0..=180.0).contains(&lon) {
        Ok(lon)
    } else {
        Err(GeoError::Longitude(lon))
    }
}

/// An inclusive lat/lon bounding box that never crosses the antimeridian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawViewport")]
pub struct Viewport {
    pub west: f64,
    pub south: f64,
    pub east: f64,
    pub north: f64,
}

#[derive(Deserialize)]
struct RawViewport {
    west: f64,
    south: f64,
    east: f64,
    north: f64,
}

impl TryFrom<RawViewport> for Viewport {
    type Error = GeoError;

    fn try_from(raw: RawViewport) -> Result<Self, Self::Error> {
        Viewport::new(raw.west, raw.south, raw.east, raw.north)
    }
}

impl Viewport {
    pub const WORLD: Viewport = Viewport {
        west: -180.0,
        south: -90.0,
        east: 180.0,
        north: 90.0,
    };

    pub fn new(west: f64, south: f64, east: f64, north: f64) -> Result<Self, GeoError> {
        check_longitude(west)?;
        check_longitude(east)?;
        check_latitude(south)?;
        check_latitude(north)?;
        if west > east {
            return Err(GeoError::Wraps { west, east });
        }
        if south > north {
            return Err(GeoError::Inverted { south, north });
        }
        Ok(Viewport {
            west,
            south,
            east,
            north,
        })
    }

    pub fn contains(&self, lat: f64, lon: f64) -> bool {
        (self.south..=self.north).contains(&lat) && (self.west..=self.east).contains(&lon)
    }

    /// Midpoint as (lat, lon).
    pub fn center(&self) -> (f64, f64) {
        ((self.south + self.north) / 2.0, (self.west + self.east) / 2.0)
    }
}

/// Parses the `west,south,east,north` wire format.
impl FromStr for Viewport {
    type Err = GeoError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| GeoError::BboxFormat(s.to_string()))?;
        match parts[..] {
            [w, s_, e, n] if parts.iter().all(|v| v.is_finite()) => Viewport::new(w, s_, e, n),
            _ => Err(GeoError::BboxFormat(s.to_string())),
        }
    }
}

impl fmt::Display for Viewport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{}", self.west, self.south, self.east, self.north)
    }
}

/// Great-circle distance in km by the spherical law of cosines.
pub fn distance_km(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let (p1, p2) = (lat1.to_radians(), lat2.to_radians());
    let dl = (lon2 - lon1).to_radians();
    let cos = p1.sin() * p2.sin() + p1.cos() * p2.cos() * dl.cos();
    EARTH_RADIUS_KM * cos.clamp(-1.0, 1.0).acos()
}
