//! Segmented sphere layout (W = 2H).
//!
//! The left column (H/2 wide) stacks the north cap (top) and south cap
//! (bottom), each an azimuthal-equidistant disc inscribed in an H/2 square;
//! disc corners are inactive. The remaining 1.5H × H block holds the band
//! `|lat| ≤ band_lat` with longitude and latitude linear in x and y.
//!
//! Faces: 0 north cap, 1 south cap, 2 band.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::geometry::{latlon_vec, vec_latlon, Vec3};

/// Relative slack on the disc radius test so points computed on the rim
/// still count as inside.
const RIM_EPS: f64 = 1e-12;

pub(super) fn face_at(x: f64, y: f64, h: f64) -> Option<usize> {
    let side = h / 2.0;
    if x >= side {
        return Some(2);
    }
    let r = side / 2.0;
    let (face, cy) = if y <= side { (0, r) } else { (1, side + r) };
    let (dx, dy) = (x - r, y - cy);
    if dx * dx + dy * dy <= r * r * (1.0 + RIM_EPS) {
        Some(face)
    } else {
        None
    }
}

pub(super) fn unproject(face: usize, x: f64, y: f64, w: f64, h: f64, band_lat: f64) -> Vec3 {
    let side = h / 2.0;
    let r = side / 2.0;
    let cap_span = FRAC_PI_2 - band_lat;
    match face {
        0 => {
            let (dx, dy) = (x - r, y - r);
            let colat = dx.hypot(dy) / r * cap_span;
            latlon_vec(FRAC_PI_2 - colat, dx.atan2(dy))
        }
        1 => {
            let (dx, dy) = (x - r, y - side - r);
            let colat = dx.hypot(dy) / r * cap_span;
            latlon_vec(colat - FRAC_PI_2, dx.atan2(-dy))
        }
        _ => {
            let lon = 2.0 * PI * (x - side) / (w - side) - PI;
            let lat = band_lat - 2.0 * band_lat * y / h;
            latlon_vec(lat, lon)
        }
    }
}

pub(super) fn project(d: Vec3, w: f64, h: f64, band_lat: f64) -> (usize, f64, f64) {
    let side = h / 2.0;
    let r = side / 2.0;
    let cap_span = FRAC_PI_2 - band_lat;
    let ll = vec_latlon(d);
    let (lat, lon) = (ll.lat(), ll.lon());
    if lat >= band_lat {
        let rho = (FRAC_PI_2 - lat) / cap_span * r;
        (0, r + rho * lon.sin(), r + rho * lon.cos())
    } else if lat <= -band_lat {
        let rho = (FRAC_PI_2 + lat) / cap_span * r;
        (1, r + rho * lon.sin(), side + r - rho * lon.cos())
    } else {
        let x = side + (lon + PI) / (2.0 * PI) * (w - side);
        let y = (band_lat - lat) / (2.0 * band_lat) * h;
        (2, x, y)
    }
}
