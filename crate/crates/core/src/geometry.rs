//! Spherical coordinate types shared by every projection.
//!
//! Frame: +X points through (lat 0, lon 0), +Y through (lat 0, lon +π/2) and
//! +Z through the north pole. All angles are radians.

use std::f64::consts::{FRAC_PI_2, PI};
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Plain 3-vector used for intermediate (not necessarily unit) directions.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const X: Vec3 = Vec3::new(1.0, 0.0, 0.0);
    pub const Y: Vec3 = Vec3::new(0.0, 1.0, 0.0);
    pub const Z: Vec3 = Vec3::new(0.0, 0.0, 1.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn normalized(self) -> Vec3 {
        self * (1.0 / self.norm())
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// A unit direction on the sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereDir(Vec3);

impl SphereDir {
    /// Normalizes `v`. Fails on zero or non-finite vectors.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        Self::from_vec(Vec3::new(x, y, z))
    }

    pub fn from_vec(v: Vec3) -> Result<Self> {
        let n = v.norm();
        if !n.is_finite() || n == 0.0 {
            return Err(Error::InvalidInput(format!("cannot normalize direction {v:?}")));
        }
        Ok(SphereDir(v * (1.0 / n)))
    }

    /// Caller guarantees `v` is finite and nonzero.
    pub(crate) fn from_vec_unchecked(v: Vec3) -> Self {
        SphereDir(v.normalized())
    }

    pub fn x(&self) -> f64 {
        self.0.x
    }
    pub fn y(&self) -> f64 {
        self.0.y
    }
    pub fn z(&self) -> f64 {
        self.0.z
    }

    pub fn vec(&self) -> Vec3 {
        self.0
    }

    pub fn dot(&self, o: &SphereDir) -> f64 {
        self.0.dot(o.0)
    }
}

/// Latitude/longitude pair. `lat ∈ [−π/2, π/2]`, `lon ∈ [−π, π)`; at the poles
/// `lon` is 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatLon {
    lat: f64,
    lon: f64,
}

impl LatLon {
    pub fn new(lat: f64, lon: f64) -> Result<Self> {
        if !(lat.is_finite() && lon.is_finite()) {
            return Err(Error::InvalidInput("non-finite lat/lon".into()));
        }
        if !(-FRAC_PI_2..=FRAC_PI_2).contains(&lat) {
            return Err(Error::InvalidInput(format!("latitude {lat} outside [-pi/2, pi/2]")));
        }
        if !(-PI..PI).contains(&lon) {
            return Err(Error::InvalidInput(format!("longitude {lon} outside [-pi, pi)")));
        }
        let lon = if lat.abs() == FRAC_PI_2 { 0.0 } else { lon };
        Ok(LatLon { lat, lon })
    }

    pub fn lat(&self) -> f64 {
        self.lat
    }

    pub fn lon(&self) -> f64 {
        self.lon
    }
}

pub fn latlon_to_dir(p: LatLon) -> SphereDir {
    SphereDir(latlon_vec(p.lat, p.lon))
}

/// Unchecked lat/lon evaluation; also valid for out-of-range angles (a
/// latitude past a pole continues over it), which the extended face mappings
/// rely on.
pub(crate) fn latlon_vec(lat: f64, lon: f64) -> Vec3 {
    let (sl, cl) = lat.sin_cos();
    let (so, co) = lon.sin_cos();
    Vec3::new(cl * co, cl * so, sl)
}

/// Accepts any nonzero vector (renormalized internally).
pub fn dir_to_latlon(d: SphereDir) -> Result<LatLon> {
    let v = d.vec();
    let n = v.norm();
    if n == 0.0 || !n.is_finite() {
        return Err(Error::InvalidInput("zero direction".into()));
    }
    Ok(vec_latlon(v))
}

/// Lat/lon of a nonzero vector with the pole and antimeridian conventions
/// applied.
pub(crate) fn vec_latlon(v: Vec3) -> LatLon {
    let h = v.x.hypot(v.y);
    let lat = v.z.atan2(h);
    let mut lon = if h == 0.0 { 0.0 } else { v.y.atan2(v.x) };
    if lon >= PI {
        lon -= 2.0 * PI;
    }
    if lon < -PI || lon == PI {
        lon = -PI;
    }
    LatLon { lat, lon }
}

/// Great-circle angle between two unit directions, in `[0, π]`.
pub fn angular_error(a: &SphereDir, b: &SphereDir) -> f64 {
    // atan2 form keeps precision for nearly (anti)parallel vectors; it agrees
    // with acos(clamp(a·b)) everywhere.
    let c = a.vec().cross(b.vec()).norm();
    c.atan2(a.dot(b))
}

/// Solid angle of the spherical triangle (a, b, c), unit vectors.
pub(crate) fn triangle_solid_angle(a: Vec3, b: Vec3, c: Vec3) -> f64 {
    let num = a.dot(b.cross(c)).abs();
    let den = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
    2.0 * num.atan2(den)
}

/// Solid angle of the spherical quadrilateral a-b-c-d (in cyclic order).
pub(crate) fn quad_solid_angle(a: Vec3, b: Vec3, c: Vec3, d: Vec3) -> f64 {
    triangle_solid_angle(a, b, c) + triangle_solid_angle(a, c, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_4;

    fn close(a: Vec3, b: Vec3) -> bool {
        (a - b).norm() < 1e-15
    }

    #[test]
    fn latlon_anchor_points() {
        assert!(close(latlon_to_dir(LatLon::new(0.0, 0.0).unwrap()).vec(), Vec3::X));
        assert!(close(latlon_to_dir(LatLon::new(FRAC_PI_2, 0.0).unwrap()).vec(), Vec3::Z));
        assert!(close(latlon_to_dir(LatLon::new(0.0, FRAC_PI_2).unwrap()).vec(), Vec3::Y));
    }

    #[test]
    fn latlon_range_checked() {
        assert!(LatLon::new(1.6, 0.0).is_err());
        assert!(LatLon::new(0.0, PI).is_err());
        assert!(LatLon::new(0.0, -PI).is_ok());
        assert!(LatLon::new(f64::NAN, 0.0).is_err());
        assert_eq!(LatLon::new(-FRAC_PI_2, 2.0).unwrap().lon(), 0.0);
    }

    #[test]
    fn dir_to_latlon_conventions() {
        let s = dir_to_latlon(SphereDir::new(0.0, 0.0, -1.0).unwrap()).unwrap();
        assert_eq!((s.lat(), s.lon()), (-FRAC_PI_2, 0.0));
        let e = dir_to_latlon(SphereDir::new(1.0, 0.0, 0.0).unwrap()).unwrap();
        assert_eq!((e.lat(), e.lon()), (0.0, 0.0));
        let w = dir_to_latlon(SphereDir::new(-1.0, 0.0, 0.0).unwrap()).unwrap();
        assert_eq!(w.lon(), -PI);
        assert!(SphereDir::new(0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn angular_error_examples() {
        let x = SphereDir::new(1.0, 0.0, 0.0).unwrap();
        let y = SphereDir::new(0.0, 1.0, 0.0).unwrap();
        let nx = SphereDir::new(-1.0, 0.0, 0.0).unwrap();
        assert_eq!(angular_error(&x, &x), 0.0);
        assert!((angular_error(&x, &y) - FRAC_PI_2).abs() < 1e-15);
        assert!((angular_error(&x, &nx) - PI).abs() < 1e-15);
    }

    #[test]
    fn octant_triangle_is_an_eighth_of_the_sphere() {
        let a = triangle_solid_angle(Vec3::X, Vec3::Y, Vec3::Z);
        assert!((a - PI / 2.0).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn latlon_roundtrip(lat in (-FRAC_PI_2 + 1e-6)..(FRAC_PI_2 - 1e-6), lon in -PI..PI) {
            let p = LatLon::new(lat, lon).unwrap();
            let d = latlon_to_dir(p);
            prop_assert!((d.vec().norm() - 1.0).abs() < 1e-12);
            let q = dir_to_latlon(d).unwrap();
            prop_assert!((q.lat() - lat).abs() < 1e-12);
            let dl = (q.lon() - lon).abs();
            prop_assert!(dl < 1e-12 || (2.0 * PI - dl) < 1e-12);
        }

        #[test]
        fn dir_roundtrip(x in -1.0f64..1.0, y in -1.0f64..1.0, z in -1.0f64..1.0) {
            prop_assume!(x * x + y * y + z * z > 1e-6);
            let d = SphereDir::new(x, y, z).unwrap();
            let back = latlon_to_dir(dir_to_latlon(d).unwrap());
            prop_assert!(angular_error(&d, &back) < 1e-12);
        }

        #[test]
        fn angular_error_in_range(lat in -1.5f64..1.5, lon in -3.0f64..3.0) {
            let d = latlon_to_dir(LatLon::new(lat, lon).unwrap());
            let e = angular_error(&d, &latlon_to_dir(LatLon::new(FRAC_PI_4, 0.0).unwrap()));
            prop_assert!((0.0..=PI).contains(&e));
        }
    }
}
