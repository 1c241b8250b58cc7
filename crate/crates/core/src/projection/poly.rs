//! Polyhedral unfoldings (ISP, OHP) with per-face gnomonic projection.
//!
//! Nets are stored in normalized raster coordinates (`[0,1]²`) and scaled to
//! the grid at use. A raster point inside a triangle maps through its
//! barycentric coordinates onto the flat polyhedron face, then radially onto
//! the sphere.
//!
//! ISP net (unit = one triangle edge horizontally, one triangle height
//! vertically, 5.5 × 3): five north triangles with apexes on the top border,
//! a ten-triangle zigzag strip around the equator, five south triangles with
//! apexes on the bottom border. OHP net (4 × 2): four diamonds side by side,
//! each a north triangle over a south triangle sharing an equatorial edge.
//! Longitude increases with x in both nets. Everything outside the triangles
//! is inactive.
//!
//! Edges shared in the plane (folds) are continuous. Edges of the net
//! boundary (cuts) reappear elsewhere in the net; a cut edge belongs to the
//! lower-indexed of its two faces so that `face_at` and `project` agree on
//! seam points.

use std::f64::consts::PI;
use std::sync::OnceLock;

use super::{ProjectionFormat, TIE_EPS};
use crate::geometry::Vec3;

const BARY_EPS: f64 = 1e-12;

#[derive(Debug)]
struct Triangle {
    p: [(f64, f64); 3],
    v: [Vec3; 3],
    normal: Vec3,
    plane: f64,
    /// Inverse of the 3×3 matrix with columns v0, v1, v2 (row-major).
    inv: [[f64; 3]; 3],
    /// Edge opposite vertex i is closed (owned by this face).
    closed: [bool; 3],
}

#[derive(Debug)]
pub(super) struct Net {
    tris: Vec<Triangle>,
}

fn invert3(c: [Vec3; 3]) -> [[f64; 3]; 3] {
    // Rows of the inverse are the cross products of column pairs over det.
    let r0 = c[1].cross(c[2]);
    let r1 = c[2].cross(c[0]);
    let r2 = c[0].cross(c[1]);
    let det = c[0].dot(r0);
    let row = |r: Vec3| [r.x / det, r.y / det, r.z / det];
    [row(r0), row(r1), row(r2)]
}

fn bary2(t: &Triangle, x: f64, y: f64) -> [f64; 3] {
    let (ax, ay) = t.p[0];
    let (e0x, e0y) = (t.p[1].0 - ax, t.p[1].1 - ay);
    let (e1x, e1y) = (t.p[2].0 - ax, t.p[2].1 - ay);
    let (qx, qy) = (x - ax, y - ay);
    let den = e0x * e1y - e1x * e0y;
    let l1 = (qx * e1y - e1x * qy) / den;
    let l2 = (e0x * qy - qx * e0y) / den;
    [1.0 - l1 - l2, l1, l2]
}

/// Net-plane corners and matching sphere corners of one face.
type FaceSpec = ([(f64, f64); 3], [Vec3; 3]);

impl Net {
    fn build(faces: Vec<FaceSpec>, scale: (f64, f64)) -> Net {
        let mut tris: Vec<Triangle> = faces
            .into_iter()
            .map(|(p, v)| {
                let p = p.map(|(x, y)| (x / scale.0, y / scale.1));
                let normal = (v[0] + v[1] + v[2]).normalized();
                Triangle {
                    p,
                    v,
                    normal,
                    plane: v[0].dot(normal),
                    inv: invert3(v),
                    closed: [true; 3],
                }
            })
            .collect();

        let same2 = |a: (f64, f64), b: (f64, f64)| (a.0 - b.0).abs() < 1e-9 && (a.1 - b.1).abs() < 1e-9;
        let same3 = |a: Vec3, b: Vec3| (a - b).norm() < 1e-9;
        let n = tris.len();
        for a in 0..n {
            for k in 0..3 {
                let (i0, i1) = ((k + 1) % 3, (k + 2) % 3);
                let (p0, p1) = (tris[a].p[i0], tris[a].p[i1]);
                let (v0, v1) = (tris[a].v[i0], tris[a].v[i1]);
                let mut fold = false;
                let mut partner = None;
                for b in (0..n).filter(|&b| b != a) {
                    for m in 0..3 {
                        let (j0, j1) = ((m + 1) % 3, (m + 2) % 3);
                        let tb = &tris[b];
                        let shares3 = (same3(v0, tb.v[j0]) && same3(v1, tb.v[j1]))
                            || (same3(v0, tb.v[j1]) && same3(v1, tb.v[j0]));
                        if !shares3 {
                            continue;
                        }
                        partner = Some(b);
                        if (same2(p0, tb.p[j0]) && same2(p1, tb.p[j1]))
                            || (same2(p0, tb.p[j1]) && same2(p1, tb.p[j0]))
                        {
                            fold = true;
                        }
                    }
                }
                let partner = partner.expect("closed polyhedron: every edge has a partner face");
                tris[a].closed[k] = fold || a < partner;
            }
        }
        Net { tris }
    }

    fn contains(t: &Triangle, x: f64, y: f64) -> bool {
        let l = bary2(t, x, y);
        (0..3).all(|k| {
            if t.closed[k] {
                l[k] >= -BARY_EPS
            } else {
                l[k] > BARY_EPS
            }
        })
    }

    /// `x`, `y` normalized to `[0, 1]`.
    pub(super) fn face_at(&self, x: f64, y: f64) -> Option<usize> {
        self.tris.iter().position(|t| Self::contains(t, x, y))
    }

    pub(super) fn unproject(&self, face: usize, x: f64, y: f64) -> Vec3 {
        let t = &self.tris[face];
        let l = bary2(t, x, y);
        t.v[0] * l[0] + t.v[1] * l[1] + t.v[2] * l[2]
    }

    /// Face and normalized raster position of `d`.
    pub(super) fn project(&self, d: Vec3) -> (usize, f64, f64) {
        let max = self
            .tris
            .iter()
            .map(|t| d.dot(t.normal))
            .fold(f64::NEG_INFINITY, f64::max);
        let face = self
            .tris
            .iter()
            .position(|t| d.dot(t.normal) >= max - TIE_EPS)
            .unwrap_or(0);
        let t = &self.tris[face];
        let hit = d * (t.plane / d.dot(t.normal));
        let l: Vec<f64> = t
            .inv
            .iter()
            .map(|r| r[0] * hit.x + r[1] * hit.y + r[2] * hit.z)
            .collect();
        let x = l[0] * t.p[0].0 + l[1] * t.p[1].0 + l[2] * t.p[2].0;
        let y = l[0] * t.p[0].1 + l[1] * t.p[1].1 + l[2] * t.p[2].1;
        (face, x, y)
    }
}

fn lonlat(lat: f64, lon: f64) -> Vec3 {
    crate::geometry::latlon_vec(lat, lon)
}

pub(super) fn icosa() -> &'static Net {
    static NET: OnceLock<Net> = OnceLock::new();
    NET.get_or_init(|| {
        let ring = 0.5f64.atan();
        let n = Vec3::Z;
        let s = -Vec3::Z;
        let upper = |k: usize| lonlat(ring, -PI + PI / 5.0 + 2.0 * PI * (k % 5) as f64 / 5.0);
        let lower = |k: usize| lonlat(-ring, -PI + 2.0 * PI / 5.0 + 2.0 * PI * (k % 5) as f64 / 5.0);
        let mut faces = Vec::with_capacity(20);
        for k in 0..5 {
            let kf = k as f64;
            faces.push((
                [(kf + 0.5, 0.0), (kf, 1.0), (kf + 1.0, 1.0)],
                [n, upper(k), upper(k + 1)],
            ));
        }
        for k in 0..5 {
            let kf = k as f64;
            faces.push((
                [(kf, 1.0), (kf + 1.0, 1.0), (kf + 0.5, 2.0)],
                [upper(k), upper(k + 1), lower(k)],
            ));
        }
        for k in 0..5 {
            let kf = k as f64;
            faces.push((
                [(kf + 0.5, 2.0), (kf + 1.0, 1.0), (kf + 1.5, 2.0)],
                [lower(k), upper(k + 1), lower(k + 1)],
            ));
        }
        for k in 0..5 {
            let kf = k as f64;
            faces.push((
                [(kf + 0.5, 2.0), (kf + 1.5, 2.0), (kf + 1.0, 3.0)],
                [lower(k), lower(k + 1), s],
            ));
        }
        Net::build(faces, (5.5, 3.0))
    })
}

pub(super) fn octa() -> &'static Net {
    static NET: OnceLock<Net> = OnceLock::new();
    NET.get_or_init(|| {
        let eq = |k: usize| lonlat(0.0, -PI / 2.0 + PI / 2.0 * (k % 4) as f64);
        let mut faces = Vec::with_capacity(8);
        for k in 0..4 {
            let kf = k as f64;
            faces.push((
                [(kf + 0.5, 0.0), (kf, 1.0), (kf + 1.0, 1.0)],
                [Vec3::Z, eq(k), eq(k + 1)],
            ));
        }
        for k in 0..4 {
            let kf = k as f64;
            faces.push((
                [(kf, 1.0), (kf + 1.0, 1.0), (kf + 0.5, 2.0)],
                [eq(k), eq(k + 1), -Vec3::Z],
            ));
        }
        Net::build(faces, (4.0, 2.0))
    })
}

/// Fraction of the raster covered by triangles.
pub(super) fn active_fraction(format: ProjectionFormat) -> f64 {
    match format {
        // 20 triangles of area 1/2 in a 5.5 × 3 box.
        ProjectionFormat::Isp => 10.0 / 16.5,
        // 8 triangles of area 1/2 in a 4 × 2 box.
        ProjectionFormat::Ohp => 0.5,
        _ => 1.0,
    }
}
