//! Cube-based layouts: CMP/EAC (3×2) and TSP.
//!
//! CMP/EAC face order follows the raster: top row Left(−Y), Front(+X),
//! Right(+Y); bottom row Down(−Z), Back(−X), Up(+Z). A face point is
//! `normal + u·right + v·down` with `u, v ∈ [−1, 1]` increasing with raster x
//! and y.

use super::{eac_forward, eac_inverse, TIE_EPS};
use crate::geometry::Vec3;

struct FaceBasis {
    normal: Vec3,
    right: Vec3,
    down: Vec3,
}

const fn basis(normal: Vec3, right: Vec3, down: Vec3) -> FaceBasis {
    FaceBasis { normal, right, down }
}

const fn v(x: f64, y: f64, z: f64) -> Vec3 {
    Vec3::new(x, y, z)
}

const CUBE: [FaceBasis; 6] = [
    basis(v(0., -1., 0.), v(1., 0., 0.), v(0., 0., -1.)),  // left
    basis(v(1., 0., 0.), v(0., 1., 0.), v(0., 0., -1.)),   // front
    basis(v(0., 1., 0.), v(-1., 0., 0.), v(0., 0., -1.)),  // right
    basis(v(0., 0., -1.), v(0., 1., 0.), v(-1., 0., 0.)),  // down
    basis(v(-1., 0., 0.), v(0., -1., 0.), v(0., 0., -1.)), // back
    basis(v(0., 0., 1.), v(0., 1., 0.), v(1., 0., 0.)),    // up
];

/// Index of the face maximizing `score`, lowest index on near-ties.
fn best_face(scores: &[f64]) -> usize {
    let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    scores.iter().position(|&s| s >= max - TIE_EPS).unwrap_or(0)
}

/// Lowest face whose closed cell contains the coordinate.
fn cell(c: f64, size: f64, count: usize) -> usize {
    let k = (c / size).ceil() as isize - 1;
    k.clamp(0, count as isize - 1) as usize
}

pub(super) fn cube_face_at(x: f64, y: f64, face: f64) -> usize {
    cell(y, face, 2) * 3 + cell(x, face, 3)
}

pub(super) fn cube_unproject(f: usize, x: f64, y: f64, face: f64, equi_angular: bool) -> Vec3 {
    let (col, row) = ((f % 3) as f64, (f / 3) as f64);
    let mut u = 2.0 * (x - col * face) / face - 1.0;
    let mut w = 2.0 * (y - row * face) / face - 1.0;
    if equi_angular {
        u = eac_inverse(u);
        w = eac_inverse(w);
    }
    let b = &CUBE[f];
    b.normal + b.right * u + b.down * w
}

pub(super) fn cube_project(d: Vec3, face: f64, equi_angular: bool) -> (usize, f64, f64) {
    let scores: Vec<f64> = CUBE.iter().map(|b| d.dot(b.normal)).collect();
    let f = best_face(&scores);
    let b = &CUBE[f];
    let a = scores[f];
    let mut u = d.dot(b.right) / a;
    let mut w = d.dot(b.down) / a;
    if equi_angular {
        u = eac_forward(u.clamp(-1.0, 1.0));
        w = eac_forward(w.clamp(-1.0, 1.0));
    }
    let (col, row) = ((f % 3) as f64, (f / 3) as f64);
    (f, (col + (u + 1.0) / 2.0) * face, (row + (w + 1.0) / 2.0) * face)
}

// TSP: the left half (H×H) is the gnomonic front face. The right half is a
// square with local coordinates p (right), q (down) in [−1, 1]: the back face
// fills the centered square max(|p|,|q|) ≤ ratio, and the four trapezoids
// between it and the outer border carry the side faces. Each trapezoid's
// outer edge meets the front face edge on the sphere, its inner edge the back
// face.
//
// Face order: 0 front(+X), 1 back(−X), 2 +Y (left trapezoid), 3 −Y (right),
// 4 +Z (top), 5 −Z (bottom).

const TSP_NORMALS: [Vec3; 6] = [
    v(1., 0., 0.),
    v(-1., 0., 0.),
    v(0., 1., 0.),
    v(0., -1., 0.),
    v(0., 0., 1.),
    v(0., 0., -1.),
];

fn tsp_local(x: f64, y: f64, h: f64) -> (f64, f64) {
    (2.0 * (x - h) / h - 1.0, 2.0 * y / h - 1.0)
}

pub(super) fn tsp_face_at(x: f64, y: f64, h: f64, ratio: f64) -> usize {
    if x <= h {
        return 0;
    }
    let (p, q) = tsp_local(x, y, h);
    // Same tie tolerance as `best_face`, so diagonal seams resolve the same
    // way in both directions.
    if p.abs().max(q.abs()) <= ratio + TIE_EPS {
        1
    } else if p.abs() >= q.abs() - TIE_EPS {
        if p < 0.0 {
            2
        } else {
            3
        }
    } else if q < 0.0 {
        4
    } else {
        5
    }
}

pub(super) fn tsp_unproject(f: usize, x: f64, y: f64, h: f64, ratio: f64) -> Vec3 {
    if f == 0 {
        let u = 2.0 * x / h - 1.0;
        let w = 2.0 * y / h - 1.0;
        return v(1.0, u, -w);
    }
    let (p, q) = tsp_local(x, y, h);
    if f == 1 {
        return v(-1.0, -p / ratio, -q / ratio);
    }
    // Radial distance from the center along the region's axis, and the
    // coordinate across it.
    let (m, across) = match f {
        2 => (-p, q),
        3 => (p, q),
        4 => (-q, p),
        _ => (q, p),
    };
    let m = m.max(1e-9);
    let t = (m - ratio) / (1.0 - ratio);
    let s = across / m;
    let depth = 2.0 * t - 1.0;
    match f {
        2 => v(depth, 1.0, -s),
        3 => v(depth, -1.0, -s),
        4 => v(depth, -s, 1.0),
        _ => v(depth, -s, -1.0),
    }
}

pub(super) fn tsp_project(d: Vec3, h: f64, ratio: f64) -> (usize, f64, f64) {
    let scores: Vec<f64> = TSP_NORMALS.iter().map(|n| d.dot(*n)).collect();
    let f = best_face(&scores);
    let a = scores[f];
    let (px, py, pz) = (d.x / a, d.y / a, d.z / a);
    let (p, q) = match f {
        0 => {
            let x = (py + 1.0) / 2.0 * h;
            let y = (1.0 - pz) / 2.0 * h;
            return (0, x, y);
        }
        1 => (-py * ratio, -pz * ratio),
        _ => {
            let t = (px + 1.0) / 2.0;
            let m = ratio + t * (1.0 - ratio);
            match f {
                2 => (-m, -pz * m),
                3 => (m, -pz * m),
                4 => (-py * m, -m),
                _ => (-py * m, m),
            }
        }
    };
    (f, h + (p + 1.0) / 2.0 * h, (q + 1.0) / 2.0 * h)
}
