//! Per-pixel weight maps: the analytic ERP row weight and numerically
//! integrated pixel solid angles for any grid.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::geometry::quad_solid_angle;
use crate::projection::{ProjectionFormat, ProjectionGrid};

/// Recursion limit for pixels whose footprint straddles a seam or the edge
/// of the active region (a 32 × 32 subdivision at most).
const MAX_DEPTH: u32 = 5;

/// Corners are classified slightly inside the cell so that cells whose
/// edges lie exactly on a seam are not split.
const CORNER_INSET: f64 = 1e-9;

/// Nonnegative per-pixel weights for one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMap {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl WeightMap {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "{} weights for {width}x{height}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidInput("weights must be finite and nonnegative".into()));
        }
        if values.iter().all(|&v| v == 0.0) {
            return Err(Error::EmptyDomain("all weights are zero".into()));
        }
        Ok(WeightMap { width, height, values })
    }

    pub fn uniform(width: usize, height: usize) -> Self {
        WeightMap {
            width,
            height,
            values: vec![1.0; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }
    pub fn height(&self) -> usize {
        self.height
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.width + i]
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// Analytic ERP weight `cos((j + 0.5 − H/2)·π/H)`, constant along rows.
pub fn erp_weights(grid: &ProjectionGrid) -> Result<WeightMap> {
    if grid.format() != ProjectionFormat::Erp {
        return Err(Error::UnsupportedFormat(format!(
            "analytic weights exist only for ERP, not {}",
            grid.format()
        )));
    }
    let (w, h) = (grid.width(), grid.height());
    let mut values = Vec::with_capacity(w * h);
    for j in 0..h {
        let wj = ((j as f64 + 0.5 - h as f64 / 2.0) * PI / h as f64).cos();
        values.extend(std::iter::repeat(wj).take(w));
    }
    WeightMap::new(w, h, values)
}

/// Analytic weights on ERP, solid-angle weights elsewhere.
pub fn weights_for(grid: &ProjectionGrid) -> WeightMap {
    match grid.format() {
        ProjectionFormat::Erp => erp_weights(grid).expect("ERP grid"),
        _ => solid_angle_weights(grid),
    }
}

/// How the part of a pixel outside the active region is treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Coverage {
    /// Only the sphere area actually mapped inside the pixel counts; inactive
    /// pixels may get a nonzero share along region boundaries.
    Clip,
    /// Active pixels keep their whole footprint, extended past the region
    /// boundary by the face of the pixel center; inactive pixels get 0.
    Footprint,
}

/// Solid angle of the raster cell `[x0, x0+s] × [y0, y0+s]`.
fn cell_area(grid: &ProjectionGrid, x0: f64, y0: f64, s: f64, home: Option<usize>, mode: Coverage, depth: u32) -> f64 {
    let (cx, cy) = (x0 + 0.5 * s, y0 + 0.5 * s);
    let fill = |f: Option<usize>| match mode {
        Coverage::Clip => f,
        Coverage::Footprint => f.or(home),
    };
    let center = fill(grid.face_at(cx, cy));
    let corners = [(x0, y0), (x0 + s, y0), (x0 + s, y0 + s), (x0, y0 + s)];
    let split = corners.iter().any(|&(x, y)| {
        let f = grid.face_at(x + (cx - x) * CORNER_INSET, y + (cy - y) * CORNER_INSET);
        fill(f) != center
    });
    if split && depth < MAX_DEPTH {
        let h = 0.5 * s;
        return cell_area(grid, x0, y0, h, home, mode, depth + 1)
            + cell_area(grid, x0 + h, y0, h, home, mode, depth + 1)
            + cell_area(grid, x0 + h, y0 + h, h, home, mode, depth + 1)
            + cell_area(grid, x0, y0 + h, h, home, mode, depth + 1);
    }
    let Some(face) = center else {
        return 0.0;
    };
    let v = corners.map(|(x, y)| grid.unproject_in_face(face, x, y).normalized());
    quad_solid_angle(v[0], v[1], v[2], v[3])
}

/// Raw per-pixel solid angles under `mode` (row-major).
pub(crate) fn pixel_solid_angles(grid: &ProjectionGrid, mode: Coverage, exec: Exec) -> Vec<f64> {
    let faces = grid.face_map();
    let w = grid.width();
    let mut out = vec![0.0; grid.pixel_count()];
    exec.for_each_row(&mut out, w, |j, row| {
        for (i, v) in row.iter_mut().enumerate() {
            let home = faces.get(i, j);
            if mode == Coverage::Footprint && home.is_none() {
                continue;
            }
            *v = cell_area(grid, i as f64, j as f64, 1.0, home, mode, 0);
        }
    });
    out
}

/// Per-pixel solid angle in steradians. The sphere area mapped into an
/// inactive pixel (possible only along the edge of the active region) is
/// handed to its nearest active neighbors, so inactive pixels weigh 0 and
/// the map still sums to 4π.
pub fn solid_angle_weights(grid: &ProjectionGrid) -> WeightMap {
    solid_angle_weights_with(grid, Exec::default())
}

pub fn solid_angle_weights_with(grid: &ProjectionGrid, exec: Exec) -> WeightMap {
    let mut values = pixel_solid_angles(grid, Coverage::Clip, exec);
    let faces = grid.face_map();
    let (w, h) = (grid.width(), grid.height());
    let active = |i: isize, j: isize| faces.get_signed(i, j).is_some();
    let mut moves = Vec::new();
    for j in 0..h {
        for i in 0..w {
            let k = j * w + i;
            if values[k] == 0.0 || faces.get(i, j).is_some() {
                continue;
            }
            // Smallest ring (Chebyshev radius) that contains active pixels.
            for r in 1..=(w.max(h) as isize) {
                let mut ring = Vec::new();
                for dj in -r..=r {
                    for di in -r..=r {
                        if di.abs().max(dj.abs()) != r {
                            continue;
                        }
                        let (ii, jj) = (i as isize + di, j as isize + dj);
                        if active(ii, jj) {
                            ring.push(jj as usize * w + ii as usize);
                        }
                    }
                }
                if !ring.is_empty() {
                    let share = values[k] / ring.len() as f64;
                    moves.extend(ring.into_iter().map(|t| (t, share)));
                    break;
                }
            }
            values[k] = 0.0;
        }
    }
    for (t, share) in moves {
        values[t] += share;
    }
    WeightMap::new(w, h, values).expect("solid angles are positive on an active grid")
}
