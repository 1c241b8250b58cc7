//! Conversion between projection grids by inverse mapping through the sphere.
//!
//! For every active destination pixel the center is unprojected, projected
//! into the source grid, and the source is interpolated there. Kernel taps
//! that leave the source face (another face, an inactive region, or outside
//! the raster) are not clamped: the tap's raster position is pushed through
//! the face's extended mapping onto the sphere and the source is re-sampled
//! bilinearly where that direction really lands.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::geometry::{SphereDir, Vec3};
use crate::projection::{active_mask, FaceMap, ImagePoint, ProjectionGrid};
use crate::raster::{inactive_fill, PlanarImage};

const MAX_CHANNELS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum InterpKernel {
    Nearest,
    Bilinear,
    /// Catmull-Rom cubic (a = −0.5).
    #[default]
    Bicubic,
    Lanczos3,
}

impl InterpKernel {
    pub const ALL: [InterpKernel; 4] = [
        InterpKernel::Nearest,
        InterpKernel::Bilinear,
        InterpKernel::Bicubic,
        InterpKernel::Lanczos3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            InterpKernel::Nearest => "nearest",
            InterpKernel::Bilinear => "bilinear",
            InterpKernel::Bicubic => "bicubic",
            InterpKernel::Lanczos3 => "lanczos3",
        }
    }

    /// Support half-width in source pixels.
    pub fn radius(self) -> f64 {
        match self {
            InterpKernel::Nearest => 0.5,
            InterpKernel::Bilinear => 1.0,
            InterpKernel::Bicubic => 2.0,
            InterpKernel::Lanczos3 => 3.0,
        }
    }

    /// Kernel value at offset `x` (in pixels).
    pub fn weight(self, x: f64) -> f64 {
        let ax = x.abs();
        match self {
            InterpKernel::Nearest => {
                if ax < 0.5 {
                    1.0
                } else {
                    0.0
                }
            }
            InterpKernel::Bilinear => (1.0 - ax).max(0.0),
            InterpKernel::Bicubic => {
                const A: f64 = -0.5;
                if ax <= 1.0 {
                    ((A + 2.0) * ax - (A + 3.0)) * ax * ax + 1.0
                } else if ax < 2.0 {
                    ((A * ax - 5.0 * A) * ax + 8.0 * A) * ax - 4.0 * A
                } else {
                    0.0
                }
            }
            InterpKernel::Lanczos3 => {
                if ax == 0.0 {
                    1.0
                } else if ax < 3.0 && ax.fract() != 0.0 {
                    let px = std::f64::consts::PI * ax;
                    3.0 * px.sin() * (px / 3.0).sin() / (px * px)
                } else {
                    0.0
                }
            }
        }
    }

    /// True when the kernel can overshoot the input range.
    pub fn has_negative_lobes(self) -> bool {
        matches!(self, InterpKernel::Bicubic | InterpKernel::Lanczos3)
    }
}

impl fmt::Display for InterpKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InterpKernel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "nearest" => Ok(InterpKernel::Nearest),
            "bilinear" => Ok(InterpKernel::Bilinear),
            "bicubic" => Ok(InterpKernel::Bicubic),
            "lanczos3" | "lanczos" => Ok(InterpKernel::Lanczos3),
            other => Err(Error::InvalidInput(format!("unknown kernel '{other}'"))),
        }
    }
}

/// Taps `(index, weight)` of `kernel` centered at continuous coordinate `c`
/// (pixel k has its center at k + 0.5). Zero weights are dropped.
pub(crate) fn taps(kernel: InterpKernel, c: f64, out: &mut Vec<(isize, f64)>) {
    out.clear();
    if kernel == InterpKernel::Nearest {
        out.push(((c.floor()) as isize, 1.0));
        return;
    }
    let r = kernel.radius();
    let lo = (c - 0.5 - r).ceil() as isize;
    let hi = (c - 0.5 + r).floor() as isize;
    for k in lo..=hi {
        let w = kernel.weight(k as f64 + 0.5 - c);
        if w != 0.0 {
            out.push((k, w));
        }
    }
}

fn check_dims(img: &PlanarImage, grid: &ProjectionGrid) -> Result<()> {
    if img.width() != grid.width() || img.height() != grid.height() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} image on {} {}x{} grid",
            img.width(),
            img.height(),
            grid.format(),
            grid.width(),
            grid.height()
        )));
    }
    Ok(())
}

/// Interpolates a source image on its projection grid at arbitrary sphere
/// directions. Building one precomputes the source face map.
pub struct Sampler<'a> {
    img: &'a PlanarImage,
    grid: ProjectionGrid,
    faces: FaceMap,
    kernel: InterpKernel,
}

impl<'a> Sampler<'a> {
    pub fn new(img: &'a PlanarImage, grid: ProjectionGrid, kernel: InterpKernel) -> Result<Self> {
        check_dims(img, &grid)?;
        Ok(Sampler {
            img,
            faces: grid.face_map(),
            grid,
            kernel,
        })
    }

    pub fn sample(&self, d: &SphereDir) -> Vec<f32> {
        let mut out = [0.0; MAX_CHANNELS];
        self.sample_into(d.vec(), &mut out);
        out[..self.img.channels()].iter().map(|&v| v as f32).collect()
    }

    fn pixel(&self, i: usize, j: usize, acc: &mut [f64; MAX_CHANNELS], w: f64) {
        for (c, a) in acc.iter_mut().enumerate().take(self.img.channels()) {
            *a += w * self.img.get(c, i, j) as f64;
        }
    }

    fn valid(&self, i: isize, j: isize, face: usize) -> bool {
        self.faces.get_signed(i, j) == Some(face)
    }

    pub(crate) fn sample_into(&self, d: Vec3, out: &mut [f64; MAX_CHANNELS]) {
        let (face, p) = self.grid.project_face(d);
        *out = [0.0; MAX_CHANNELS];
        if self.kernel == InterpKernel::Nearest {
            self.nearest(face, p, out);
            return;
        }
        let mut tx = Vec::with_capacity(8);
        let mut ty = Vec::with_capacity(8);
        taps(self.kernel, p.x, &mut tx);
        taps(self.kernel, p.y, &mut ty);
        let mut total = 0.0;
        for &(j, wy) in &ty {
            for &(i, wx) in &tx {
                let w = wx * wy;
                if self.valid(i, j, face) {
                    self.pixel(i as usize, j as usize, out, w);
                } else {
                    let tap = self
                        .grid
                        .unproject_in_face(face, i as f64 + 0.5, j as f64 + 0.5);
                    let mut v = [0.0; MAX_CHANNELS];
                    self.fetch_bilinear(tap, &mut v);
                    for c in 0..self.img.channels() {
                        out[c] += w * v[c];
                    }
                }
                total += w;
            }
        }
        for v in out.iter_mut() {
            *v /= total;
        }
        if self.kernel.has_negative_lobes() {
            for v in out.iter_mut() {
                *v = v.clamp(0.0, 1.0);
            }
        }
    }

    fn nearest(&self, face: usize, p: ImagePoint, out: &mut [f64; MAX_CHANNELS]) {
        let (w, h) = (self.grid.width() as isize, self.grid.height() as isize);
        let i = (p.x.floor() as isize).clamp(0, w - 1);
        let j = (p.y.floor() as isize).clamp(0, h - 1);
        if self.valid(i, j, face) {
            self.pixel(i as usize, j as usize, out, 1.0);
            return;
        }
        if let Some((bi, bj)) = self.closest_valid(face, p, i, j) {
            self.pixel(bi, bj, out, 1.0);
            return;
        }
        let d = self.grid.unproject_in_face(face, p.x, p.y);
        self.fetch_bilinear(d, out);
    }

    /// Closest same-face pixel center among the 3×3 neighbors of `(i, j)`.
    fn closest_valid(&self, face: usize, p: ImagePoint, i: isize, j: isize) -> Option<(usize, usize)> {
        let mut best: Option<(f64, usize, usize)> = None;
        for nj in j - 1..=j + 1 {
            for ni in i - 1..=i + 1 {
                if !self.valid(ni, nj, face) {
                    continue;
                }
                let dx = ni as f64 + 0.5 - p.x;
                let dy = nj as f64 + 0.5 - p.y;
                let dist = dx * dx + dy * dy;
                if best.map_or(true, |(b, _, _)| dist < b) {
                    best = Some((dist, ni as usize, nj as usize));
                }
            }
        }
        best.map(|(_, i, j)| (i, j))
    }

    /// Bilinear read at the true location of `d`, using only taps on the
    /// same face (weights renormalized over the valid ones).
    fn fetch_bilinear(&self, d: Vec3, out: &mut [f64; MAX_CHANNELS]) {
        let (face, p) = self.grid.project_face(d);
        *out = [0.0; MAX_CHANNELS];
        let x0 = (p.x - 0.5).floor();
        let y0 = (p.y - 0.5).floor();
        let fx = p.x - 0.5 - x0;
        let fy = p.y - 0.5 - y0;
        let (x0, y0) = (x0 as isize, y0 as isize);
        let mut total = 0.0;
        for (dj, wy) in [(0, 1.0 - fy), (1, fy)] {
            for (di, wx) in [(0, 1.0 - fx), (1, fx)] {
                let w = wx * wy;
                if w == 0.0 || !self.valid(x0 + di, y0 + dj, face) {
                    continue;
                }
                self.pixel((x0 + di) as usize, (y0 + dj) as usize, out, w);
                total += w;
            }
        }
        if total > 0.0 {
            for v in out.iter_mut() {
                *v /= total;
            }
            return;
        }
        let (w, h) = (self.grid.width() as isize, self.grid.height() as isize);
        let i = (p.x.floor() as isize).clamp(0, w - 1);
        let j = (p.y.floor() as isize).clamp(0, h - 1);
        let (bi, bj) = self
            .closest_valid(face, p, i, j)
            .unwrap_or((i as usize, j as usize));
        self.pixel(bi, bj, out, 1.0);
    }
}

/// Samples `src` (laid out on `src_grid`) in direction `d`.
pub fn sample(
    src: &PlanarImage,
    src_grid: &ProjectionGrid,
    d: &SphereDir,
    kernel: InterpKernel,
) -> Result<Vec<f32>> {
    Ok(Sampler::new(src, *src_grid, kernel)?.sample(d))
}

/// Resamples `src` from `src_grid` onto `dst_grid`.
pub fn convert(
    src: &PlanarImage,
    src_grid: &ProjectionGrid,
    dst_grid: &ProjectionGrid,
    kernel: InterpKernel,
) -> Result<PlanarImage> {
    convert_with(src, src_grid, dst_grid, kernel, Exec::default())
}

pub fn convert_with(
    src: &PlanarImage,
    src_grid: &ProjectionGrid,
    dst_grid: &ProjectionGrid,
    kernel: InterpKernel,
    exec: Exec,
) -> Result<PlanarImage> {
    check_dims(src, src_grid)?;
    if src_grid == dst_grid {
        return src.clone().with_mask(active_mask(dst_grid));
    }
    let sampler = Sampler::new(src, *src_grid, kernel)?;
    let dst_faces = dst_grid.face_map();
    let (w, h, ch) = (dst_grid.width(), dst_grid.height(), src.channels());
    let fill = inactive_fill();

    // Rows are computed interleaved then split into planes.
    let mut rows = vec![0.0f32; w * h * ch];
    exec.for_each_row(&mut rows, w * ch, |j, row| {
        let mut v = [0.0; MAX_CHANNELS];
        for i in 0..w {
            let px = &mut row[i * ch..(i + 1) * ch];
            match dst_faces.get(i, j) {
                Some(face) => {
                    let d = dst_grid.unproject_in_face(face, i as f64 + 0.5, j as f64 + 0.5);
                    sampler.sample_into(d, &mut v);
                    for c in 0..ch {
                        px[c] = v[c] as f32;
                    }
                }
                None => px.iter_mut().for_each(|s| *s = fill),
            }
        }
    });
    let n = w * h;
    let mut data = vec![0.0f32; n * ch];
    for (k, px) in rows.chunks_exact(ch).enumerate() {
        for c in 0..ch {
            data[c * n + k] = px[c];
        }
    }
    let mask = dst_faces.to_mask();
    let mask = if mask.is_full() { None } else { Some(mask) };
    Ok(PlanarImage::from_parts(w, h, src.color(), data, mask))
}
