//! Sphere ↔ raster mappings for the seven supported projection formats.
//!
//! Every format is described as a set of *faces*: regions of the raster with
//! their own smooth mapping to the sphere. ERP has one face, the cube formats
//! six, SSP three (two pole caps and the equatorial band), OHP eight and ISP
//! twenty. Each face mapping extends analytically past its region; the
//! resampler uses this to fetch kernel taps that fall across a seam, and the
//! solid-angle integrator uses it on partially covered pixels.
//!
//! Raster coordinates are continuous: pixel `(i, j)` covers
//! `[i, i+1) × [j, j+1)` and has its center at `(i + 0.5, j + 0.5)`.

mod cube;
mod poly;
mod ssp;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::{latlon_vec, vec_latlon, SphereDir, Vec3};

/// Max-dot ties closer than this go to the lowest face index.
pub(crate) const TIE_EPS: f64 = 1e-12;

/// Bytes written for inactive pixels (the gray default area).
pub const INACTIVE_FILL_U8: u8 = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProjectionFormat {
    Erp,
    Cmp,
    Eac,
    Isp,
    Ohp,
    Tsp,
    Ssp,
}

impl ProjectionFormat {
    pub const ALL: [ProjectionFormat; 7] = [
        ProjectionFormat::Erp,
        ProjectionFormat::Isp,
        ProjectionFormat::Ohp,
        ProjectionFormat::Ssp,
        ProjectionFormat::Tsp,
        ProjectionFormat::Cmp,
        ProjectionFormat::Eac,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProjectionFormat::Erp => "ERP",
            ProjectionFormat::Cmp => "CMP",
            ProjectionFormat::Eac => "EAC",
            ProjectionFormat::Isp => "ISP",
            ProjectionFormat::Ohp => "OHP",
            ProjectionFormat::Tsp => "TSP",
            ProjectionFormat::Ssp => "SSP",
        }
    }

    /// Number of independently mapped faces in the layout.
    pub fn face_count(self) -> usize {
        match self {
            ProjectionFormat::Erp => 1,
            ProjectionFormat::Cmp | ProjectionFormat::Eac | ProjectionFormat::Tsp => 6,
            ProjectionFormat::Ssp => 3,
            ProjectionFormat::Ohp => 8,
            ProjectionFormat::Isp => 20,
        }
    }

    /// Whether the layout contains inactive (gray) regions.
    pub fn has_inactive_regions(self) -> bool {
        matches!(
            self,
            ProjectionFormat::Ssp | ProjectionFormat::Isp | ProjectionFormat::Ohp
        )
    }
}

impl fmt::Display for ProjectionFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProjectionFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "erp" => ProjectionFormat::Erp,
            "cmp" => ProjectionFormat::Cmp,
            "eac" => ProjectionFormat::Eac,
            "isp" => ProjectionFormat::Isp,
            "ohp" => ProjectionFormat::Ohp,
            "tsp" => ProjectionFormat::Tsp,
            "ssp" => ProjectionFormat::Ssp,
            other => return Err(Error::InvalidInput(format!("unknown projection format '{other}'"))),
        })
    }
}

/// Format-specific layout knobs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayoutParams {
    /// TSP: back-face edge length relative to the front face.
    pub tsp_back_ratio: f64,
    /// SSP: latitude (radians) separating the equatorial band from the caps.
    pub ssp_band_lat: f64,
}

impl Default for LayoutParams {
    fn default() -> Self {
        LayoutParams {
            tsp_back_ratio: 1.0 / 3.0,
            ssp_band_lat: FRAC_PI_4,
        }
    }
}

/// A projection format together with its raster size and layout parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionGrid {
    format: ProjectionFormat,
    width: usize,
    height: usize,
    params: LayoutParams,
}

/// Continuous raster position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImagePoint {
    pub x: f64,
    pub y: f64,
}

impl ImagePoint {
    pub fn new(x: f64, y: f64) -> Self {
        ImagePoint { x, y }
    }

    pub fn pixel_center(i: usize, j: usize) -> Self {
        ImagePoint::new(i as f64 + 0.5, j as f64 + 0.5)
    }
}

/// Natural width/height ratio of the polyhedral unfoldings.
pub(crate) fn net_aspect(format: ProjectionFormat) -> f64 {
    match format {
        // 5.5 triangle edges wide, three triangle heights tall.
        ProjectionFormat::Isp => 5.5 / (1.5 * 3f64.sqrt()),
        // 4 edges wide, two heights tall.
        ProjectionFormat::Ohp => 4.0 / 3f64.sqrt(),
        _ => unreachable!("net_aspect on non-polyhedral format"),
    }
}

const NET_ASPECT_TOLERANCE: f64 = 0.05;

impl ProjectionGrid {
    pub fn new(format: ProjectionFormat, width: usize, height: usize) -> Result<Self> {
        Self::with_params(format, width, height, LayoutParams::default())
    }

    pub fn with_params(
        format: ProjectionFormat,
        width: usize,
        height: usize,
        params: LayoutParams,
    ) -> Result<Self> {
        let bad = |why: String| Err(Error::InvalidGrid(format!("{format} {width}x{height}: {why}")));
        if width < 2 || height < 2 {
            return bad("width and height must be at least 2".into());
        }
        match format {
            ProjectionFormat::Erp | ProjectionFormat::Tsp => {
                if width != 2 * height {
                    return bad("width must equal 2 * height".into());
                }
            }
            ProjectionFormat::Ssp => {
                if width != 2 * height || height % 2 != 0 {
                    return bad("width must equal 2 * height with even height".into());
                }
            }
            ProjectionFormat::Cmp | ProjectionFormat::Eac => {
                if 2 * width != 3 * height {
                    return bad("3x2 cube layout needs 2 * width == 3 * height".into());
                }
            }
            ProjectionFormat::Isp | ProjectionFormat::Ohp => {
                let want = net_aspect(format);
                let got = width as f64 / height as f64;
                if ((got - want) / want).abs() > NET_ASPECT_TOLERANCE {
                    return bad(format!("aspect {got:.4} too far from unfolding aspect {want:.4}"));
                }
            }
        }
        if !(params.tsp_back_ratio > 0.0 && params.tsp_back_ratio < 1.0) {
            return bad(format!("TSP back-face ratio {} outside (0, 1)", params.tsp_back_ratio));
        }
        if !(params.ssp_band_lat > 0.0 && params.ssp_band_lat < FRAC_PI_2) {
            return bad(format!("SSP band latitude {} outside (0, pi/2)", params.ssp_band_lat));
        }
        Ok(ProjectionGrid {
            format,
            width,
            height,
            params,
        })
    }

    pub fn format(&self) -> ProjectionFormat {
        self.format
    }
    pub fn width(&self) -> usize {
        self.width
    }
    pub fn height(&self) -> usize {
        self.height
    }
    pub fn params(&self) -> LayoutParams {
        self.params
    }
    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    /// Cube face edge length in pixels (CMP/EAC only).
    pub fn face_size(&self) -> Option<usize> {
        match self.format {
            ProjectionFormat::Cmp | ProjectionFormat::Eac => Some(self.width / 3),
            _ => None,
        }
    }

    /// Same format and parameters with both dimensions multiplied by `f`.
    pub fn scaled(&self, f: usize) -> Result<Self> {
        Self::with_params(self.format, self.width * f, self.height * f, self.params)
    }

    fn in_bounds(&self, x: f64, y: f64) -> bool {
        x.is_finite() && y.is_finite() && x >= 0.0 && y >= 0.0 && x <= self.width as f64 && y <= self.height as f64
    }

    /// Face containing raster position `(x, y)`, or `None` for inactive
    /// regions. Positions on a seam belong to the lowest-indexed face.
    pub(crate) fn face_at(&self, x: f64, y: f64) -> Option<usize> {
        let (w, h) = (self.width as f64, self.height as f64);
        match self.format {
            ProjectionFormat::Erp => Some(0),
            ProjectionFormat::Cmp | ProjectionFormat::Eac => Some(cube::cube_face_at(x, y, w / 3.0)),
            ProjectionFormat::Tsp => Some(cube::tsp_face_at(x, y, h, self.params.tsp_back_ratio)),
            ProjectionFormat::Ssp => ssp::face_at(x, y, h),
            ProjectionFormat::Isp => poly::icosa().face_at(x / w, y / h),
            ProjectionFormat::Ohp => poly::octa().face_at(x / w, y / h),
        }
    }

    /// Extended mapping of `face` evaluated at `(x, y)`; the result is a
    /// nonzero but not necessarily unit vector.
    pub(crate) fn unproject_in_face(&self, face: usize, x: f64, y: f64) -> Vec3 {
        let (w, h) = (self.width as f64, self.height as f64);
        match self.format {
            ProjectionFormat::Erp => {
                let lon = 2.0 * PI * (x / w - 0.5);
                let lat = PI * (0.5 - y / h);
                latlon_vec(lat, lon)
            }
            ProjectionFormat::Cmp => cube::cube_unproject(face, x, y, w / 3.0, false),
            ProjectionFormat::Eac => cube::cube_unproject(face, x, y, w / 3.0, true),
            ProjectionFormat::Tsp => cube::tsp_unproject(face, x, y, h, self.params.tsp_back_ratio),
            ProjectionFormat::Ssp => ssp::unproject(face, x, y, w, h, self.params.ssp_band_lat),
            ProjectionFormat::Isp => poly::icosa().unproject(face, x / w, y / h),
            ProjectionFormat::Ohp => poly::octa().unproject(face, x / w, y / h),
        }
    }

    /// Face and raster position of direction `d` (any nonzero vector).
    pub(crate) fn project_face(&self, d: Vec3) -> (usize, ImagePoint) {
        let (w, h) = (self.width as f64, self.height as f64);
        let (face, x, y) = match self.format {
            ProjectionFormat::Erp => {
                let ll = vec_latlon(d);
                (0, (ll.lon() / (2.0 * PI) + 0.5) * w, (0.5 - ll.lat() / PI) * h)
            }
            ProjectionFormat::Cmp => cube::cube_project(d, w / 3.0, false),
            ProjectionFormat::Eac => cube::cube_project(d, w / 3.0, true),
            ProjectionFormat::Tsp => cube::tsp_project(d, h, self.params.tsp_back_ratio),
            ProjectionFormat::Ssp => ssp::project(d, w, h, self.params.ssp_band_lat),
            ProjectionFormat::Isp => {
                let (f, u, v) = poly::icosa().project(d);
                (f, u * w, v * h)
            }
            ProjectionFormat::Ohp => {
                let (f, u, v) = poly::octa().project(d);
                (f, u * w, v * h)
            }
        };
        (face, ImagePoint::new(x.clamp(0.0, w), y.clamp(0.0, h)))
    }

    /// Face and unnormalized direction at `(x, y)`, or `None` when inactive.
    pub(crate) fn locate(&self, x: f64, y: f64) -> Option<(usize, Vec3)> {
        let face = self.face_at(x, y)?;
        Some((face, self.unproject_in_face(face, x, y)))
    }

    /// Per-pixel face indices (pixel centers), `None` where inactive.
    pub fn face_map(&self) -> FaceMap {
        let mut faces = vec![FaceMap::NONE; self.pixel_count()];
        for j in 0..self.height {
            for i in 0..self.width {
                if let Some(f) = self.face_at(i as f64 + 0.5, j as f64 + 0.5) {
                    faces[j * self.width + i] = f as u8;
                }
            }
        }
        FaceMap {
            width: self.width,
            height: self.height,
            faces,
        }
    }
}

/// Raster → sphere. `Ok(None)` for points in an inactive region.
pub fn unproject(grid: &ProjectionGrid, p: ImagePoint) -> Result<Option<SphereDir>> {
    if !grid.in_bounds(p.x, p.y) {
        return Err(Error::InvalidInput(format!(
            "point ({}, {}) outside {}x{} raster",
            p.x, p.y, grid.width, grid.height
        )));
    }
    Ok(grid
        .locate(p.x, p.y)
        .map(|(_, v)| SphereDir::from_vec_unchecked(v)))
}

/// Sphere → raster. Every direction has an active image in every format.
pub fn project(grid: &ProjectionGrid, d: &SphereDir) -> ImagePoint {
    grid.project_face(d.vec()).1
}

/// Per-pixel active flags: a pixel is active iff its center unprojects.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActiveMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl ActiveMask {
    pub fn full(width: usize, height: usize) -> Self {
        ActiveMask {
            width,
            height,
            bits: vec![true; width * height],
        }
    }

    pub fn from_bits(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "mask has {} entries for {width}x{height}",
                bits.len()
            )));
        }
        Ok(ActiveMask { width, height, bits })
    }

    pub fn width(&self) -> usize {
        self.width
    }
    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[j * self.width + i]
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn active_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn active_fraction(&self) -> f64 {
        self.active_count() as f64 / self.bits.len() as f64
    }

    pub fn is_full(&self) -> bool {
        self.bits.iter().all(|&b| b)
    }

    /// Element-wise AND of two equally sized masks.
    pub fn intersect(&self, other: &ActiveMask) -> Result<ActiveMask> {
        if self.width != other.width || self.height != other.height {
            return Err(Error::DimensionMismatch("mask sizes differ".into()));
        }
        let bits = self.bits.iter().zip(&other.bits).map(|(&a, &b)| a && b).collect();
        Ok(ActiveMask {
            width: self.width,
            height: self.height,
            bits,
        })
    }
}

pub fn active_mask(grid: &ProjectionGrid) -> ActiveMask {
    grid.face_map().to_mask()
}

/// Face index of every pixel center.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FaceMap {
    width: usize,
    height: usize,
    faces: Vec<u8>,
}

impl FaceMap {
    pub const NONE: u8 = u8::MAX;

    pub fn get(&self, i: usize, j: usize) -> Option<usize> {
        match self.faces[j * self.width + i] {
            FaceMap::NONE => None,
            f => Some(f as usize),
        }
    }

    /// Like [`FaceMap::get`] but tolerates out-of-raster indices.
    pub(crate) fn get_signed(&self, i: isize, j: isize) -> Option<usize> {
        if i < 0 || j < 0 || i as usize >= self.width || j as usize >= self.height {
            return None;
        }
        self.get(i as usize, j as usize)
    }

    pub fn to_mask(&self) -> ActiveMask {
        ActiveMask {
            width: self.width,
            height: self.height,
            bits: self.faces.iter().map(|&f| f != FaceMap::NONE).collect(),
        }
    }
}

/// Equi-angular remap of a cube-face coordinate: `u' = (4/π)·atan(u)`.
pub fn eac_remap(u: f64) -> Result<f64> {
    check_unit_range(u)?;
    Ok(eac_forward(u))
}

/// Inverse of [`eac_remap`]: `u = tan(π·u'/4)`.
pub fn eac_unmap(u: f64) -> Result<f64> {
    check_unit_range(u)?;
    Ok(eac_inverse(u))
}

fn check_unit_range(u: f64) -> Result<()> {
    if !(-1.0..=1.0).contains(&u) {
        return Err(Error::InvalidInput(format!("face coordinate {u} outside [-1, 1]")));
    }
    Ok(())
}

pub(crate) fn eac_forward(u: f64) -> f64 {
    // Pin the fixed points independently of libm rounding.
    if u.abs() == 1.0 {
        return u;
    }
    u.atan() / FRAC_PI_4
}

pub(crate) fn eac_inverse(u: f64) -> f64 {
    if u.abs() == 1.0 {
        return u;
    }
    (u * FRAC_PI_4).tan()
}

fn even_round(x: f64) -> usize {
    ((x / 2.0).round() as usize).max(1) * 2
}

/// Active fraction of the SSP layout: a 1.5H × H band plus two inscribed
/// circles of diameter H/2.
fn ssp_active_per_h2() -> f64 {
    1.5 + PI / 8.0
}

/// Grid of `format` whose active pixel count approximates `pixel_budget`.
pub fn default_grid(format: ProjectionFormat, pixel_budget: usize) -> Result<ProjectionGrid> {
    if pixel_budget < 128 {
        return Err(Error::InvalidInput(format!("pixel budget {pixel_budget} below 128")));
    }
    let b = pixel_budget as f64;
    match format {
        ProjectionFormat::Erp | ProjectionFormat::Tsp => {
            let h = even_round((b / 2.0).sqrt());
            ProjectionGrid::new(format, 2 * h, h)
        }
        ProjectionFormat::Ssp => {
            let h = even_round((b / ssp_active_per_h2()).sqrt());
            ProjectionGrid::new(format, 2 * h, h)
        }
        ProjectionFormat::Cmp | ProjectionFormat::Eac => {
            let f = even_round((b / 6.0).sqrt());
            ProjectionGrid::new(format, 3 * f, 2 * f)
        }
        ProjectionFormat::Isp | ProjectionFormat::Ohp => {
            let aspect = net_aspect(format);
            let frac = poly::active_fraction(format);
            // Width is rounded from height so the aspect error stays below 1/W.
            let h = even_round((b / (aspect * frac)).sqrt());
            let w = even_round(h as f64 * aspect);
            ProjectionGrid::new(format, w, h)
        }
    }
}

#[cfg(test)]
mod tests;
