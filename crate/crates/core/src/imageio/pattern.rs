//! Analytic test scenes defined on the sphere.
//!
//! A pattern is a function of direction only, rendered by unprojecting pixel
//! centers, so the same scene appears in every format.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::geometry::{vec_latlon, Vec3};
use crate::projection::ProjectionGrid;
use crate::raster::{inactive_fill, ColorModel, PlanarImage};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PatternKind {
    /// Thin bright parallels and meridians every 15°.
    LatLonGrid,
    /// Random band-limited sum of real spherical harmonics.
    SmoothHarmonic,
    /// Soft lat/lon checkerboard.
    CheckerSphere,
}

impl PatternKind {
    pub const ALL: [PatternKind; 3] = [
        PatternKind::LatLonGrid,
        PatternKind::SmoothHarmonic,
        PatternKind::CheckerSphere,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PatternKind::LatLonGrid => "latlon-grid",
            PatternKind::SmoothHarmonic => "smooth-harmonic",
            PatternKind::CheckerSphere => "checker-sphere",
        }
    }
}

impl fmt::Display for PatternKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PatternKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        PatternKind::ALL
            .into_iter()
            .find(|k| k.name() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| Error::InvalidInput(format!("unknown pattern '{s}'")))
    }
}

const GRID_STEP: f64 = PI / 12.0;
const GRID_HALF_WIDTH: f64 = 0.012;

/// A fully specified pattern. `degree` is the harmonic band limit (0 gives
/// a constant image); `cells` is the number of checker cells around the
/// equator (even).
#[derive(Debug, Clone, PartialEq)]
pub struct Pattern {
    kind: PatternKind,
    seed: u64,
    degree: usize,
    cells: usize,
    color: ColorModel,
    /// Per channel, per degree `l`: coefficients for m = 0, then
    /// (cos, sin) pairs for m = 1..=l.
    coeffs: Vec<Vec<Vec<f64>>>,
    bound: Vec<f64>,
}

impl Pattern {
    pub const DEFAULT_DEGREE: usize = 8;
    pub const DEFAULT_CELLS: usize = 12;

    pub fn new(kind: PatternKind, color: ColorModel, seed: u64) -> Self {
        Self::with_params(kind, color, seed, Self::DEFAULT_DEGREE, Self::DEFAULT_CELLS)
            .expect("default pattern parameters are valid")
    }

    pub fn with_params(kind: PatternKind, color: ColorModel, seed: u64, degree: usize, cells: usize) -> Result<Self> {
        if cells == 0 || cells % 2 != 0 {
            return Err(Error::InvalidInput(format!("checker cells must be even and positive, got {cells}")));
        }
        if degree > 64 {
            return Err(Error::InvalidInput(format!("harmonic degree {degree} is above 64")));
        }
        let mut coeffs = Vec::new();
        let mut bound = Vec::new();
        for c in 0..color.channels() {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let mut per_l = vec![Vec::new()];
            let mut b = 0.0;
            for l in 1..=degree {
                let scale = 1.0 / l as f64;
                let row: Vec<f64> = (0..2 * l + 1).map(|_| scale * rng.random_range(-1.0..1.0)).collect();
                b += row.iter().map(|v| v * v).sum::<f64>().sqrt();
                per_l.push(row);
            }
            coeffs.push(per_l);
            bound.push(b);
        }
        Ok(Pattern {
            kind,
            seed,
            degree,
            cells,
            color,
            coeffs,
            bound,
        })
    }

    pub fn kind(&self) -> PatternKind {
        self.kind
    }
    pub fn seed(&self) -> u64 {
        self.seed
    }
    pub fn color(&self) -> ColorModel {
        self.color
    }
    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Pattern value of channel `c` in direction `d` (any nonzero vector).
    pub fn value(&self, c: usize, d: Vec3) -> f64 {
        let d = d.normalized();
        match self.kind {
            PatternKind::SmoothHarmonic => {
                if self.bound[c] == 0.0 {
                    return 0.5;
                }
                0.5 + 0.45 * self.harmonic_sum(c, d) / self.bound[c]
            }
            PatternKind::LatLonGrid => {
                let ll = vec_latlon(d);
                let near = |a: f64| {
                    let r = a.rem_euclid(GRID_STEP);
                    r.min(GRID_STEP - r)
                };
                let dist = near(ll.lat()).min(near(ll.lon()) * ll.lat().cos());
                let t = (dist / GRID_HALF_WIDTH).min(1.0);
                let line = 1.0 - t * t * (3.0 - 2.0 * t);
                let base = 0.15 + 0.05 * c as f64;
                base + (0.9 - base) * line
            }
            PatternKind::CheckerSphere => {
                let ll = vec_latlon(d);
                let n = self.cells as f64;
                let s = (0.5 * n * ll.lon()).sin() * (0.5 * n * ll.lat()).sin();
                let v = 0.5 + 0.4 * (4.0 * s).tanh();
                if c == 0 {
                    v
                } else {
                    0.5 + 0.25 * (v - 0.5)
                }
            }
        }
    }

    /// Σ_l Σ_m c_lm · Ȳ_lm(d) / √(2l+1). By the addition theorem each degree
    /// is bounded by the Euclidean norm of its coefficients.
    fn harmonic_sum(&self, c: usize, d: Vec3) -> f64 {
        let x = d.z.clamp(-1.0, 1.0);
        let s = (1.0 - x * x).max(0.0).sqrt();
        let lon = d.y.atan2(d.x);
        let lmax = self.degree;
        // Fully normalized associated Legendre functions P̄[l][m].
        let mut p = vec![vec![0.0; lmax + 1]; lmax + 1];
        p[0][0] = 1.0;
        for m in 1..=lmax {
            let f = if m == 1 { 3f64.sqrt() } else { ((2 * m + 1) as f64 / (2 * m) as f64).sqrt() };
            p[m][m] = f * s * p[m - 1][m - 1];
        }
        for m in 0..lmax {
            p[m + 1][m] = ((2 * m + 3) as f64).sqrt() * x * p[m][m];
        }
        for m in 0..=lmax {
            for l in m + 2..=lmax {
                let (lf, mf) = (l as f64, m as f64);
                let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
                let b = (((lf - 1.0).powi(2) - mf * mf) / (4.0 * (lf - 1.0).powi(2) - 1.0)).sqrt();
                p[l][m] = a * (x * p[l - 1][m] - b * p[l - 2][m]);
            }
        }
        let mut total = 0.0;
        for l in 1..=lmax {
            let k = &self.coeffs[c][l];
            let mut acc = k[0] * p[l][0];
            for m in 1..=l {
                let (sm, cm) = (m as f64 * lon).sin_cos();
                acc += p[l][m] * (k[2 * m - 1] * cm + k[2 * m] * sm);
            }
            total += acc / ((2 * l + 1) as f64).sqrt();
        }
        total
    }
}

/// Renders `pattern` on `grid`; inactive pixels get the gray fill and the
/// grid's active mask is attached.
pub fn gen_pattern(pattern: &Pattern, grid: &ProjectionGrid) -> PlanarImage {
    gen_pattern_with(pattern, grid, Exec::default())
}

pub fn gen_pattern_with(pattern: &Pattern, grid: &ProjectionGrid, exec: Exec) -> PlanarImage {
    let (w, h) = (grid.width(), grid.height());
    let ch = pattern.color.channels();
    let rows: Vec<Vec<f32>> = exec.map(h, |j| {
        let mut row = vec![inactive_fill(); ch * w];
        for i in 0..w {
            if let Some((_, d)) = grid.locate(i as f64 + 0.5, j as f64 + 0.5) {
                for c in 0..ch {
                    row[c * w + i] = pattern.value(c, d) as f32;
                }
            }
        }
        row
    });
    let mut data = vec![0.0; ch * w * h];
    for (j, row) in rows.iter().enumerate() {
        for c in 0..ch {
            data[(c * h + j) * w..(c * h + j + 1) * w].copy_from_slice(&row[c * w..(c + 1) * w]);
        }
    }
    let img = PlanarImage::from_parts(w, h, pattern.color, data, None);
    img.with_mask(crate::projection::active_mask(grid))
        .expect("mask matches grid")
}
