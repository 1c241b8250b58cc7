//! Sampling-density analysis: how much sphere each pixel of a format covers.

use std::path::Path;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::imageio::write_png_annotated;
use crate::metrics::{pixel_solid_angles, Coverage, WeightMap};
use crate::pipeline::ReportStyle;
use crate::projection::{active_mask, ProjectionFormat, ProjectionGrid};
use crate::raster::{ColorModel, PlanarImage};

/// Per-pixel solid angle (steradians) of every active pixel's full
/// footprint; 0 on inactive pixels. Unlike
/// [`solid_angle_weights`](crate::metrics::solid_angle_weights), pixels on
/// the edge of the active region are not clipped, so the statistics measure
/// the mapping itself rather than where the raster boundary happens to cut.
pub fn density_map(grid: &ProjectionGrid) -> WeightMap {
    density_map_with(grid, Exec::default())
}

pub fn density_map_with(grid: &ProjectionGrid, exec: Exec) -> WeightMap {
    let values = pixel_solid_angles(grid, Coverage::Footprint, exec);
    WeightMap::new(grid.width(), grid.height(), values).expect("every grid has active pixels")
}

/// Grayscale heatmap of sampling density (1 / solid angle): white is the
/// densest sampling. Normalized per image to the min/max over active pixels;
/// inactive pixels carry the mask (gray fill).
pub fn density_heatmap(grid: &ProjectionGrid, map: &WeightMap) -> Result<PlanarImage> {
    let mask = active_mask(grid);
    let dens: Vec<f64> = map.values().iter().map(|&v| if v > 0.0 { 1.0 / v } else { 0.0 }).collect();
    let active = || dens.iter().zip(mask.bits()).filter(|(_, &on)| on).map(|(&d, _)| d);
    let lo = active().fold(f64::INFINITY, f64::min);
    let hi = active().fold(0.0, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let data = dens.iter().map(|&d| ((d - lo) / span).clamp(0.0, 1.0) as f32).collect();
    PlanarImage::from_data(grid.width(), grid.height(), ColorModel::Gray, data)?.with_mask(mask)
}

/// Writes the density heatmap as PNG. A `tEXt` chunk records the
/// normalization and the density range it maps to 0..255.
pub fn write_heatmap(grid: &ProjectionGrid, map: &WeightMap, path: impl AsRef<Path>) -> Result<()> {
    let heat = density_heatmap(grid, map)?;
    let s = stats_from_map(grid, map);
    let note = format!(
        "sampling density 1/solid-angle, normalized per image: 0 = {:.6e} px/sr, 255 = {:.6e} px/sr; \
         inactive pixels = 128; format {} {}x{}",
        1.0 / s.max,
        1.0 / s.min,
        grid.format(),
        grid.width(),
        grid.height()
    );
    write_png_annotated(&heat, path, &[("Comment", &note)])
}

/// Writes the raw per-pixel solid angles (steradians) as text: `#` header
/// lines, then one line of space-separated values per raster row.
pub fn write_raw_values(grid: &ProjectionGrid, map: &WeightMap, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = format!(
        "# per-pixel solid angle in steradians, 0 = inactive\n# format {} width {} height {}\n",
        grid.format(),
        map.width(),
        map.height()
    );
    for row in map.values().chunks(map.width()) {
        let line: Vec<String> = row.iter().map(|v| format!("{v:.9e}")).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Summary of the per-pixel solid angles over active pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistortionStats {
    pub format: ProjectionFormat,
    pub width: usize,
    pub height: usize,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    /// `max / min`; 1 would be perfectly uniform sampling.
    pub ratio: f64,
    pub active_fraction: f64,
}

pub fn distortion_stats(grid: &ProjectionGrid) -> DistortionStats {
    stats_from_map(grid, &density_map(grid))
}

pub fn stats_from_map(grid: &ProjectionGrid, map: &WeightMap) -> DistortionStats {
    let mask = active_mask(grid);
    let (mut min, mut max, mut sum, mut n) = (f64::INFINITY, 0.0f64, 0.0, 0usize);
    for (&v, &on) in map.values().iter().zip(mask.bits()) {
        if on {
            min = min.min(v);
            max = max.max(v);
            sum += v;
            n += 1;
        }
    }
    DistortionStats {
        format: grid.format(),
        width: grid.width(),
        height: grid.height(),
        min,
        max,
        mean: sum / n as f64,
        ratio: max / min,
        active_fraction: mask.active_fraction(),
    }
}

/// Table of stats, one row per entry.
pub fn render_stats(stats: &[DistortionStats], style: ReportStyle) -> String {
    let header = ["format", "width", "height", "min_sr", "max_sr", "mean_sr", "ratio", "active_fraction"];
    let rows: Vec<Vec<String>> = stats
        .iter()
        .map(|s| {
            vec![
                s.format.to_string(),
                s.width.to_string(),
                s.height.to_string(),
                format!("{:.6e}", s.min),
                format!("{:.6e}", s.max),
                format!("{:.6e}", s.mean),
                format!("{:.4}", s.ratio),
                format!("{:.4}", s.active_fraction),
            ]
        })
        .collect();
    style.table(&header, &rows)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::projection::default_grid;

    #[test]
    fn erp_ratio_matches_row_weights() {
        let g = ProjectionGrid::new(ProjectionFormat::Erp, 128, 64).unwrap();
        let s = distortion_stats(&g);
        let want = (0.5 * PI / 64.0).cos() / (31.5 * PI / 64.0).cos();
        assert!((s.ratio / want - 1.0).abs() < 5e-3, "{} vs {want}", s.ratio);
        assert_eq!(s.active_fraction, 1.0);
    }

    #[test]
    fn erp_density_peaks_at_the_poles() {
        let g = ProjectionGrid::new(ProjectionFormat::Erp, 64, 32).unwrap();
        let map = density_map(&g);
        let heat = density_heatmap(&g, &map).unwrap();
        for i in 0..64 {
            assert_eq!(heat.get(0, i, 0), 1.0);
            assert_eq!(heat.get(0, i, 31), 1.0);
            assert!(heat.get(0, i, 16) < 0.05);
        }
    }

    #[test]
    fn cube_minimum_is_at_face_corners() {
        let g = ProjectionGrid::new(ProjectionFormat::Cmp, 96, 64).unwrap();
        let map = density_map(&g);
        let s = stats_from_map(&g, &map);
        for (i, j) in [(0, 0), (31, 31), (32, 0), (95, 63)] {
            assert!(map.get(i, j) / s.min - 1.0 < 1e-9);
        }
    }

    #[test]
    fn equi_angular_cube_is_more_uniform() {
        for budget in [8192, 32768] {
            let eac = distortion_stats(&default_grid(ProjectionFormat::Eac, budget).unwrap());
            let cmp = distortion_stats(&default_grid(ProjectionFormat::Cmp, budget).unwrap());
            let erp = distortion_stats(&default_grid(ProjectionFormat::Erp, budget).unwrap());
            assert!(eac.ratio < cmp.ratio && cmp.ratio < erp.ratio);
            assert!(eac.ratio >= 1.0);
        }
    }

    #[test]
    fn masked_formats_have_partial_coverage() {
        for f in [ProjectionFormat::Isp, ProjectionFormat::Ohp, ProjectionFormat::Ssp] {
            let s = distortion_stats(&default_grid(f, 8192).unwrap());
            assert!(s.active_fraction > 0.0 && s.active_fraction < 1.0);
            assert!(s.ratio >= 1.0 && s.ratio.is_finite());
        }
    }

    #[test]
    fn ratios_converge_with_resolution() {
        // ERP is excluded: its pole rows shrink without bound, so the ratio
        // grows linearly with the height.
        for f in ProjectionFormat::ALL.into_iter().filter(|&f| f != ProjectionFormat::Erp) {
            let a = distortion_stats(&default_grid(f, 32768).unwrap()).ratio;
            let b = distortion_stats(&default_grid(f, 131072).unwrap()).ratio;
            assert!((b / a - 1.0).abs() < 0.02, "{f}: {a} -> {b}");
        }
    }

    #[test]
    fn heatmap_files() {
        let dir = tempfile::tempdir().unwrap();
        let g = default_grid(ProjectionFormat::Ohp, 2048).unwrap();
        let map = density_map(&g);
        let png = dir.path().join("heat.png");
        write_heatmap(&g, &map, &png).unwrap();
        let bytes = std::fs::read(&png).unwrap();
        let text = String::from_utf8_lossy(&bytes);
        assert!(text.contains("normalized per image"));
        let (img, _) = crate::imageio::read_image(&png).unwrap();
        assert_eq!((img.width(), img.height()), (g.width(), g.height()));

        let raw = dir.path().join("density.txt");
        write_raw_values(&g, &map, &raw).unwrap();
        let body = std::fs::read_to_string(&raw).unwrap();
        let rows: Vec<&str> = body.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(rows.len(), g.height());
        assert_eq!(rows[0].split(' ').count(), g.width());
    }

    #[test]
    fn stats_table_renders() {
        let s = distortion_stats(&default_grid(ProjectionFormat::Eac, 2048).unwrap());
        let csv = render_stats(&[s], ReportStyle::Csv);
        assert_eq!(csv.lines().count(), 2);
        assert!(csv.starts_with("format,width,height,"));
        let md = render_stats(&[s], ReportStyle::Markdown);
        assert_eq!(md.lines().count(), 3);
    }
}
