//! Round-trip super-resolution evaluation.
//!
//! For a format F and scale f, a high-resolution ERP frame goes through
//!
//! ```text
//! HR-ERP --downscale--> LR-ERP --to F--> LR-F --upscale--> SR-F --to ERP--> SR-ERP
//! ```
//!
//! and SR-ERP is scored against HR-ERP. Every stage is quantized to 8 bits,
//! as if written to disk, so a run resumed from a dumped stage reproduces
//! the downstream stages exactly. The low-resolution format grid gets the
//! same pixel budget as LR-ERP, so formats compete on how they spend pixels.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use log::{info, warn};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::imageio::{write_image_as, PixelFormat};
use crate::metrics::{erp_weights, format_value, psnr, ssim_with, ws_psnr, y_channel};
use crate::projection::{active_mask, default_grid, ProjectionFormat, ProjectionGrid};
use crate::raster::{ColorModel, PlanarImage};
use crate::resample::{convert_with, InterpKernel};
use crate::scaler::{downscale_with, resize_to, upscale_with, ScaleFactor, Upscaler};

mod config;

pub use config::{CellOverride, FixtureSpec, InputSpec, RunConfig};

/// Where the low-resolution image is made.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum LrOrder {
    /// Downscale HR-ERP, then project the LR-ERP into the format.
    #[default]
    DownscaleThenProject,
    /// Project HR-ERP into the format at f× the LR grid, then downscale there.
    ProjectThenDownscale,
}

impl LrOrder {
    pub fn name(self) -> &'static str {
        match self {
            LrOrder::DownscaleThenProject => "downscale-then-project",
            LrOrder::ProjectThenDownscale => "project-then-downscale",
        }
    }
}

impl fmt::Display for LrOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LrOrder {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "downscale-then-project" => Ok(LrOrder::DownscaleThenProject),
            "project-then-downscale" => Ok(LrOrder::ProjectThenDownscale),
            _ => Err(Error::InvalidInput(format!("unknown lr order '{s}'"))),
        }
    }
}

/// Intermediate images of a round trip.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stage {
    LrErp,
    HrFmt,
    LrFmt,
    SrFmt,
    SrErp,
}

impl Stage {
    pub const ALL: [Stage; 5] = [Stage::LrErp, Stage::HrFmt, Stage::LrFmt, Stage::SrFmt, Stage::SrErp];

    pub fn name(self) -> &'static str {
        match self {
            Stage::LrErp => "lr-erp",
            Stage::HrFmt => "hr-fmt",
            Stage::LrFmt => "lr-fmt",
            Stage::SrFmt => "sr-fmt",
            Stage::SrErp => "sr-erp",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stage {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Stage::ALL
            .into_iter()
            .find(|st| st.name() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| Error::InvalidInput(format!("unknown stage '{s}'")))
    }
}

/// Settings of one round trip.
#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub format: ProjectionFormat,
    pub scale: ScaleFactor,
    /// Kernel of both sphere conversions.
    pub kernel: InterpKernel,
    /// Kernel of the LR generation.
    pub downscale_kernel: InterpKernel,
    pub upscaler: Upscaler,
    pub lr_order: LrOrder,
    /// Pixel budget of the LR format grid; `None` uses the LR-ERP pixel count.
    pub budget: Option<usize>,
    pub exec: Exec,
}

impl PipelineConfig {
    pub fn new(format: ProjectionFormat, scale: ScaleFactor) -> Self {
        PipelineConfig {
            format,
            scale,
            kernel: InterpKernel::Bicubic,
            downscale_kernel: InterpKernel::Bicubic,
            upscaler: Upscaler::default(),
            lr_order: LrOrder::default(),
            budget: None,
            exec: Exec::default(),
        }
    }
}

/// Grids used by a round trip.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageGrids {
    pub hr_erp: ProjectionGrid,
    pub lr_erp: ProjectionGrid,
    pub lr_fmt: ProjectionGrid,
    pub sr_fmt: ProjectionGrid,
}

impl StageGrids {
    /// LR-ERP is `HR / f` when the height divides, otherwise the nearest
    /// 2:1 size. The format grid defaults to the LR-ERP budget; for ERP it
    /// is LR-ERP itself so the conversions vanish.
    pub fn new(hr_w: usize, hr_h: usize, cfg: &PipelineConfig) -> Result<Self> {
        let hr_erp = ProjectionGrid::new(ProjectionFormat::Erp, hr_w, hr_h)?;
        let f = cfg.scale.get();
        let lh = ((hr_h as f64 / f as f64).round() as usize).max(1);
        let lr_erp = ProjectionGrid::new(ProjectionFormat::Erp, 2 * lh, lh)?;
        let lr_fmt = match (cfg.format, cfg.budget) {
            (ProjectionFormat::Erp, None) => lr_erp,
            (fmt, b) => default_grid(fmt, b.unwrap_or(lr_erp.pixel_count()))?,
        };
        let sr_fmt = lr_fmt.scaled(f)?;
        Ok(StageGrids {
            hr_erp,
            lr_erp,
            lr_fmt,
            sr_fmt,
        })
    }

    pub fn grid(&self, stage: Stage) -> ProjectionGrid {
        match stage {
            Stage::LrErp => self.lr_erp,
            Stage::HrFmt | Stage::SrFmt => self.sr_fmt,
            Stage::LrFmt => self.lr_fmt,
            Stage::SrErp => self.hr_erp,
        }
    }
}

/// Scores of SR-ERP against HR-ERP on the Y channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scores {
    pub ws_psnr: f64,
    pub psnr: f64,
    pub ssim: f64,
}

#[derive(Debug, Clone)]
pub struct RoundTrip {
    pub grids: StageGrids,
    /// Every stage that was computed, in pipeline order.
    pub stages: Vec<(Stage, PlanarImage)>,
    pub scores: Scores,
}

impl RoundTrip {
    pub fn stage(&self, stage: Stage) -> Option<&PlanarImage> {
        self.stages.iter().find(|(s, _)| *s == stage).map(|(_, img)| img)
    }

    pub fn sr_erp(&self) -> &PlanarImage {
        self.stage(Stage::SrErp).expect("every round trip ends in SR-ERP")
    }

    /// Writes each stage into `dir` losslessly (PNG for gray/RGB, 4:4:4 Y4M
    /// for YUV). Returns the written paths.
    pub fn dump(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut out = Vec::new();
        for (stage, img) in &self.stages {
            let path = dir.join(stage_file_name(*stage, img.color()));
            write_image_as(img, lossless_format(img.color()), &path)?;
            out.push(path);
        }
        Ok(out)
    }
}

pub fn stage_file_name(stage: Stage, color: ColorModel) -> String {
    let ext = if color == ColorModel::Yuv { "y4m" } else { "png" };
    format!("{stage}.{ext}")
}

fn lossless_format(color: ColorModel) -> PixelFormat {
    match color {
        ColorModel::Gray => PixelFormat::Gray8,
        ColorModel::Rgb => PixelFormat::Rgb24,
        ColorModel::Yuv => PixelFormat::Yuv444p8,
    }
}

/// Quantizes and attaches the grid's mask.
fn settle(img: PlanarImage, grid: &ProjectionGrid) -> Result<PlanarImage> {
    Ok(img.with_mask(active_mask(grid))?.quantized())
}

fn check_hr(hr: &PlanarImage) -> Result<()> {
    if hr.width() != 2 * hr.height() {
        return Err(Error::InvalidInput(format!(
            "HR-ERP must be 2:1, got {}x{}",
            hr.width(),
            hr.height()
        )));
    }
    Ok(())
}

/// Runs the whole chain on an HR-ERP frame.
pub fn run_roundtrip(hr_erp: &PlanarImage, cfg: &PipelineConfig) -> Result<RoundTrip> {
    check_hr(hr_erp)?;
    let grids = StageGrids::new(hr_erp.width(), hr_erp.height(), cfg)?;
    let hr = hr_erp.quantized();
    let (first, img) = match cfg.lr_order {
        LrOrder::DownscaleThenProject => (Stage::LrErp, lr_erp(&hr, &grids, cfg)?),
        LrOrder::ProjectThenDownscale => {
            let img = convert_with(&hr, &grids.hr_erp, &grids.sr_fmt, cfg.kernel, cfg.exec)?;
            (Stage::HrFmt, settle(img, &grids.sr_fmt)?)
        }
    };
    let mut stages = vec![(first, img)];
    continue_from(&hr, &grids, cfg, &mut stages)
}

/// Resumes the chain from a stage image (typically read back from a dump).
/// `stage` must belong to `cfg.lr_order`.
pub fn run_from_stage(
    stage: Stage,
    stage_img: &PlanarImage,
    hr_erp: &PlanarImage,
    cfg: &PipelineConfig,
) -> Result<RoundTrip> {
    check_hr(hr_erp)?;
    let grids = StageGrids::new(hr_erp.width(), hr_erp.height(), cfg)?;
    let valid = match cfg.lr_order {
        LrOrder::DownscaleThenProject => stage != Stage::HrFmt,
        LrOrder::ProjectThenDownscale => stage != Stage::LrErp,
    };
    if !valid {
        return Err(Error::InvalidInput(format!("stage {stage} is not part of {}", cfg.lr_order)));
    }
    let g = grids.grid(stage);
    if stage_img.width() != g.width() || stage_img.height() != g.height() {
        return Err(Error::DimensionMismatch(format!(
            "stage {stage} expects {}x{}, got {}x{}",
            g.width(),
            g.height(),
            stage_img.width(),
            stage_img.height()
        )));
    }
    let img = settle(stage_img.clone(), &g)?;
    let mut stages = vec![(stage, img)];
    continue_from(&hr_erp.quantized(), &grids, cfg, &mut stages)
}

fn lr_erp(hr: &PlanarImage, grids: &StageGrids, cfg: &PipelineConfig) -> Result<PlanarImage> {
    let (lw, lh) = (grids.lr_erp.width(), grids.lr_erp.height());
    let img = if lw * cfg.scale.get() == hr.width() && lh * cfg.scale.get() == hr.height() {
        downscale_with(hr, cfg.scale, cfg.downscale_kernel, cfg.exec)
    } else {
        resize_to(hr, lw, lh, cfg.downscale_kernel, cfg.exec)?
    };
    settle(img, &grids.lr_erp)
}

fn continue_from(
    hr: &PlanarImage,
    grids: &StageGrids,
    cfg: &PipelineConfig,
    stages: &mut Vec<(Stage, PlanarImage)>,
) -> Result<RoundTrip> {
    loop {
        let (stage, img) = stages.last().expect("at least one stage");
        let next = match stage {
            Stage::LrErp => {
                let out = convert_with(img, &grids.lr_erp, &grids.lr_fmt, cfg.kernel, cfg.exec)?;
                (Stage::LrFmt, settle(out, &grids.lr_fmt)?)
            }
            Stage::HrFmt => {
                let out = downscale_with(img, cfg.scale, cfg.downscale_kernel, cfg.exec);
                (Stage::LrFmt, settle(out, &grids.lr_fmt)?)
            }
            Stage::LrFmt => {
                let out = upscale_with(img, cfg.scale, &cfg.upscaler, cfg.exec)?;
                (Stage::SrFmt, settle(out, &grids.sr_fmt)?)
            }
            Stage::SrFmt => {
                let out = convert_with(img, &grids.sr_fmt, &grids.hr_erp, cfg.kernel, cfg.exec)?;
                (Stage::SrErp, settle(out, &grids.hr_erp)?)
            }
            Stage::SrErp => break,
        };
        stages.push(next);
    }
    let sr = &stages.last().expect("at least one stage").1;
    let scores = score(hr, sr, cfg.exec)?;
    Ok(RoundTrip {
        grids: *grids,
        stages: std::mem::take(stages),
        scores,
    })
}

/// WS-PSNR, PSNR and SSIM of `sr` against `hr` on Y, ERP-weighted.
pub fn score(hr: &PlanarImage, sr: &PlanarImage, exec: Exec) -> Result<Scores> {
    let grid = ProjectionGrid::new(ProjectionFormat::Erp, hr.width(), hr.height())?;
    let (a, b) = (y_channel(hr)?, y_channel(sr)?);
    Ok(Scores {
        ws_psnr: ws_psnr(&a, &b, &erp_weights(&grid)?, 1.0)?.value,
        psnr: psnr(&a, &b, 1.0)?.value,
        ssim: ssim_with(&a, &b, exec)?.value,
    })
}

/// Table style of rendered reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ReportStyle {
    #[default]
    Csv,
    Markdown,
}

impl ReportStyle {
    pub(crate) fn table(self, header: &[&str], rows: &[Vec<String>]) -> String {
        let mut s = String::new();
        match self {
            ReportStyle::Csv => {
                s.push_str(&header.join(","));
                s.push('\n');
                for r in rows {
                    s.push_str(&r.join(","));
                    s.push('\n');
                }
            }
            ReportStyle::Markdown => {
                s.push_str(&format!("| {} |\n", header.join(" | ")));
                let rule: Vec<&str> = (0..header.len()).map(|k| if k < 2 { "---" } else { "---:" }).collect();
                s.push_str(&format!("|{}|\n", rule.join("|")));
                for r in rows {
                    s.push_str(&format!("| {} |\n", r.join(" | ")));
                }
            }
        }
        s
    }
}

impl FromStr for ReportStyle {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportStyle::Csv),
            "markdown" | "md" => Ok(ReportStyle::Markdown),
            _ => Err(Error::InvalidInput(format!("unknown report style '{s}'"))),
        }
    }
}

/// One (format, scale) cell of a matrix run: the arithmetic mean (in dB for
/// the PSNRs) over the input images, or the error that stopped the cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub format: ProjectionFormat,
    pub scale: ScaleFactor,
    pub scores: std::result::Result<Scores, String>,
    pub images: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PipelineReport {
    pub rows: Vec<ReportRow>,
    /// Run settings as ordered key/value pairs.
    pub metadata: Vec<(String, String)>,
}

impl PipelineReport {
    pub fn row(&self, format: ProjectionFormat, scale: ScaleFactor) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.format == format && r.scale == scale)
    }

    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.scores.is_err()).count()
    }
}

/// Results table with columns format, scale, WS-PSNR, PSNR, SSIM at three
/// decimals; infinite PSNRs print as `inf`, failed cells as `error`.
pub fn render_report(report: &PipelineReport, style: ReportStyle) -> String {
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            let mut v = vec![r.format.to_string(), r.scale.to_string()];
            match &r.scores {
                Ok(s) => v.extend([s.ws_psnr, s.psnr, s.ssim].map(|x| format_value(x, 3))),
                Err(_) => v.extend(["error"; 3].map(String::from)),
            }
            v
        })
        .collect();
    style.table(&["format", "scale", "WS-PSNR", "PSNR", "SSIM"], &rows)
}

/// `key = value` lines of the report metadata followed by one `error.*`
/// line per failed cell.
pub fn render_metadata(report: &PipelineReport) -> String {
    let mut s = String::new();
    for (k, v) in &report.metadata {
        s.push_str(&format!("{k} = {v}\n"));
    }
    for r in &report.rows {
        if let Err(e) = &r.scores {
            s.push_str(&format!("error.{}.{} = {}\n", r.format, r.scale, e.replace('\n', " ")));
        }
    }
    s
}

/// A matrix run: every format × scale over every input image.
#[derive(Debug, Clone)]
pub struct MatrixSpec {
    pub formats: Vec<ProjectionFormat>,
    pub scales: Vec<ScaleFactor>,
    /// Settings shared by all cells; format and scale are overwritten.
    pub base: PipelineConfig,
    pub overrides: Vec<CellOverride>,
    /// Cells run concurrently; 0 uses every core.
    pub jobs: usize,
    /// If set, each cell dumps its stages under `<dir>/<format>_<scale>/<image>/`.
    pub dump_dir: Option<PathBuf>,
}

impl MatrixSpec {
    pub fn new(formats: Vec<ProjectionFormat>, scales: Vec<ScaleFactor>) -> Self {
        MatrixSpec {
            formats,
            scales,
            base: PipelineConfig::new(ProjectionFormat::Erp, ScaleFactor::X2),
            overrides: Vec::new(),
            jobs: 0,
            dump_dir: None,
        }
    }

    pub fn cell_config(&self, format: ProjectionFormat, scale: ScaleFactor) -> PipelineConfig {
        let mut cfg = self.base.clone();
        cfg.format = format;
        cfg.scale = scale;
        for o in self.overrides.iter().filter(|o| o.format == format && o.scale == scale) {
            o.apply(&mut cfg);
        }
        cfg
    }

    fn metadata(&self, inputs: &[(String, PlanarImage)]) -> Vec<(String, String)> {
        let b = &self.base;
        let mut m = vec![
            ("tool".into(), format!("omniproj {}", env!("CARGO_PKG_VERSION"))),
            ("conversion_kernel".into(), b.kernel.to_string()),
            ("downscale_kernel".into(), b.downscale_kernel.to_string()),
            ("upscaler".into(), b.upscaler.to_string()),
            ("lr_order".into(), b.lr_order.to_string()),
            (
                "budget".into(),
                b.budget.map_or("LR-ERP pixel count".into(), |v| v.to_string()),
            ),
            ("quantization".into(), "8-bit at every stage".into()),
            ("metric_channel".into(), "Y (BT.709 luma for RGB input)".into()),
            (
                "metric_channel_note".into(),
                "reference results do not state Y or RGB; Y is assumed".into(),
            ),
            ("ws_psnr_weights".into(), "ERP cos(latitude)".into()),
            ("averaging".into(), "arithmetic mean of per-image values (dB for PSNRs)".into()),
            (
                "inputs".into(),
                inputs.iter().map(|(n, _)| n.as_str()).collect::<Vec<_>>().join(" "),
            ),
        ];
        for o in &self.overrides {
            m.push((format!("override.{}.{}", o.format, o.scale), o.describe()));
        }
        m
    }
}

/// Runs every (format, scale) cell over `inputs` (name, HR-ERP). Cells run
/// concurrently on a pool of `spec.jobs` threads; a failing cell is
/// recorded in its row and does not stop the others. Row order follows
/// `spec.formats` then `spec.scales`.
pub fn run_matrix(inputs: &[(String, PlanarImage)], spec: &MatrixSpec) -> Result<PipelineReport> {
    if inputs.is_empty() {
        return Err(Error::InvalidInput("matrix run needs at least one input".into()));
    }
    let cells: Vec<(ProjectionFormat, ScaleFactor)> = spec
        .formats
        .iter()
        .flat_map(|&f| spec.scales.iter().map(move |&s| (f, s)))
        .collect();
    let exec = if spec.jobs == 1 { Exec::Sequential } else { spec.base.exec };
    let rows = with_workers(spec.jobs, || {
        exec.map(cells.len(), |k| {
            let (format, scale) = cells[k];
            let scores = run_cell(inputs, spec, format, scale).map_err(|e| {
                warn!("{format} {scale}: {e}");
                e.to_string()
            });
            ReportRow {
                format,
                scale,
                scores,
                images: inputs.len(),
            }
        })
    })?;
    Ok(PipelineReport {
        rows,
        metadata: spec.metadata(inputs),
    })
}

fn run_cell(
    inputs: &[(String, PlanarImage)],
    spec: &MatrixSpec,
    format: ProjectionFormat,
    scale: ScaleFactor,
) -> Result<Scores> {
    let cfg = spec.cell_config(format, scale);
    let mut sum = Scores {
        ws_psnr: 0.0,
        psnr: 0.0,
        ssim: 0.0,
    };
    for (name, img) in inputs {
        let rt = run_roundtrip(img, &cfg)?;
        if let Some(dir) = &spec.dump_dir {
            rt.dump(&dir.join(format!("{format}_{scale}")).join(name))?;
        }
        info!("{format} {scale} {name}: WS-PSNR {:.3}", rt.scores.ws_psnr);
        sum.ws_psnr += rt.scores.ws_psnr;
        sum.psnr += rt.scores.psnr;
        sum.ssim += rt.scores.ssim;
    }
    let n = inputs.len() as f64;
    Ok(Scores {
        ws_psnr: sum.ws_psnr / n,
        psnr: sum.psnr / n,
        ssim: sum.ssim / n,
    })
}

/// Runs `f` on a dedicated pool of `jobs` threads (0 = all cores).
#[cfg(feature = "parallel")]
fn with_workers<R: Send>(jobs: usize, f: impl FnOnce() -> R + Send) -> Result<R> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidInput(format!("cannot start {jobs} workers: {e}")))?;
    Ok(pool.install(f))
}

#[cfg(not(feature = "parallel"))]
fn with_workers<R: Send>(_jobs: usize, f: impl FnOnce() -> R + Send) -> Result<R> {
    Ok(f())
}
