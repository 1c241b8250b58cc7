//! Matrix runs described by a config file.
//!
//! ```text
//! fixtures = 5            # or: inputs = a.png, b.y4m
//! pattern = smooth-harmonic
//! seed = 1
//! width = 256
//! formats = all
//! scales = 2, 3, 4
//! upscaler = bicubic      # or: external + external_command
//! [eac:2]
//! kernel = lanczos3
//! ```

use std::path::{Path, PathBuf};
use std::time::Duration;

use super::{LrOrder, MatrixSpec, PipelineConfig, ReportStyle};
use crate::error::{Error, Result};
use crate::imageio::{gen_pattern, read_image, ConfigEntry, ConfigFile, Pattern, PatternKind};
use crate::projection::{ProjectionFormat, ProjectionGrid};
use crate::raster::{ColorModel, PlanarImage};
use crate::resample::InterpKernel;
use crate::scaler::{ExternalUpscaler, ScaleFactor, Upscaler, WireFormat};

const GLOBAL_KEYS: &[&str] = &[
    "inputs",
    "fixtures",
    "pattern",
    "seed",
    "width",
    "color",
    "degree",
    "formats",
    "scales",
    "kernel",
    "downscale_kernel",
    "upscaler",
    "external_command",
    "wire",
    "timeout",
    "lr_order",
    "budget",
    "jobs",
    "report",
    "style",
    "dump_dir",
];

const CELL_KEYS: &[&str] = &[
    "kernel",
    "downscale_kernel",
    "upscaler",
    "external_command",
    "wire",
    "timeout",
    "lr_order",
    "budget",
];

/// Synthetic HR-ERP inputs: `count` renders of `pattern` with seeds
/// `seed, seed + 1, ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct FixtureSpec {
    pub count: usize,
    pub pattern: PatternKind,
    pub seed: u64,
    pub width: usize,
    pub color: ColorModel,
    pub degree: usize,
}

impl Default for FixtureSpec {
    fn default() -> Self {
        FixtureSpec {
            count: 5,
            pattern: PatternKind::SmoothHarmonic,
            seed: 1,
            width: 256,
            color: ColorModel::Rgb,
            degree: Pattern::DEFAULT_DEGREE,
        }
    }
}

impl FixtureSpec {
    pub fn render(&self) -> Result<Vec<(String, PlanarImage)>> {
        let grid = ProjectionGrid::new(ProjectionFormat::Erp, self.width, self.width / 2)?;
        (0..self.count as u64)
            .map(|k| {
                let seed = self.seed + k;
                let p = Pattern::with_params(self.pattern, self.color, seed, self.degree, Pattern::DEFAULT_CELLS)?;
                Ok((format!("{}-s{seed}", self.pattern), gen_pattern(&p, &grid).quantized()))
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InputSpec {
    Files(Vec<PathBuf>),
    Fixtures(FixtureSpec),
}

impl InputSpec {
    /// Loads or renders the inputs as (name, HR-ERP) pairs.
    pub fn load(&self) -> Result<Vec<(String, PlanarImage)>> {
        match self {
            InputSpec::Fixtures(f) => f.render(),
            InputSpec::Files(paths) => paths
                .iter()
                .map(|p| {
                    let (img, _) = read_image(p)?;
                    let name = p.file_stem().map_or("input".into(), |s| s.to_string_lossy().into_owned());
                    Ok((name, img))
                })
                .collect(),
        }
    }

    /// Short description for report metadata.
    pub fn describe(&self) -> String {
        match self {
            InputSpec::Files(p) => format!("{} file(s)", p.len()),
            InputSpec::Fixtures(f) => format!(
                "{} {} fixture(s), seeds {}..={}, {}x{} {}, degree {}",
                f.count,
                f.pattern,
                f.seed,
                f.seed + f.count.max(1) as u64 - 1,
                f.width,
                f.width / 2,
                f.color,
                f.degree
            ),
        }
    }
}

/// Per-cell settings from a `[format:scale]` section.
#[derive(Debug, Clone, PartialEq)]
pub struct CellOverride {
    pub format: ProjectionFormat,
    pub scale: ScaleFactor,
    pub kernel: Option<InterpKernel>,
    pub downscale_kernel: Option<InterpKernel>,
    pub upscaler: Option<Upscaler>,
    pub lr_order: Option<LrOrder>,
    pub budget: Option<usize>,
}

impl CellOverride {
    pub fn apply(&self, cfg: &mut PipelineConfig) {
        if let Some(k) = self.kernel {
            cfg.kernel = k;
        }
        if let Some(k) = self.downscale_kernel {
            cfg.downscale_kernel = k;
        }
        if let Some(u) = &self.upscaler {
            cfg.upscaler = u.clone();
        }
        if let Some(o) = self.lr_order {
            cfg.lr_order = o;
        }
        if self.budget.is_some() {
            cfg.budget = self.budget;
        }
    }

    pub fn describe(&self) -> String {
        let mut parts = Vec::new();
        if let Some(k) = self.kernel {
            parts.push(format!("kernel={k}"));
        }
        if let Some(k) = self.downscale_kernel {
            parts.push(format!("downscale_kernel={k}"));
        }
        if let Some(u) = &self.upscaler {
            parts.push(format!("upscaler={u}"));
        }
        if let Some(o) = self.lr_order {
            parts.push(format!("lr_order={o}"));
        }
        if let Some(b) = self.budget {
            parts.push(format!("budget={b}"));
        }
        parts.join(" ")
    }
}

/// Everything a `pipeline` invocation needs.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub inputs: InputSpec,
    pub matrix: MatrixSpec,
    pub report: Option<PathBuf>,
    pub style: ReportStyle,
}

impl RunConfig {
    /// Reads a config file; relative paths resolve against its directory.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let cfg = ConfigFile::read(path)?;
        Self::from_config(&cfg, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn from_config(cfg: &ConfigFile, base_dir: &Path) -> Result<Self> {
        for e in &cfg.global {
            if !GLOBAL_KEYS.contains(&e.key.as_str()) {
                return Err(bad(e, "unknown key"));
            }
        }
        let get = |k: &str| cfg.get(k);
        let resolve = |v: &str| {
            let p = PathBuf::from(v);
            if p.is_relative() {
                base_dir.join(p)
            } else {
                p
            }
        };

        let inputs = match (get("inputs"), get("fixtures")) {
            (Some(e), None) => InputSpec::Files(split_list(&e.value).map(resolve).collect()),
            (Some(e), Some(_)) => return Err(bad(e, "use either inputs or fixtures, not both")),
            (None, fix) => {
                let mut f = FixtureSpec::default();
                if let Some(e) = fix {
                    f.count = parse(e)?;
                }
                if let Some(e) = get("pattern") {
                    f.pattern = parse(e)?;
                }
                if let Some(e) = get("seed") {
                    f.seed = parse(e)?;
                }
                if let Some(e) = get("width") {
                    f.width = parse(e)?;
                }
                if let Some(e) = get("color") {
                    f.color = parse(e)?;
                }
                if let Some(e) = get("degree") {
                    f.degree = parse(e)?;
                }
                InputSpec::Fixtures(f)
            }
        };

        let formats = match get("formats") {
            Some(e) if e.value.trim().eq_ignore_ascii_case("all") => ProjectionFormat::ALL.to_vec(),
            Some(e) => split_list(&e.value).map(|v| v.parse().map_err(|err| wrap(e, err))).collect::<Result<_>>()?,
            None => ProjectionFormat::ALL.to_vec(),
        };
        let scales = match get("scales") {
            Some(e) => split_list(&e.value).map(|v| v.parse().map_err(|err| wrap(e, err))).collect::<Result<_>>()?,
            None => ScaleFactor::STANDARD.to_vec(),
        };
        let mut matrix = MatrixSpec::new(formats, scales);
        apply_pipeline_keys(&mut matrix.base, &|k| get(k))?;
        if let Some(e) = get("jobs") {
            matrix.jobs = parse(e)?;
        }
        matrix.dump_dir = get("dump_dir").map(|e| resolve(&e.value));

        for sec in &cfg.sections {
            let (f, s) = sec.name.split_once(':').ok_or(Error::Config {
                line: sec.line,
                reason: format!("section '{}' is not format:scale", sec.name),
            })?;
            let format: ProjectionFormat = f.parse().map_err(|err| Error::Config {
                line: sec.line,
                reason: format!("{err}"),
            })?;
            let scale: ScaleFactor = s.parse().map_err(|err| Error::Config {
                line: sec.line,
                reason: format!("{err}"),
            })?;
            for e in &sec.entries {
                if !CELL_KEYS.contains(&e.key.as_str()) {
                    return Err(bad(e, "key not allowed in a cell section"));
                }
            }
            // Resolve the section against a copy of the base so a partial
            // external setup inherits the global command, wire and timeout.
            let mut probe = matrix.base.clone();
            let lookup = |k: &str| sec.get(k).or_else(|| if k == "upscaler" { None } else { get(k) });
            apply_pipeline_keys(&mut probe, &lookup)?;
            let pick = |k: &str| sec.get(k).is_some();
            let ext_keys = ["upscaler", "external_command", "wire", "timeout"];
            matrix.overrides.push(CellOverride {
                format,
                scale,
                kernel: pick("kernel").then_some(probe.kernel),
                downscale_kernel: pick("downscale_kernel").then_some(probe.downscale_kernel),
                upscaler: ext_keys.iter().any(|k| pick(k)).then(|| probe.upscaler.clone()),
                lr_order: pick("lr_order").then_some(probe.lr_order),
                budget: if pick("budget") { probe.budget } else { None },
            });
        }

        Ok(RunConfig {
            inputs,
            matrix,
            report: get("report").map(|e| resolve(&e.value)),
            style: get("style").map(parse).transpose()?.unwrap_or_default(),
        })
    }
}

fn apply_pipeline_keys<'a>(cfg: &mut PipelineConfig, get: &dyn Fn(&str) -> Option<&'a ConfigEntry>) -> Result<()> {
    if let Some(e) = get("kernel") {
        cfg.kernel = parse(e)?;
    }
    if let Some(e) = get("downscale_kernel") {
        cfg.downscale_kernel = parse(e)?;
    }
    if let Some(e) = get("lr_order") {
        cfg.lr_order = parse(e)?;
    }
    if let Some(e) = get("budget") {
        cfg.budget = Some(parse(e)?);
    }
    let command = get("external_command");
    let upscaler = get("upscaler");
    let external = match upscaler {
        Some(e) if e.value.trim().eq_ignore_ascii_case("external") => true,
        Some(e) => {
            cfg.upscaler = Upscaler::Builtin(parse(e)?);
            false
        }
        None => matches!(cfg.upscaler, Upscaler::External(_)) || command.is_some(),
    };
    if external {
        let e = command.or(upscaler).expect("external implies a key");
        let template = command.ok_or_else(|| bad(e, "upscaler = external needs external_command"))?;
        let mut ext = ExternalUpscaler::new(template.value.trim()).map_err(|err| wrap(template, err))?;
        if let Some(w) = get("wire") {
            ext = ext.with_wire(parse::<WireFormat>(w)?);
        }
        if let Some(t) = get("timeout") {
            ext = ext.with_timeout(Duration::from_secs_f64(parse::<f64>(t)?));
        }
        cfg.upscaler = Upscaler::External(ext);
    }
    Ok(())
}

fn split_list(v: &str) -> impl Iterator<Item = &str> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn parse<T: std::str::FromStr>(e: &ConfigEntry) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    e.value.trim().parse().map_err(|err: T::Err| bad(e, &err.to_string()))
}

fn bad(e: &ConfigEntry, reason: &str) -> Error {
    Error::Config {
        line: e.line,
        reason: format!("{}: {reason}", e.key),
    }
}

fn wrap(e: &ConfigEntry, err: Error) -> Error {
    bad(e, &err.to_string())
}
