use std::path::{Path, PathBuf};
use std::time::Duration;

use log::info;
use omniproj::analysis::{density_map, render_stats, stats_from_map, write_heatmap, write_raw_values};
use omniproj::imageio::{gen_pattern, read_image, write_image, Pattern};
use omniproj::metrics::{evaluate, weights_for, MetricKind};
use omniproj::pipeline::{render_metadata, render_report, run_matrix, FixtureSpec, InputSpec, RunConfig};
use omniproj::resample::convert as convert_image;
use omniproj::scaler::{ExternalUpscaler, Upscaler};
use omniproj::{active_mask, default_grid, Error, ProjectionFormat, ProjectionGrid};

use crate::{AnalyzeArgs, ConvertArgs, Failure, GenArgs, MetricArgs, PipelineArgs, SizeArgs};

type CmdResult = Result<(), Failure>;

/// Default pixel budget: a 512×256 ERP frame.
const DEFAULT_BUDGET: usize = 512 * 256;

fn target_grid(format: ProjectionFormat, size: &SizeArgs, fallback: usize) -> Result<ProjectionGrid, Error> {
    match (size.size, size.budget) {
        (Some((w, h)), _) => ProjectionGrid::new(format, w, h),
        (None, Some(b)) => default_grid(format, b),
        (None, None) => default_grid(format, fallback),
    }
}

pub fn convert(a: ConvertArgs) -> CmdResult {
    let (img, _) = read_image(&a.input)?;
    let src = ProjectionGrid::new(a.from, img.width(), img.height())?;
    let dst = if a.from == a.to && a.size.size.is_none() && a.size.budget.is_none() {
        src
    } else {
        target_grid(a.to, &a.size, active_mask(&src).active_count())?
    };
    let img = img.with_mask(active_mask(&src))?;
    let out = convert_image(&img, &src, &dst, a.kernel)?;
    write_image(&out, &a.output)?;
    println!(
        "{} {}x{} -> {} {}x{} ({})",
        src.format(),
        src.width(),
        src.height(),
        dst.format(),
        dst.width(),
        dst.height(),
        a.output.display()
    );
    Ok(())
}

pub fn metric(a: MetricArgs) -> CmdResult {
    let (ra, _) = read_image(&a.reference)?;
    let (rb, _) = read_image(&a.distorted)?;
    let metrics: Vec<MetricKind> = a.metric.into_iter().flatten().collect();
    let needs_grid = a.format.has_inactive_regions() || metrics.contains(&MetricKind::WsPsnr);
    let (ra, rb, weights) = if needs_grid {
        let grid = ProjectionGrid::new(a.format, ra.width(), ra.height())?;
        let mask = active_mask(&grid);
        let (ra, rb) = if rb.width() == ra.width() && rb.height() == ra.height() {
            (ra.with_mask(mask.clone())?, rb.with_mask(mask)?)
        } else {
            (ra, rb)
        };
        (ra, rb, Some(weights_for(&grid)))
    } else {
        (ra, rb, None)
    };
    for m in metrics {
        for r in evaluate(m, &ra, &rb, weights.as_ref(), a.channel)? {
            println!("{r}");
        }
    }
    Ok(())
}

pub fn pipeline(a: PipelineArgs) -> CmdResult {
    let mut rc = match &a.config {
        Some(path) => RunConfig::from_file(path)?,
        None => run_config_from_flags(&a)?,
    };
    if let Some(j) = a.jobs {
        rc.matrix.jobs = j;
    }
    if a.report.is_some() {
        rc.report = a.report.clone();
    }
    if let Some(s) = a.style {
        rc.style = s;
    }
    if a.dump_dir.is_some() {
        rc.matrix.dump_dir = a.dump_dir.clone();
    }

    let inputs = rc.inputs.load()?;
    info!("{} input image(s), {} cell(s)", inputs.len(), rc.matrix.formats.len() * rc.matrix.scales.len());
    let mut report = run_matrix(&inputs, &rc.matrix)?;
    report.metadata.push(("input_set".into(), rc.inputs.describe()));
    let table = render_report(&report, rc.style);
    let meta = render_metadata(&report);
    match &rc.report {
        Some(path) => {
            write_text(path, &table)?;
            let meta_path = with_suffix(path, ".meta");
            write_text(&meta_path, &meta)?;
            println!("report: {}", path.display());
            println!("metadata: {}", meta_path.display());
        }
        None => {
            print!("{table}");
            eprint!("{meta}");
        }
    }
    let failed = report.failures();
    if failed > 0 {
        eprintln!("warning: {failed} of {} cell(s) failed", report.rows.len());
    }
    if failed == report.rows.len() && failed > 0 {
        return Err(Failure::Tool(Error::InvalidInput("every pipeline cell failed".into())));
    }
    Ok(())
}

fn run_config_from_flags(a: &PipelineArgs) -> Result<RunConfig, Failure> {
    let inputs = if a.inputs.is_empty() {
        let mut f = FixtureSpec::default();
        f.count = a.fixtures.unwrap_or(f.count);
        f.pattern = a.pattern.unwrap_or(f.pattern);
        f.seed = a.seed.unwrap_or(f.seed);
        f.width = a.width.unwrap_or(f.width);
        f.color = a.color.unwrap_or(f.color);
        f.degree = a.degree.unwrap_or(f.degree);
        InputSpec::Fixtures(f)
    } else {
        InputSpec::Files(a.inputs.clone())
    };
    let formats = a.formats.clone().unwrap_or_else(|| ProjectionFormat::ALL.to_vec());
    let scales = if a.scales.is_empty() {
        omniproj::scaler::ScaleFactor::STANDARD.to_vec()
    } else {
        a.scales.clone()
    };
    let mut matrix = omniproj::pipeline::MatrixSpec::new(formats, scales);
    let base = &mut matrix.base;
    base.kernel = a.kernel.unwrap_or(base.kernel);
    base.downscale_kernel = a.downscale_kernel.unwrap_or(base.downscale_kernel);
    base.lr_order = a.lr_order.unwrap_or(base.lr_order);
    base.budget = a.budget;
    base.upscaler = match (a.upscaler.as_deref(), &a.external_command) {
        (Some(u), None) if u.eq_ignore_ascii_case("external") => {
            return Err(Failure::Usage("--upscaler external needs --external-command".into()))
        }
        (Some(u), Some(_)) if !u.eq_ignore_ascii_case("external") => {
            return Err(Failure::Usage("--external-command needs --upscaler external".into()))
        }
        (_, Some(cmd)) => {
            let mut ext = ExternalUpscaler::new(cmd.as_str()).map_err(|e| Failure::Usage(e.to_string()))?;
            if let Some(w) = a.wire {
                ext = ext.with_wire(w);
            }
            if let Some(t) = a.timeout {
                ext = ext.with_timeout(Duration::from_secs_f64(t));
            }
            Upscaler::External(ext)
        }
        (Some(k), None) => Upscaler::Builtin(k.parse().map_err(|e: Error| Failure::Usage(e.to_string()))?),
        (None, None) => Upscaler::default(),
    };
    Ok(RunConfig {
        inputs,
        matrix,
        report: None,
        style: Default::default(),
    })
}

pub fn analyze(a: AnalyzeArgs) -> CmdResult {
    let Some(formats) = a.format.clone().filter(|f| !f.is_empty()) else {
        return Err(Failure::Usage("--format is required (a format, a list or `all`)".into()));
    };
    let mut stats = Vec::new();
    let mut written = Vec::new();
    if let Some(dir) = &a.out_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io {
            path: dir.clone(),
            source: e,
        })?;
    }
    for f in formats {
        let grid = target_grid(f, &a.size, DEFAULT_BUDGET)?;
        let map = density_map(&grid);
        stats.push(stats_from_map(&grid, &map));
        if let Some(dir) = &a.out_dir {
            let stem = f.name().to_ascii_lowercase();
            let png = dir.join(format!("{stem}_density.png"));
            let txt = dir.join(format!("{stem}_density.txt"));
            write_heatmap(&grid, &map, &png)?;
            write_raw_values(&grid, &map, &txt)?;
            written.extend([png, txt]);
        }
    }
    print!("{}", render_stats(&stats, a.style));
    for p in written {
        eprintln!("wrote {}", p.display());
    }
    Ok(())
}

pub fn gen(a: GenArgs) -> CmdResult {
    let grid = target_grid(a.format, &a.size, DEFAULT_BUDGET)?;
    let pattern = Pattern::with_params(a.kind, a.color, a.seed, a.degree, a.cells).map_err(|e| Failure::Usage(e.to_string()))?;
    let img = gen_pattern(&pattern, &grid);
    write_image(&img, &a.out)?;
    println!(
        "{} {} {}x{} seed {} ({})",
        a.kind,
        grid.format(),
        grid.width(),
        grid.height(),
        a.seed,
        a.out.display()
    );
    Ok(())
}

fn write_text(path: &Path, text: &str) -> Result<(), Error> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io {
            path: dir.to_path_buf(),
            source: e,
        })?;
    }
    std::fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}
