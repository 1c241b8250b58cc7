//! `omniproj` command-line front end.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use omniproj::imageio::PatternKind;
use omniproj::metrics::{ChannelSelect, MetricKind};
use omniproj::pipeline::{LrOrder, ReportStyle};
use omniproj::scaler::{ScaleFactor, WireFormat};
use omniproj::{ColorModel, InterpKernel, ProjectionFormat};

mod commands;

const AFTER_HELP: &str = "\
Formats (FMT): erp, cmp, eac, isp, ohp, tsp, ssp
  ERP equirectangular, CMP cube map, EAC equi-angular cube map,
  ISP icosahedron, OHP octahedron, TSP truncated square pyramid,
  SSP segmented sphere
Scales: 2, 3, 4 (also written x2, x3, x4; 1 is an identity test mode)
Kernels: nearest, bilinear, bicubic, lanczos3

Exit codes: 0 success, 1 usage error, 2 I/O error, 3 computation error";

#[derive(Debug, Parser)]
#[command(name = "omniproj", version, about = "360° projection conversion, metrics and SR evaluation")]
#[command(after_help = AFTER_HELP)]
struct Cli {
    /// More log output on stderr (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Resample an image from one projection format to another.
    Convert(ConvertArgs),
    /// Compare two images (PSNR, WS-PSNR, SSIM).
    Metric(MetricArgs),
    /// Run the round-trip SR evaluation over formats × scales.
    Pipeline(Box<PipelineArgs>),
    /// Per-pixel sampling density: heatmap, raw values and statistics.
    Analyze(AnalyzeArgs),
    /// Render a synthetic test pattern in any format.
    Gen(GenArgs),
}

/// Target size: either a pixel budget or explicit dimensions.
#[derive(Debug, Args)]
struct SizeArgs {
    /// Active pixel budget of the output grid.
    #[arg(long, conflicts_with = "size")]
    budget: Option<usize>,
    /// Exact output dimensions, WxH.
    #[arg(long, value_parser = parse_size)]
    size: Option<(usize, usize)>,
}

#[derive(Debug, Args)]
struct ConvertArgs {
    input: PathBuf,
    output: PathBuf,
    /// Format of the input.
    #[arg(long, value_name = "FMT")]
    from: ProjectionFormat,
    /// Format of the output.
    #[arg(long, value_name = "FMT")]
    to: ProjectionFormat,
    #[command(flatten)]
    size: SizeArgs,
    #[arg(long, default_value = "bicubic")]
    kernel: InterpKernel,
}

#[derive(Debug, Args)]
struct MetricArgs {
    reference: PathBuf,
    distorted: PathBuf,
    /// psnr, ws-psnr or ssim; repeat or use `all` for several.
    #[arg(long, default_value = "ws-psnr", value_parser = parse_metrics)]
    metric: Vec<Vec<MetricKind>>,
    /// Projection format of both images (selects WS-PSNR weights and the active mask).
    #[arg(long, value_name = "FMT", default_value = "erp")]
    format: ProjectionFormat,
    /// y (luma) or all (every stored plane).
    #[arg(long, default_value = "y")]
    channel: ChannelSelect,
}

#[derive(Debug, Args)]
struct PipelineArgs {
    /// Matrix description file; other matrix flags are then not allowed.
    #[arg(long, conflicts_with_all = [
        "inputs", "fixtures", "formats", "scales", "kernel", "downscale_kernel", "upscaler",
        "external_command", "lr_order", "budget", "pattern", "seed", "width", "color", "degree",
    ])]
    config: Option<PathBuf>,
    /// HR-ERP input images (PNG, Y4M, raw YUV).
    #[arg(long = "input", value_name = "FILE")]
    inputs: Vec<PathBuf>,
    /// Number of synthetic HR-ERP fixtures when no input is given (default 5).
    #[arg(long, conflicts_with = "inputs")]
    fixtures: Option<usize>,
    #[arg(long)]
    pattern: Option<PatternKind>,
    #[arg(long)]
    seed: Option<u64>,
    /// Fixture width (height is half).
    #[arg(long)]
    width: Option<usize>,
    #[arg(long)]
    color: Option<ColorModel>,
    /// Harmonic degree of smooth-harmonic fixtures.
    #[arg(long)]
    degree: Option<usize>,
    /// Comma-separated formats, or `all` (default).
    #[arg(long, value_name = "FMT,...", value_parser = parse_formats)]
    formats: Option<::std::vec::Vec<ProjectionFormat>>,
    /// Comma-separated scale factors (default 2,3,4).
    #[arg(long, value_delimiter = ',')]
    scales: Vec<ScaleFactor>,
    /// Kernel of the sphere conversions.
    #[arg(long)]
    kernel: Option<InterpKernel>,
    /// Kernel used to make the LR image.
    #[arg(long)]
    downscale_kernel: Option<InterpKernel>,
    /// Builtin kernel name, or `external` (needs --external-command).
    #[arg(long)]
    upscaler: Option<String>,
    /// Upscaler command template with {in}, {out} and {scale}; run without a shell.
    #[arg(long)]
    external_command: Option<String>,
    /// Handoff format for the external upscaler (png or y4m).
    #[arg(long)]
    wire: Option<WireFormat>,
    /// External upscaler timeout in seconds.
    #[arg(long)]
    timeout: Option<f64>,
    /// downscale-then-project (default) or project-then-downscale.
    #[arg(long)]
    lr_order: Option<LrOrder>,
    /// Pixel budget of the LR format grid (default: LR-ERP pixel count).
    #[arg(long)]
    budget: Option<usize>,
    /// Worker threads for the matrix cells (0 = all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Write the report here instead of stdout; metadata goes to <report>.meta.
    #[arg(long)]
    report: Option<PathBuf>,
    /// csv or markdown.
    #[arg(long)]
    style: Option<ReportStyle>,
    /// Dump every stage image under this directory.
    #[arg(long)]
    dump_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    /// Format(s) to analyze, comma-separated or `all`.
    #[arg(long, value_name = "FMT,...", value_parser = parse_formats)]
    format: Option<::std::vec::Vec<ProjectionFormat>>,
    #[command(flatten)]
    size: SizeArgs,
    /// Directory for <fmt>_density.png and <fmt>_density.txt.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    style: ReportStyle,
}

#[derive(Debug, Args)]
struct GenArgs {
    /// latlon-grid, smooth-harmonic or checker-sphere.
    #[arg(long)]
    kind: PatternKind,
    #[arg(long, value_name = "FMT", default_value = "erp")]
    format: ProjectionFormat,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    size: SizeArgs,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value = "rgb")]
    color: ColorModel,
    /// Harmonic band limit.
    #[arg(long, default_value_t = 8)]
    degree: usize,
    /// Checker cells around the equator (even).
    #[arg(long, default_value_t = 12)]
    cells: usize,
}

fn parse_size(s: &str) -> Result<(usize, usize), String> {
    let (w, h) = s.split_once(['x', 'X']).ok_or_else(|| format!("expected WxH, got '{s}'"))?;
    let n = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("'{v}': {e}"));
    Ok((n(w)?, n(h)?))
}

fn parse_formats(s: &str) -> Result<Vec<ProjectionFormat>, String> {
    if s.trim().eq_ignore_ascii_case("all") {
        return Ok(ProjectionFormat::ALL.to_vec());
    }
    s.split(',').map(|f| f.parse().map_err(|e: omniproj::Error| e.to_string())).collect()
}

fn parse_metrics(s: &str) -> Result<Vec<MetricKind>, String> {
    if s.trim().eq_ignore_ascii_case("all") {
        return Ok(MetricKind::ALL.to_vec());
    }
    s.split(',').map(|m| m.parse().map_err(|e: omniproj::Error| e.to_string())).collect()
}

/// How a failed command maps onto the exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Tool(omniproj::Error),
}

impl From<omniproj::Error> for Failure {
    fn from(e: omniproj::Error) -> Self {
        match e {
            omniproj::Error::Config { .. } => Failure::Usage(e.to_string()),
            e => Failure::Tool(e),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).init();

    let result = match cli.command {
        Command::Convert(a) => commands::convert(a),
        Command::Metric(a) => commands::metric(a),
        Command::Pipeline(a) => commands::pipeline(*a),
        Command::Analyze(a) => commands::analyze(a),
        Command::Gen(a) => commands::gen(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Tool(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_io() { 2 } else { 3 })
        }
    }
}
