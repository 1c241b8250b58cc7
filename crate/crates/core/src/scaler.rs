//! Downscaling (LR generation) and upscaling, including the handoff to an
//! external super-resolution process.
//!
//! Pixel-center alignment: output pixel `i` of a ×f upscale sits at input
//! index coordinate `(i + 0.5)/f − 0.5`; output pixel `i` of a ÷f downscale
//! sits at `(i + 0.5)·f − 0.5`. Borders are extended by half-sample
//! symmetric reflection, and inactive input pixels are excluded by
//! normalized convolution.

use std::fmt;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::imageio::{read_image, write_image_as, PixelFormat};
use crate::raster::{inactive_fill, ColorModel, PlanarImage};
use crate::resample::{taps, InterpKernel};

/// Integer scale factor. 2, 3 and 4 are the evaluated factors; 1 is an
/// identity test mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ScaleFactor(usize);

impl ScaleFactor {
    pub const X2: ScaleFactor = ScaleFactor(2);
    pub const X3: ScaleFactor = ScaleFactor(3);
    pub const X4: ScaleFactor = ScaleFactor(4);
    pub const STANDARD: [ScaleFactor; 3] = [Self::X2, Self::X3, Self::X4];

    pub fn new(f: usize) -> Result<Self> {
        if (1..=4).contains(&f) {
            Ok(ScaleFactor(f))
        } else {
            Err(Error::InvalidInput(format!("scale factor must be 2, 3 or 4 (or 1 for testing), got {f}")))
        }
    }

    pub fn get(self) -> usize {
        self.0
    }

    pub fn is_test_mode(self) -> bool {
        self.0 == 1
    }
}

impl fmt::Display for ScaleFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "X{}", self.0)
    }
}

impl FromStr for ScaleFactor {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let digits = t.strip_prefix(['x', 'X']).unwrap_or(t);
        let f = digits
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad scale factor '{s}'")))?;
        Self::new(f)
    }
}

/// File format used to hand images to an external upscaler.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WireFormat {
    /// 8-bit PNG (gray or RGB images).
    Png,
    /// Single-frame Y4M, 4:4:4 for YUV images so the handoff is lossless.
    Y4m,
}

impl WireFormat {
    pub fn for_color(color: ColorModel) -> Self {
        match color {
            ColorModel::Yuv => WireFormat::Y4m,
            _ => WireFormat::Png,
        }
    }

    fn extension(self) -> &'static str {
        match self {
            WireFormat::Png => "png",
            WireFormat::Y4m => "y4m",
        }
    }

    fn pixel_format(self, color: ColorModel) -> Result<PixelFormat> {
        match (self, color) {
            (_, ColorModel::Gray) => Ok(PixelFormat::Gray8),
            (WireFormat::Png, ColorModel::Rgb) => Ok(PixelFormat::Rgb24),
            (WireFormat::Y4m, ColorModel::Yuv) => Ok(PixelFormat::Yuv444p8),
            (w, c) => Err(Error::UnsupportedFormat(format!("{c} images cannot be sent as {w:?}"))),
        }
    }
}

impl FromStr for WireFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "png" => Ok(WireFormat::Png),
            "y4m" => Ok(WireFormat::Y4m),
            other => Err(Error::InvalidInput(format!("unknown wire format '{other}'"))),
        }
    }
}

/// An external program invoked as `template` with `{in}`, `{out}` and
/// `{scale}` substituted. The template is split on whitespace (no shell).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExternalUpscaler {
    template: String,
    wire: Option<WireFormat>,
    timeout: Duration,
    work_root: Option<PathBuf>,
}

impl ExternalUpscaler {
    pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(300);

    pub fn new(template: impl Into<String>) -> Result<Self> {
        let template = template.into();
        for ph in ["{in}", "{out}", "{scale}"] {
            if !template.contains(ph) {
                return Err(Error::InvalidInput(format!(
                    "upscaler command '{template}' lacks the {ph} placeholder"
                )));
            }
        }
        if template.split_whitespace().next().is_none() {
            return Err(Error::InvalidInput("empty upscaler command".into()));
        }
        Ok(ExternalUpscaler {
            template,
            wire: None,
            timeout: Self::DEFAULT_TIMEOUT,
            work_root: None,
        })
    }

    /// Fixes the wire format (default: PNG for gray/RGB, Y4M for YUV).
    pub fn with_wire(mut self, wire: WireFormat) -> Self {
        self.wire = Some(wire);
        self
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    /// Directory under which each call creates its private work directory
    /// (default: the system temp directory).
    pub fn with_work_root(mut self, root: impl Into<PathBuf>) -> Self {
        self.work_root = Some(root.into());
        self
    }

    pub fn template(&self) -> &str {
        &self.template
    }

    pub fn timeout(&self) -> Duration {
        self.timeout
    }
}

/// The stand-in for the super-resolution network.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Upscaler {
    Builtin(InterpKernel),
    External(ExternalUpscaler),
}

impl Default for Upscaler {
    fn default() -> Self {
        Upscaler::Builtin(InterpKernel::Bicubic)
    }
}

impl fmt::Display for Upscaler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Upscaler::Builtin(k) => write!(f, "{k}"),
            Upscaler::External(e) => write!(f, "external({})", e.template),
        }
    }
}

fn reflect(k: isize, n: usize) -> usize {
    let n = n as isize;
    let m = k.rem_euclid(2 * n);
    (if m >= n { 2 * n - 1 - m } else { m }) as usize
}

type AxisTaps = Vec<Vec<(usize, f64)>>;

fn normalize(mut t: Vec<(usize, f64)>) -> Vec<(usize, f64)> {
    let s: f64 = t.iter().map(|&(_, w)| w).sum();
    t.iter_mut().for_each(|(_, w)| *w /= s);
    t
}

/// Taps of an anti-aliased reduction with input step `step` per output
/// pixel: the kernel stretched by `step` (never narrowed below 1).
fn down_taps(n_in: usize, n_out: usize, step: f64, kernel: InterpKernel) -> AxisTaps {
    let fs = step.max(1.0);
    let r = kernel.radius() * fs;
    (0..n_out)
        .map(|i| {
            let c = (i as f64 + 0.5) * step;
            let lo = (c - 0.5 - r).ceil() as isize;
            let hi = (c - 0.5 + r).floor() as isize;
            let t = (lo..=hi)
                .filter_map(|k| {
                    let w = kernel.weight((k as f64 + 0.5 - c) / fs);
                    (w != 0.0).then(|| (reflect(k, n_in), w))
                })
                .collect();
            normalize(t)
        })
        .collect()
}

fn up_taps(n_in: usize, n_out: usize, f: usize, kernel: InterpKernel) -> AxisTaps {
    let mut buf = Vec::new();
    (0..n_out)
        .map(|i| {
            taps(kernel, (i as f64 + 0.5) / f as f64, &mut buf);
            normalize(buf.iter().map(|&(k, w)| (reflect(k, n_in), w)).collect())
        })
        .collect()
}

/// Separable normalized convolution. Output carries no mask.
fn resize(img: &PlanarImage, tx: &AxisTaps, ty: &AxisTaps, clamp: bool, exec: Exec) -> PlanarImage {
    let (w, h, ch) = (img.width(), img.height(), img.channels());
    let (ow, oh) = (tx.len(), ty.len());
    let mask = img.mask().map(|m| m.bits());
    let on = |k: usize| mask.map_or(1.0, |b| if b[k] { 1.0 } else { 0.0 });

    // Per input row: [channel-major numerators..., denominators].
    let horiz: Vec<Vec<f64>> = exec.map(h, |j| {
        let mut out = vec![0.0; (ch + 1) * ow];
        for (x, t) in tx.iter().enumerate() {
            for &(i, wx) in t {
                let k = j * w + i;
                let m = wx * on(k);
                if m == 0.0 {
                    continue;
                }
                for c in 0..ch {
                    out[c * ow + x] += m * img.plane(c)[k] as f64;
                }
                out[ch * ow + x] += m;
            }
        }
        out
    });

    let fill = inactive_fill();
    let rows: Vec<Vec<f32>> = exec.map(oh, |y| {
        let mut acc = vec![0.0; (ch + 1) * ow];
        for &(j, wy) in &ty[y] {
            for (a, &v) in acc.iter_mut().zip(&horiz[j]) {
                *a += wy * v;
            }
        }
        let mut out = vec![fill; ch * ow];
        for x in 0..ow {
            let den = acc[ch * ow + x];
            if den <= 1e-9 {
                continue;
            }
            for c in 0..ch {
                let mut v = acc[c * ow + x] / den;
                if clamp {
                    v = v.clamp(0.0, 1.0);
                }
                out[c * ow + x] = v as f32;
            }
        }
        out
    });

    let mut data = vec![0.0f32; ch * ow * oh];
    for (y, row) in rows.iter().enumerate() {
        for c in 0..ch {
            data[(c * oh + y) * ow..(c * oh + y + 1) * ow].copy_from_slice(&row[c * ow..(c + 1) * ow]);
        }
    }
    PlanarImage::from_parts(ow, oh, img.color(), data, None)
}

/// Anti-aliased ÷f reduction with `kernel` stretched by `f`. Dimensions
/// that are not multiples of `f` are reflect-padded up to the next
/// multiple, so the output is `ceil(W/f) × ceil(H/f)`.
pub fn downscale(img: &PlanarImage, f: ScaleFactor, kernel: InterpKernel) -> PlanarImage {
    downscale_with(img, f, kernel, Exec::default())
}

pub fn downscale_with(img: &PlanarImage, f: ScaleFactor, kernel: InterpKernel, exec: Exec) -> PlanarImage {
    let f = f.get();
    let (ow, oh) = (img.width().div_ceil(f), img.height().div_ceil(f));
    let tx = down_taps(img.width(), ow, f as f64, kernel);
    let ty = down_taps(img.height(), oh, f as f64, kernel);
    resize(img, &tx, &ty, kernel.has_negative_lobes(), exec)
}

/// Anti-aliased resize to an arbitrary `out_w × out_h`, the input spanning
/// the output exactly (no padding). Used where the size ratio is not an
/// integer.
pub fn resize_to(img: &PlanarImage, out_w: usize, out_h: usize, kernel: InterpKernel, exec: Exec) -> Result<PlanarImage> {
    if out_w == 0 || out_h == 0 {
        return Err(Error::InvalidInput(format!("cannot resize to {out_w}x{out_h}")));
    }
    let tx = down_taps(img.width(), out_w, img.width() as f64 / out_w as f64, kernel);
    let ty = down_taps(img.height(), out_h, img.height() as f64 / out_h as f64, kernel);
    Ok(resize(img, &tx, &ty, kernel.has_negative_lobes(), exec))
}

/// ×f enlargement; output is exactly `W·f × H·f`.
pub fn upscale(img: &PlanarImage, f: ScaleFactor, up: &Upscaler) -> Result<PlanarImage> {
    upscale_with(img, f, up, Exec::default())
}

pub fn upscale_with(img: &PlanarImage, f: ScaleFactor, up: &Upscaler, exec: Exec) -> Result<PlanarImage> {
    match up {
        Upscaler::Builtin(kernel) => {
            let n = f.get();
            let tx = up_taps(img.width(), img.width() * n, n, *kernel);
            let ty = up_taps(img.height(), img.height() * n, n, *kernel);
            Ok(resize(img, &tx, &ty, kernel.has_negative_lobes(), exec))
        }
        Upscaler::External(ext) => run_external(ext, img, f),
    }
}

fn run_external(ext: &ExternalUpscaler, img: &PlanarImage, f: ScaleFactor) -> Result<PlanarImage> {
    let dir = match &ext.work_root {
        Some(root) => tempfile::Builder::new().prefix("upscale-").tempdir_in(root),
        None => tempfile::Builder::new().prefix("upscale-").tempdir(),
    }
    .map_err(|e| Error::io(ext.work_root.clone().unwrap_or_else(std::env::temp_dir), e))?;
    let wire = ext.wire.unwrap_or_else(|| WireFormat::for_color(img.color()));
    let input = dir.path().join(format!("in.{}", wire.extension()));
    let output = dir.path().join(format!("out.{}", wire.extension()));
    write_image_as(img, wire.pixel_format(img.color())?, &input)?;

    let args: Vec<String> = ext
        .template
        .split_whitespace()
        .map(|t| {
            t.replace("{in}", &input.to_string_lossy())
                .replace("{out}", &output.to_string_lossy())
                .replace("{scale}", &f.get().to_string())
        })
        .collect();
    let stderr = run_command(&args, dir.path(), ext.timeout)?;
    for line in stderr.lines() {
        log::info!("[{}] {line}", args[0]);
    }

    if !output.exists() {
        return Err(Error::External(format!("'{}' exited 0 but wrote no output", args[0])));
    }
    let (out, _) = read_image(&output).map_err(|e| Error::External(format!("unreadable output: {e}")))?;
    let (ew, eh) = (img.width() * f.get(), img.height() * f.get());
    if out.width() != ew || out.height() != eh || out.color() != img.color() {
        return Err(Error::External(format!(
            "output is {}x{} {}, expected {ew}x{eh} {}",
            out.width(),
            out.height(),
            out.color(),
            img.color()
        )));
    }
    Ok(out)
}

/// Runs `args` to completion in `cwd`; returns the captured stderr.
fn run_command(args: &[String], cwd: &Path, timeout: Duration) -> Result<String> {
    let mut child = Command::new(&args[0])
        .args(&args[1..])
        .current_dir(cwd)
        .stdin(Stdio::null())
        .stdout(Stdio::null())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| Error::External(format!("cannot start '{}': {e}", args[0])))?;
    let mut pipe = child.stderr.take().expect("stderr is piped");
    let reader = std::thread::spawn(move || {
        let mut s = String::new();
        let _ = pipe.read_to_string(&mut s);
        s
    });

    let start = Instant::now();
    let status = loop {
        match child.try_wait() {
            Ok(Some(status)) => break status,
            Ok(None) if start.elapsed() >= timeout => {
                let _ = child.kill();
                let _ = child.wait();
                return Err(Error::External(format!(
                    "'{}' timed out after {:.1} s",
                    args[0],
                    timeout.as_secs_f64()
                )));
            }
            Ok(None) => std::thread::sleep(Duration::from_millis(10)),
            Err(e) => return Err(Error::External(format!("waiting for '{}': {e}", args[0]))),
        }
    };
    let stderr = reader.join().unwrap_or_default();
    if !status.success() {
        let tail: String = stderr.lines().rev().take(5).collect::<Vec<_>>().into_iter().rev().collect::<Vec<_>>().join(" | ");
        return Err(Error::External(format!("'{}' failed ({status}): {tail}", args[0])));
    }
    Ok(stderr)
}

#[cfg(test)]
mod tests;
