//! Image and raw frame I/O, synthetic test patterns and run-config parsing.
//!
//! Supported containers:
//! - PNG, 8-bit gray or RGB;
//! - Y4M, single frame, `C420*` (4:2:0), `C444` or `Cmono`;
//! - headerless planar YUV 4:2:0 (`.yuv`) described by a `<file>.spec`
//!   sidecar.
//!
//! YUV is full-range BT.709. 4:2:0 chroma is co-sited with the top-left luma
//! sample of each 2×2 block: writing keeps those samples, reading fills the
//! others bilinearly.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::raster::{u8_to_unit, ColorModel, PlanarImage};

mod config;
mod pattern;
mod y4m;

pub use config::{ConfigEntry, ConfigFile, ConfigSection};
pub use pattern::{gen_pattern, gen_pattern_with, Pattern, PatternKind};

/// Sample layout of a stored frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PixelFormat {
    Gray8,
    Rgb24,
    Yuv420p8,
    Yuv444p8,
}

impl PixelFormat {
    pub fn name(self) -> &'static str {
        match self {
            PixelFormat::Gray8 => "gray8",
            PixelFormat::Rgb24 => "rgb24",
            PixelFormat::Yuv420p8 => "yuv420p",
            PixelFormat::Yuv444p8 => "yuv444p",
        }
    }

    pub fn color(self) -> ColorModel {
        match self {
            PixelFormat::Gray8 => ColorModel::Gray,
            PixelFormat::Rgb24 => ColorModel::Rgb,
            PixelFormat::Yuv420p8 | PixelFormat::Yuv444p8 => ColorModel::Yuv,
        }
    }
}

impl fmt::Display for PixelFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PixelFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gray8" | "gray" => Ok(PixelFormat::Gray8),
            "rgb24" | "rgb" => Ok(PixelFormat::Rgb24),
            "yuv420p" | "yuv420-8" | "yuv420" => Ok(PixelFormat::Yuv420p8),
            "yuv444p" | "yuv444" => Ok(PixelFormat::Yuv444p8),
            other => Err(Error::InvalidInput(format!("unknown pixel format '{other}'"))),
        }
    }
}

/// Geometry and layout of one stored frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameSpec {
    pub width: usize,
    pub height: usize,
    pub pixel_format: PixelFormat,
}

impl FrameSpec {
    pub fn new(width: usize, height: usize, pixel_format: PixelFormat) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidInput("frame dimensions must be positive".into()));
        }
        if pixel_format == PixelFormat::Yuv420p8 && (width % 2 != 0 || height % 2 != 0) {
            return Err(Error::InvalidInput(format!(
                "yuv420 needs even dimensions, got {width}x{height}"
            )));
        }
        Ok(FrameSpec {
            width,
            height,
            pixel_format,
        })
    }

    pub fn color(&self) -> ColorModel {
        self.pixel_format.color()
    }

    /// Bytes in one stored frame.
    pub fn frame_bytes(&self) -> usize {
        let n = self.width * self.height;
        match self.pixel_format {
            PixelFormat::Gray8 => n,
            PixelFormat::Rgb24 | PixelFormat::Yuv444p8 => 3 * n,
            PixelFormat::Yuv420p8 => n + 2 * (self.width / 2) * (self.height / 2),
        }
    }
}

/// File container, chosen by extension.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Container {
    Png,
    Y4m,
    RawYuv,
}

impl Container {
    pub fn from_path(path: &Path) -> Result<Self> {
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| e.to_ascii_lowercase());
        match ext.as_deref() {
            Some("png") => Ok(Container::Png),
            Some("y4m") => Ok(Container::Y4m),
            Some("yuv") => Ok(Container::RawYuv),
            _ => Err(Error::UnsupportedFormat(format!(
                "{}: expected a .png, .y4m or .yuv file",
                path.display()
            ))),
        }
    }

    /// Pixel format used when writing an image of `color` into this container.
    pub fn default_pixel_format(self, color: ColorModel) -> Result<PixelFormat> {
        match (self, color) {
            (Container::Png, ColorModel::Gray) | (Container::Y4m, ColorModel::Gray) => Ok(PixelFormat::Gray8),
            (Container::Png, ColorModel::Rgb) => Ok(PixelFormat::Rgb24),
            (Container::Y4m, ColorModel::Yuv) | (Container::RawYuv, ColorModel::Yuv) => Ok(PixelFormat::Yuv420p8),
            (c, m) => Err(Error::UnsupportedFormat(format!("cannot store a {m} image as {c:?}"))),
        }
    }
}

/// Sidecar describing a raw `.yuv` file: `<file>.spec`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".spec");
    PathBuf::from(s)
}

pub fn read_image(path: impl AsRef<Path>) -> Result<(PlanarImage, FrameSpec)> {
    let path = path.as_ref();
    match Container::from_path(path)? {
        Container::Png => read_png(path),
        Container::Y4m => {
            let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
            y4m::decode(&bytes).map_err(|reason| Error::malformed(path, reason))
        }
        Container::RawYuv => read_raw(path),
    }
}

/// Writes `img` in the container's default pixel format for its color model.
pub fn write_image(img: &PlanarImage, path: impl AsRef<Path>) -> Result<FrameSpec> {
    let path = path.as_ref();
    let pf = Container::from_path(path)?.default_pixel_format(img.color())?;
    write_image_as(img, pf, path)
}

/// Writes `img` with an explicit pixel format. Inactive pixels are stored
/// as the gray fill.
pub fn write_image_as(img: &PlanarImage, pixel_format: PixelFormat, path: impl AsRef<Path>) -> Result<FrameSpec> {
    let path = path.as_ref();
    let container = Container::from_path(path)?;
    let spec = FrameSpec::new(img.width(), img.height(), pixel_format)?;
    if spec.color() != img.color() {
        return Err(Error::UnsupportedFormat(format!(
            "{} image cannot be written as {pixel_format}",
            img.color()
        )));
    }
    let supported = match container {
        Container::Png => matches!(pixel_format, PixelFormat::Gray8 | PixelFormat::Rgb24),
        Container::Y4m => pixel_format != PixelFormat::Rgb24,
        Container::RawYuv => pixel_format == PixelFormat::Yuv420p8,
    };
    if !supported {
        return Err(Error::UnsupportedFormat(format!(
            "{pixel_format} is not supported in {}",
            path.display()
        )));
    }
    match container {
        Container::Png => write_png(img, &spec, path)?,
        Container::Y4m => {
            let mut out = y4m::header(&spec).into_bytes();
            out.extend_from_slice(b"FRAME\n");
            out.extend(encode_planes(img, &spec));
            fs::write(path, out).map_err(|e| Error::io(path, e))?;
        }
        Container::RawYuv => {
            fs::write(path, encode_planes(img, &spec)).map_err(|e| Error::io(path, e))?;
            let side = sidecar_path(path);
            fs::write(&side, sidecar_text(&spec)).map_err(|e| Error::io(&side, e))?;
        }
    }
    Ok(spec)
}

fn read_png(path: &Path) -> Result<(PlanarImage, FrameSpec)> {
    let codec = |source| Error::Codec {
        path: path.to_path_buf(),
        source,
    };
    let reader = image::ImageReader::open(path).map_err(|e| Error::io(path, e))?;
    let reader = reader.with_guessed_format().map_err(|e| Error::io(path, e))?;
    let dynimg = reader.decode().map_err(codec)?;
    let (w, h) = (dynimg.width() as usize, dynimg.height() as usize);
    let (color, bytes) = match dynimg {
        image::DynamicImage::ImageLuma8(b) => (ColorModel::Gray, b.into_raw()),
        image::DynamicImage::ImageRgb8(b) => (ColorModel::Rgb, b.into_raw()),
        image::DynamicImage::ImageLumaA8(_) => {
            log::warn!("{}: dropping alpha channel", path.display());
            (ColorModel::Gray, dynimg.to_luma8().into_raw())
        }
        image::DynamicImage::ImageRgba8(_) => {
            log::warn!("{}: dropping alpha channel", path.display());
            (ColorModel::Rgb, dynimg.to_rgb8().into_raw())
        }
        other => {
            return Err(Error::UnsupportedFormat(format!(
                "{}: only 8-bit PNG is supported (got {:?})",
                path.display(),
                other.color()
            )))
        }
    };
    let pf = if color == ColorModel::Gray {
        PixelFormat::Gray8
    } else {
        PixelFormat::Rgb24
    };
    let img = PlanarImage::from_u8_interleaved(w, h, color, &bytes)?;
    Ok((img, FrameSpec::new(w, h, pf)?))
}

fn write_png(img: &PlanarImage, spec: &FrameSpec, path: &Path) -> Result<()> {
    let ct = match spec.pixel_format {
        PixelFormat::Gray8 => image::ExtendedColorType::L8,
        _ => image::ExtendedColorType::Rgb8,
    };
    image::save_buffer_with_format(
        path,
        &img.to_u8_interleaved(),
        spec.width as u32,
        spec.height as u32,
        ct,
        image::ImageFormat::Png,
    )
    .map_err(|source| Error::Codec {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes a gray or RGB image as PNG with `tEXt` chunks (keyword, text).
pub fn write_png_annotated(img: &PlanarImage, path: impl AsRef<Path>, notes: &[(&str, &str)]) -> Result<()> {
    let path = path.as_ref();
    let ct = match img.color() {
        ColorModel::Gray => png::ColorType::Grayscale,
        ColorModel::Rgb => png::ColorType::Rgb,
        ColorModel::Yuv => return Err(Error::UnsupportedFormat("yuv images cannot be written as PNG".into())),
    };
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let enc_err = |e: png::EncodingError| Error::malformed(path, e.to_string());
    let mut enc = png::Encoder::new(std::io::BufWriter::new(file), img.width() as u32, img.height() as u32);
    enc.set_color(ct);
    enc.set_depth(png::BitDepth::Eight);
    for (k, v) in notes {
        enc.add_text_chunk(k.to_string(), v.to_string()).map_err(enc_err)?;
    }
    let mut w = enc.write_header().map_err(enc_err)?;
    w.write_image_data(&img.to_u8_interleaved()).map_err(enc_err)?;
    w.finish().map_err(enc_err)
}

fn sidecar_text(spec: &FrameSpec) -> String {
    format!(
        "width={}\nheight={}\npixel_format={}\ncolor_matrix=bt709\nrange=full\nchroma_siting=top-left\n",
        spec.width, spec.height, spec.pixel_format
    )
}

fn read_raw(path: &Path) -> Result<(PlanarImage, FrameSpec)> {
    let side = sidecar_path(path);
    let text = fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
    let cfg = ConfigFile::parse(&text)?;
    let num = |key: &str| -> Result<usize> {
        let e = cfg
            .get(key)
            .ok_or_else(|| Error::malformed(&side, format!("missing '{key}'")))?;
        e.value
            .parse()
            .map_err(|_| Error::malformed(&side, format!("'{key}' is not a number")))
    };
    let pf = match cfg.get("pixel_format") {
        Some(e) => e.value.parse()?,
        None => PixelFormat::Yuv420p8,
    };
    if pf != PixelFormat::Yuv420p8 {
        return Err(Error::UnsupportedFormat(format!("raw files must be yuv420p, sidecar says {pf}")));
    }
    for (key, want) in [("color_matrix", "bt709"), ("range", "full")] {
        if let Some(e) = cfg.get(key) {
            if !e.value.eq_ignore_ascii_case(want) {
                return Err(Error::UnsupportedFormat(format!("{key}={} (only {want} is supported)", e.value)));
            }
        }
    }
    let spec = FrameSpec::new(num("width")?, num("height")?, pf)?;
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let n = spec.frame_bytes();
    if bytes.len() < n || bytes.len() % n != 0 {
        return Err(Error::malformed(
            path,
            format!(
                "{} bytes do not match the {}x{} {} sidecar ({n} per frame)",
                bytes.len(),
                spec.width,
                spec.height,
                spec.pixel_format
            ),
        ));
    }
    if bytes.len() > n {
        log::warn!("{}: reading the first of {} frames", path.display(), bytes.len() / n);
    }
    Ok((decode_planes(&bytes[..n], &spec)?, spec))
}

/// Planar bytes of `img` in `spec`'s layout (chroma decimated for 4:2:0).
pub(crate) fn encode_planes(img: &PlanarImage, spec: &FrameSpec) -> Vec<u8> {
    let (w, h) = (spec.width, spec.height);
    let c = img.channels();
    let inter = img.to_u8_interleaved();
    let mut out = Vec::with_capacity(spec.frame_bytes());
    match spec.pixel_format {
        PixelFormat::Rgb24 => out = inter,
        PixelFormat::Gray8 | PixelFormat::Yuv444p8 => {
            for ch in 0..c {
                out.extend(inter.iter().skip(ch).step_by(c));
            }
        }
        PixelFormat::Yuv420p8 => {
            out.extend(inter.iter().step_by(3));
            for ch in 1..3 {
                for cj in 0..h / 2 {
                    for ci in 0..w / 2 {
                        out.push(inter[(2 * cj * w + 2 * ci) * 3 + ch]);
                    }
                }
            }
        }
    }
    out
}

/// Inverse of [`encode_planes`]; 4:2:0 chroma is upsampled bilinearly from
/// the co-sited samples.
pub(crate) fn decode_planes(bytes: &[u8], spec: &FrameSpec) -> Result<PlanarImage> {
    let (w, h) = (spec.width, spec.height);
    let n = w * h;
    match spec.pixel_format {
        PixelFormat::Rgb24 => PlanarImage::from_u8_interleaved(w, h, ColorModel::Rgb, bytes),
        PixelFormat::Gray8 | PixelFormat::Yuv444p8 => {
            let data = bytes.iter().map(|&b| u8_to_unit(b)).collect();
            PlanarImage::from_data(w, h, spec.color(), data)
        }
        PixelFormat::Yuv420p8 => {
            let (cw, chh) = (w / 2, h / 2);
            let mut data: Vec<f32> = bytes[..n].iter().map(|&b| u8_to_unit(b)).collect();
            for ch in 0..2 {
                let plane = &bytes[n + ch * cw * chh..n + (ch + 1) * cw * chh];
                let at = |ci: usize, cj: usize| plane[cj.min(chh - 1) * cw + ci.min(cw - 1)] as f32;
                for y in 0..h {
                    let (cj, fy) = (y / 2, (y % 2) as f32 * 0.5);
                    for x in 0..w {
                        let (ci, fx) = (x / 2, (x % 2) as f32 * 0.5);
                        let top = at(ci, cj) * (1.0 - fx) + at(ci + 1, cj) * fx;
                        let bot = at(ci, cj + 1) * (1.0 - fx) + at(ci + 1, cj + 1) * fx;
                        data.push((top * (1.0 - fy) + bot * fy) / 255.0);
                    }
                }
            }
            PlanarImage::from_data(w, h, ColorModel::Yuv, data)
        }
    }
}
