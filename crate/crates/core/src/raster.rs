//! Planar multi-channel rasters with normalized samples.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::projection::{ActiveMask, INACTIVE_FILL_U8};

/// Color model of a 3-channel image (1-channel images are `Gray`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ColorModel {
    Gray,
    Rgb,
    /// Full-range BT.709 YUV, chroma stored at full resolution.
    Yuv,
}

impl ColorModel {
    pub fn channels(self) -> usize {
        match self {
            ColorModel::Gray => 1,
            ColorModel::Rgb | ColorModel::Yuv => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ColorModel::Gray => "gray",
            ColorModel::Rgb => "rgb",
            ColorModel::Yuv => "yuv",
        }
    }
}

impl fmt::Display for ColorModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ColorModel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gray" | "grey" => Ok(ColorModel::Gray),
            "rgb" => Ok(ColorModel::Rgb),
            "yuv" => Ok(ColorModel::Yuv),
            other => Err(Error::InvalidInput(format!("unknown color model '{other}'"))),
        }
    }
}

/// Converts an 8-bit code value to a normalized sample.
pub fn u8_to_unit(v: u8) -> f32 {
    v as f32 / 255.0
}

/// Quantizes a normalized sample to 8 bits, rounding half away from zero.
pub fn unit_to_u8(v: f32) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Normalized value of the inactive fill.
pub fn inactive_fill() -> f32 {
    u8_to_unit(INACTIVE_FILL_U8)
}

/// Raster stored plane by plane; samples are normalized to `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarImage {
    width: usize,
    height: usize,
    color: ColorModel,
    data: Vec<f32>,
    mask: Option<ActiveMask>,
}

impl PlanarImage {
    pub fn filled(width: usize, height: usize, color: ColorModel, value: f32) -> Self {
        PlanarImage {
            width,
            height,
            color,
            data: vec![value; width * height * color.channels()],
            mask: None,
        }
    }

    pub fn zeros(width: usize, height: usize, color: ColorModel) -> Self {
        Self::filled(width, height, color, 0.0)
    }

    /// Builds an image from plane-major samples.
    pub fn from_data(width: usize, height: usize, color: ColorModel, data: Vec<f32>) -> Result<Self> {
        if data.len() != width * height * color.channels() {
            return Err(Error::DimensionMismatch(format!(
                "{} samples for a {width}x{height} {color} image",
                data.len()
            )));
        }
        Ok(PlanarImage {
            width,
            height,
            color,
            data,
            mask: None,
        })
    }

    /// Builds an image from pixel-interleaved 8-bit samples.
    pub fn from_u8_interleaved(width: usize, height: usize, color: ColorModel, bytes: &[u8]) -> Result<Self> {
        let c = color.channels();
        if bytes.len() != width * height * c {
            return Err(Error::DimensionMismatch(format!(
                "{} bytes for a {width}x{height} {color} image",
                bytes.len()
            )));
        }
        let n = width * height;
        let mut data = vec![0.0; n * c];
        for (k, px) in bytes.chunks_exact(c).enumerate() {
            for (ch, &b) in px.iter().enumerate() {
                data[ch * n + k] = u8_to_unit(b);
            }
        }
        Self::from_data(width, height, color, data)
    }

    /// Pixel-interleaved 8-bit samples; inactive pixels are written as the
    /// gray fill.
    pub fn to_u8_interleaved(&self) -> Vec<u8> {
        let c = self.channels();
        let n = self.width * self.height;
        let mut out = vec![0u8; n * c];
        for k in 0..n {
            let active = self.mask.as_ref().map_or(true, |m| m.bits()[k]);
            for ch in 0..c {
                out[k * c + ch] = if active {
                    unit_to_u8(self.data[ch * n + k])
                } else {
                    INACTIVE_FILL_U8
                };
            }
        }
        out
    }

    pub fn width(&self) -> usize {
        self.width
    }
    pub fn height(&self) -> usize {
        self.height
    }
    pub fn channels(&self) -> usize {
        self.color.channels()
    }
    pub fn color(&self) -> ColorModel {
        self.color
    }
    pub fn mask(&self) -> Option<&ActiveMask> {
        self.mask.as_ref()
    }
    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn plane(&self, c: usize) -> &[f32] {
        let n = self.width * self.height;
        &self.data[c * n..(c + 1) * n]
    }

    pub fn plane_mut(&mut self, c: usize) -> &mut [f32] {
        let n = self.width * self.height;
        &mut self.data[c * n..(c + 1) * n]
    }

    pub fn get(&self, c: usize, i: usize, j: usize) -> f32 {
        self.data[(c * self.height + j) * self.width + i]
    }

    pub fn set(&mut self, c: usize, i: usize, j: usize, v: f32) {
        self.data[(c * self.height + j) * self.width + i] = v;
    }

    pub fn is_active(&self, i: usize, j: usize) -> bool {
        self.mask.as_ref().map_or(true, |m| m.get(i, j))
    }

    /// Relabels the color model without touching samples.
    pub fn with_color(mut self, color: ColorModel) -> Result<Self> {
        if color.channels() != self.channels() {
            return Err(Error::DimensionMismatch(format!(
                "cannot relabel {} channels as {color}",
                self.channels()
            )));
        }
        self.color = color;
        Ok(self)
    }

    /// Attaches `mask` and writes the gray fill into inactive pixels.
    pub fn with_mask(mut self, mask: ActiveMask) -> Result<Self> {
        if mask.width() != self.width || mask.height() != self.height {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} mask on {}x{} image",
                mask.width(),
                mask.height(),
                self.width,
                self.height
            )));
        }
        let fill = inactive_fill();
        let n = self.width * self.height;
        for c in 0..self.channels() {
            for (k, &on) in mask.bits().iter().enumerate() {
                if !on {
                    self.data[c * n + k] = fill;
                }
            }
        }
        self.mask = if mask.is_full() { None } else { Some(mask) };
        Ok(self)
    }

    pub fn without_mask(mut self) -> Self {
        self.mask = None;
        self
    }

    /// Single-channel copy of plane `c` (keeps the mask).
    pub fn channel(&self, c: usize) -> PlanarImage {
        PlanarImage {
            width: self.width,
            height: self.height,
            color: ColorModel::Gray,
            data: self.plane(c).to_vec(),
            mask: self.mask.clone(),
        }
    }

    /// Rounds every sample to the nearest 8-bit code value.
    pub fn quantized(&self) -> PlanarImage {
        let mut out = self.clone();
        for v in &mut out.data {
            *v = u8_to_unit(unit_to_u8(*v));
        }
        out
    }

    pub fn same_shape(&self, other: &PlanarImage) -> bool {
        self.width == other.width && self.height == other.height && self.channels() == other.channels()
    }

    pub(crate) fn from_parts(
        width: usize,
        height: usize,
        color: ColorModel,
        data: Vec<f32>,
        mask: Option<ActiveMask>,
    ) -> Self {
        debug_assert_eq!(data.len(), width * height * color.channels());
        PlanarImage {
            width,
            height,
            color,
            data,
            mask,
        }
    }
}
