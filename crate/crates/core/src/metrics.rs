//! Full-reference quality metrics: PSNR, spherically weighted PSNR and SSIM.
//!
//! Samples are normalized, so the peak for 8-bit content is 1.0. All metrics
//! are computed over the intersection of the two images' active masks.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::raster::{ColorModel, PlanarImage};

mod weights;

pub use weights::{erp_weights, solid_angle_weights, solid_angle_weights_with, weights_for, WeightMap};
pub(crate) use weights::{pixel_solid_angles, Coverage};

/// BT.709 luma coefficients (R, G, B).
pub const BT709_LUMA: [f64; 3] = [0.2126, 0.7152, 0.0722];

const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;
const SSIM_K1: f64 = 0.01;
const SSIM_K2: f64 = 0.03;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MetricKind {
    Psnr,
    WsPsnr,
    Ssim,
}

impl MetricKind {
    pub const ALL: [MetricKind; 3] = [MetricKind::WsPsnr, MetricKind::Psnr, MetricKind::Ssim];

    pub fn name(self) -> &'static str {
        match self {
            MetricKind::Psnr => "PSNR",
            MetricKind::WsPsnr => "WS-PSNR",
            MetricKind::Ssim => "SSIM",
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MetricKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "psnr" => Ok(MetricKind::Psnr),
            "ws-psnr" | "wspsnr" | "ws_psnr" => Ok(MetricKind::WsPsnr),
            "ssim" => Ok(MetricKind::Ssim),
            other => Err(Error::InvalidInput(format!("unknown metric '{other}'"))),
        }
    }
}

/// Which plane a metric value refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channel {
    Y,
    U,
    V,
    R,
    G,
    B,
    /// Mean over all planes of a multi-channel image.
    Mean,
}

impl Channel {
    pub fn name(self) -> &'static str {
        match self {
            Channel::Y => "Y",
            Channel::U => "U",
            Channel::V => "V",
            Channel::R => "R",
            Channel::G => "G",
            Channel::B => "B",
            Channel::Mean => "mean",
        }
    }

    /// Labels of the planes of an image in `color`.
    pub fn planes(color: ColorModel) -> &'static [Channel] {
        match color {
            ColorModel::Gray => &[Channel::Y],
            ColorModel::Rgb => &[Channel::R, Channel::G, Channel::B],
            ColorModel::Yuv => &[Channel::Y, Channel::U, Channel::V],
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Luma only, or every plane separately.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ChannelSelect {
    #[default]
    Luma,
    All,
}

impl FromStr for ChannelSelect {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "y" | "luma" => Ok(ChannelSelect::Luma),
            "all" => Ok(ChannelSelect::All),
            other => Err(Error::InvalidInput(format!("unknown channel selection '{other}'"))),
        }
    }
}

/// One metric value. Identical inputs give `f64::INFINITY` for the PSNR
/// family, written as `inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricResult {
    pub metric: MetricKind,
    pub channel: Channel,
    pub value: f64,
}

impl MetricResult {
    pub fn is_inf(&self) -> bool {
        self.value == f64::INFINITY
    }

    pub fn with_channel(mut self, channel: Channel) -> Self {
        self.channel = channel;
        self
    }
}

/// Fixed-point rendering with the `inf` sentinel.
pub fn format_value(v: f64, decimals: usize) -> String {
    if v == f64::INFINITY {
        "inf".to_string()
    } else {
        format!("{v:.decimals$}")
    }
}

impl fmt::Display for MetricResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let decimals = if self.metric == MetricKind::Ssim { 6 } else { 4 };
        write!(f, "{} {} {}", self.metric, self.channel, format_value(self.value, decimals))
    }
}

fn check_pair(a: &PlanarImage, b: &PlanarImage) -> Result<()> {
    if !a.same_shape(b) {
        return Err(Error::DimensionMismatch(format!(
            "{}x{}x{} vs {}x{}x{}",
            a.width(),
            a.height(),
            a.channels(),
            b.width(),
            b.height(),
            b.channels()
        )));
    }
    Ok(())
}

fn both_active(a: &PlanarImage, b: &PlanarImage, k: usize) -> bool {
    a.mask().map_or(true, |m| m.bits()[k]) && b.mask().map_or(true, |m| m.bits()[k])
}

fn default_channel(img: &PlanarImage) -> Channel {
    if img.channels() == 1 {
        Channel::Y
    } else {
        Channel::Mean
    }
}

fn db(peak: f64, mse: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        (10.0 * (peak * peak / mse).log10()).max(0.0)
    }
}

/// Weighted mean squared error over the active intersection; `w(k)` gives
/// the weight of pixel `k`.
fn weighted_mse(a: &PlanarImage, b: &PlanarImage, w: impl Fn(usize) -> f64) -> Result<f64> {
    let n = a.width() * a.height();
    let mut num = 0.0;
    let mut den = 0.0;
    for k in 0..n {
        if !both_active(a, b, k) {
            continue;
        }
        let wk = w(k);
        if wk == 0.0 {
            continue;
        }
        let mut se = 0.0;
        for c in 0..a.channels() {
            let d = a.plane(c)[k] as f64 - b.plane(c)[k] as f64;
            se += d * d;
        }
        num += wk * se;
        den += wk;
    }
    if den == 0.0 {
        return Err(Error::EmptyDomain("no active pixel with positive weight".into()));
    }
    Ok(num / (den * a.channels() as f64))
}

/// Peak signal-to-noise ratio in dB. Multi-channel images pool the squared
/// error of all planes (channel `mean`).
pub fn psnr(a: &PlanarImage, b: &PlanarImage, peak: f64) -> Result<MetricResult> {
    check_pair(a, b)?;
    let mse = weighted_mse(a, b, |_| 1.0)?;
    Ok(MetricResult {
        metric: MetricKind::Psnr,
        channel: default_channel(a),
        value: db(peak, mse),
    })
}

/// PSNR with per-pixel weights: `10·log10(peak² / (Σ w·e² / Σ w))`.
pub fn ws_psnr(a: &PlanarImage, b: &PlanarImage, w: &WeightMap, peak: f64) -> Result<MetricResult> {
    check_pair(a, b)?;
    if w.width() != a.width() || w.height() != a.height() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} weights for a {}x{} image",
            w.width(),
            w.height(),
            a.width(),
            a.height()
        )));
    }
    let values = w.values();
    let mse = weighted_mse(a, b, |k| values[k])?;
    Ok(MetricResult {
        metric: MetricKind::WsPsnr,
        channel: default_channel(a),
        value: db(peak, mse),
    })
}

fn gaussian_window() -> [f64; SSIM_WINDOW] {
    let mut g = [0.0; SSIM_WINDOW];
    let c = (SSIM_WINDOW / 2) as f64;
    for (k, v) in g.iter_mut().enumerate() {
        let d = k as f64 - c;
        *v = (-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
    }
    let s: f64 = g.iter().sum();
    g.iter_mut().for_each(|v| *v /= s);
    g
}

/// Mean structural similarity of two single-channel images (11×11 Gaussian
/// window, σ = 1.5, K1 = 0.01, K2 = 0.03, dynamic range 1). Only window
/// positions fully inside the raster and free of inactive pixels count.
pub fn ssim(a: &PlanarImage, b: &PlanarImage) -> Result<MetricResult> {
    ssim_with(a, b, Exec::default())
}

pub fn ssim_with(a: &PlanarImage, b: &PlanarImage, exec: Exec) -> Result<MetricResult> {
    check_pair(a, b)?;
    if a.channels() != 1 {
        return Err(Error::InvalidInput(format!(
            "ssim expects a single channel, got {}",
            a.channels()
        )));
    }
    let (w, h) = (a.width(), a.height());
    if w < SSIM_WINDOW || h < SSIM_WINDOW {
        return Err(Error::InvalidInput(format!(
            "{w}x{h} image is smaller than the {SSIM_WINDOW}x{SSIM_WINDOW} ssim window"
        )));
    }
    let g = gaussian_window();
    let c1 = SSIM_K1 * SSIM_K1;
    let c2 = SSIM_K2 * SSIM_K2;
    let (pa, pb) = (a.plane(0), b.plane(0));

    // Summed-area table of inactive pixels, to reject windows cheaply.
    let mut bad = vec![0u32; (w + 1) * (h + 1)];
    for j in 0..h {
        for i in 0..w {
            let k = j * w + i;
            let v = u32::from(!both_active(a, b, k));
            bad[(j + 1) * (w + 1) + i + 1] =
                v + bad[j * (w + 1) + i + 1] + bad[(j + 1) * (w + 1) + i] - bad[j * (w + 1) + i];
        }
    }

    // Horizontal pass: windowed sums of a, b, a², b², ab for every row.
    let ow = w - SSIM_WINDOW + 1;
    let oh = h - SSIM_WINDOW + 1;
    let rows: Vec<[Vec<f64>; 5]> = exec.map(h, |j| {
        let mut out: [Vec<f64>; 5] = std::array::from_fn(|_| vec![0.0; ow]);
        for x in 0..ow {
            let mut s = [0.0; 5];
            for (t, &gt) in g.iter().enumerate() {
                let k = j * w + x + t;
                let (va, vb) = (pa[k] as f64, pb[k] as f64);
                s[0] += gt * va;
                s[1] += gt * vb;
                s[2] += gt * va * va;
                s[3] += gt * vb * vb;
                s[4] += gt * va * vb;
            }
            for q in 0..5 {
                out[q][x] = s[q];
            }
        }
        out
    });

    let partial: Vec<(f64, usize)> = exec.map(oh, |y| {
        let mut sum = 0.0;
        let mut count = 0;
        for x in 0..ow {
            let (x1, y1) = (x + SSIM_WINDOW, y + SSIM_WINDOW);
            let n_bad = bad[y1 * (w + 1) + x1] + bad[y * (w + 1) + x] - bad[y * (w + 1) + x1] - bad[y1 * (w + 1) + x];
            if n_bad != 0 {
                continue;
            }
            let mut s = [0.0; 5];
            for (t, &gt) in g.iter().enumerate() {
                for q in 0..5 {
                    s[q] += gt * rows[y + t][q][x];
                }
            }
            let (ma, mb) = (s[0], s[1]);
            let va = s[2] - ma * ma;
            let vb = s[3] - mb * mb;
            let cov = s[4] - ma * mb;
            let num = (2.0 * ma * mb + c1) * (2.0 * cov + c2);
            let den = (ma * ma + mb * mb + c1) * (va + vb + c2);
            sum += num / den;
            count += 1;
        }
        (sum, count)
    });
    let (sum, count) = partial
        .into_iter()
        .fold((0.0, 0usize), |(s, n), (ps, pn)| (s + ps, n + pn));
    if count == 0 {
        return Err(Error::EmptyDomain("no ssim window free of inactive pixels".into()));
    }
    Ok(MetricResult {
        metric: MetricKind::Ssim,
        channel: Channel::Y,
        value: sum / count as f64,
    })
}

/// Luma plane: the first plane of YUV (bit-exact), BT.709 full-range luma
/// of RGB, or a gray image itself.
pub fn y_channel(img: &PlanarImage) -> Result<PlanarImage> {
    match img.color() {
        ColorModel::Gray | ColorModel::Yuv => Ok(img.channel(0)),
        ColorModel::Rgb => {
            let (r, g, b) = (img.plane(0), img.plane(1), img.plane(2));
            let data = (0..r.len())
                .map(|k| {
                    (BT709_LUMA[0] * r[k] as f64 + BT709_LUMA[1] * g[k] as f64 + BT709_LUMA[2] * b[k] as f64) as f32
                })
                .collect();
            Ok(PlanarImage::from_parts(
                img.width(),
                img.height(),
                ColorModel::Gray,
                data,
                img.mask().cloned(),
            ))
        }
    }
}

/// The planes a metric should be evaluated on, labelled.
pub fn select_channels(img: &PlanarImage, select: ChannelSelect) -> Result<Vec<(Channel, PlanarImage)>> {
    match select {
        ChannelSelect::Luma => Ok(vec![(Channel::Y, y_channel(img)?)]),
        ChannelSelect::All => Ok(Channel::planes(img.color())
            .iter()
            .enumerate()
            .map(|(c, &label)| (label, img.channel(c)))
            .collect()),
    }
}

/// Evaluates `metric` per selected channel. `weights` is required for
/// WS-PSNR and ignored otherwise.
pub fn evaluate(
    metric: MetricKind,
    a: &PlanarImage,
    b: &PlanarImage,
    weights: Option<&WeightMap>,
    select: ChannelSelect,
) -> Result<Vec<MetricResult>> {
    check_pair(a, b)?;
    if a.color() != b.color() {
        return Err(Error::InvalidInput(format!(
            "color models differ ({} vs {})",
            a.color(),
            b.color()
        )));
    }
    let ca = select_channels(a, select)?;
    let cb = select_channels(b, select)?;
    ca.iter()
        .zip(&cb)
        .map(|((label, x), (_, y))| {
            let r = match metric {
                MetricKind::Psnr => psnr(x, y, 1.0)?,
                MetricKind::WsPsnr => {
                    let w = weights.ok_or_else(|| Error::InvalidInput("ws-psnr needs a weight map".into()))?;
                    ws_psnr(x, y, w, 1.0)?
                }
                MetricKind::Ssim => ssim(x, y)?,
            };
            Ok(r.with_channel(*label))
        })
        .collect()
}

#[cfg(test)]
mod tests;
