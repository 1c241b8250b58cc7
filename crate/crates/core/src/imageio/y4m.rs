//! Single-frame YUV4MPEG2.

use super::{decode_planes, FrameSpec, PixelFormat};
use crate::raster::PlanarImage;

const MAGIC: &str = "YUV4MPEG2";

pub(super) fn header(spec: &FrameSpec) -> String {
    let c = match spec.pixel_format {
        PixelFormat::Gray8 => "mono",
        PixelFormat::Yuv444p8 => "444",
        _ => "420",
    };
    format!(
        "{MAGIC} W{} H{} F25:1 Ip A1:1 C{c} XCOLORRANGE=FULL\n",
        spec.width, spec.height
    )
}

fn line(bytes: &[u8], from: usize) -> Result<(&str, usize), String> {
    let end = bytes[from..]
        .iter()
        .position(|&b| b == b'\n')
        .ok_or("unterminated header line")?;
    let s = std::str::from_utf8(&bytes[from..from + end]).map_err(|_| "header is not ASCII")?;
    Ok((s, from + end + 1))
}

/// Decodes the first frame.
pub(super) fn decode(bytes: &[u8]) -> Result<(PlanarImage, FrameSpec), String> {
    let (head, mut pos) = line(bytes, 0)?;
    let mut tokens = head.split(' ').filter(|t| !t.is_empty());
    if tokens.next() != Some(MAGIC) {
        return Err("missing YUV4MPEG2 signature".into());
    }
    let (mut w, mut h) = (None, None);
    let mut pf = PixelFormat::Yuv420p8;
    for t in tokens {
        let (tag, val) = t.split_at(1);
        match tag {
            "W" => w = val.parse::<usize>().ok(),
            "H" => h = val.parse::<usize>().ok(),
            "C" => {
                pf = match val {
                    v if v.starts_with("420") => PixelFormat::Yuv420p8,
                    "444" => PixelFormat::Yuv444p8,
                    "mono" => PixelFormat::Gray8,
                    other => return Err(format!("unsupported colorspace C{other}")),
                }
            }
            "X" if val.starts_with("COLORRANGE=") && val != "COLORRANGE=FULL" => {
                return Err(format!("only full-range YUV is supported ({val})"));
            }
            _ => {}
        }
    }
    let (w, h) = match (w, h) {
        (Some(w), Some(h)) => (w, h),
        _ => return Err("header lacks a valid W or H tag".into()),
    };
    let spec = FrameSpec::new(w, h, pf).map_err(|e| e.to_string())?;
    let (frame, next) = line(bytes, pos).map_err(|_| "missing FRAME marker".to_string())?;
    if !frame.starts_with("FRAME") {
        return Err("missing FRAME marker".into());
    }
    pos = next;
    let n = spec.frame_bytes();
    if bytes.len() < pos + n {
        return Err(format!("truncated frame: {} of {n} bytes", bytes.len() - pos));
    }
    let img = decode_planes(&bytes[pos..pos + n], &spec).map_err(|e| e.to_string())?;
    Ok((img, spec))
}
