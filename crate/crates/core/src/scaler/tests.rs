use std::f64::consts::PI;

use super::*;
use crate::metrics::psnr;
use crate::projection::{active_mask, default_grid, ProjectionFormat};
use crate::raster::{u8_to_unit, unit_to_u8};

fn from_fn(w: usize, h: usize, f: impl Fn(f64, f64) -> f64) -> PlanarImage {
    let mut data = Vec::with_capacity(w * h);
    for j in 0..h {
        for i in 0..w {
            data.push(f(i as f64 + 0.5, j as f64 + 0.5) as f32);
        }
    }
    PlanarImage::from_data(w, h, ColorModel::Gray, data).unwrap()
}

fn sf(f: usize) -> ScaleFactor {
    ScaleFactor::new(f).unwrap()
}

#[test]
fn scale_factor_parsing() {
    assert_eq!("x3".parse::<ScaleFactor>().unwrap(), ScaleFactor::X3);
    assert_eq!("X2".parse::<ScaleFactor>().unwrap().to_string(), "X2");
    assert_eq!("4".parse::<ScaleFactor>().unwrap().get(), 4);
    assert!("5".parse::<ScaleFactor>().is_err());
    assert!(ScaleFactor::new(0).is_err());
    assert!(ScaleFactor::new(1).unwrap().is_test_mode());
}

#[test]
fn reflect_is_half_sample_symmetric() {
    let got: Vec<usize> = (-3..7).map(|k| reflect(k, 4)).collect();
    assert_eq!(got, vec![2, 1, 0, 0, 1, 2, 3, 3, 2, 1]);
}

#[test]
fn constants_survive_scaling_exactly() {
    let img = PlanarImage::filled(24, 12, ColorModel::Rgb, u8_to_unit(77));
    for k in InterpKernel::ALL {
        for f in [1, 2, 3, 4] {
            let d = downscale(&img, sf(f), k);
            assert_eq!((d.width(), d.height()), (24 / f, 12 / f));
            assert!(d.data().iter().all(|&v| v == u8_to_unit(77)), "{k} /{f}");
            let u = upscale(&img, sf(f), &Upscaler::Builtin(k)).unwrap();
            assert_eq!((u.width(), u.height()), (24 * f, 12 * f));
            assert!(u.data().iter().all(|&v| v == u8_to_unit(77)), "{k} x{f}");
        }
    }
}

#[test]
fn odd_sizes_are_padded() {
    let img = PlanarImage::filled(10, 7, ColorModel::Gray, 0.25);
    let d = downscale(&img, ScaleFactor::X3, InterpKernel::Bicubic);
    assert_eq!((d.width(), d.height()), (4, 3));
    assert!(d.data().iter().all(|&v| v == 0.25));
}

#[test]
fn scale_one_is_identity() {
    let img = from_fn(16, 8, |x, y| (x * 0.7).sin() * (y * 0.3).cos() * 0.4 + 0.5);
    for k in InterpKernel::ALL {
        assert_eq!(downscale(&img, sf(1), k), img, "{k}");
        assert_eq!(upscale(&img, sf(1), &Upscaler::Builtin(k)).unwrap(), img, "{k}");
    }
}

#[test]
fn nearest_upscale_replicates() {
    let img = from_fn(5, 3, |x, y| (x * 10.0 + y) / 100.0);
    let u = upscale(&img, ScaleFactor::X2, &Upscaler::Builtin(InterpKernel::Nearest)).unwrap();
    for j in 0..6 {
        for i in 0..10 {
            assert_eq!(u.get(0, i, j), img.get(0, i / 2, j / 2));
        }
    }
}

#[test]
fn step_edge_stays_in_place() {
    // Edge at input position 32 (pixel edge) maps to output position 16.
    let img = from_fn(64, 4, |x, _| if x < 32.0 { 0.1 } else { 0.9 });
    let d = downscale(&img, ScaleFactor::X2, InterpKernel::Bicubic);
    let row: Vec<f64> = (0..32).map(|i| d.get(0, i, 1) as f64).collect();
    let half = 0.5;
    let k = row.windows(2).position(|p| p[0] < half && p[1] >= half).unwrap();
    let t = (half - row[k]) / (row[k + 1] - row[k]);
    let crossing = k as f64 + 0.5 + t;
    assert!((crossing - 16.0).abs() < 0.5, "{crossing}");
}

#[test]
fn bicubic_upscale_tracks_a_sinusoid() {
    // Cosines with whole periods across the width are even about both
    // borders, which the symmetric border extension reproduces.
    let wave = |x: f64, y: f64, n: f64| 0.5 + 0.35 * (2.0 * PI * 3.0 * x / (64.0 * n)).cos() * (2.0 * PI * y / (32.0 * n)).cos();
    let lo = from_fn(64, 32, |x, y| wave(x, y, 1.0));
    let up = upscale(&lo, ScaleFactor::X2, &Upscaler::Builtin(InterpKernel::Bicubic)).unwrap();
    let mut worst: f64 = 0.0;
    for j in 0..64 {
        for i in 0..128 {
            let want = wave(i as f64 + 0.5, j as f64 + 0.5, 2.0);
            worst = worst.max((up.get(0, i, j) as f64 - want).abs());
        }
    }
    assert!(worst * 255.0 < 2.0, "max error {:.3} steps", worst * 255.0);
}

#[test]
fn down_up_roundtrip_floors() {
    // Floors pinned from the first run on this fixture, less a small margin.
    let img = from_fn(192, 96, |x, y| {
        0.5 + 0.2 * (x / 9.0).sin() * (y / 7.0).cos() + 0.15 * ((x + 2.0 * y) / 13.0).cos()
    });
    let floors = [(2, 58.0), (3, 51.5), (4, 47.0)];
    for (f, floor) in floors {
        let lr = downscale(&img, sf(f), InterpKernel::Bicubic);
        let sr = upscale(&lr, sf(f), &Upscaler::Builtin(InterpKernel::Bicubic)).unwrap();
        let v = psnr(&img, &sr, 1.0).unwrap().value;
        assert!(v >= floor, "x{f}: {v:.2} dB < {floor}");
    }
}

#[test]
fn masked_pixels_do_not_bleed() {
    let grid = default_grid(ProjectionFormat::Ohp, 4096).unwrap();
    let img = PlanarImage::filled(grid.width(), grid.height(), ColorModel::Gray, 0.9)
        .with_mask(active_mask(&grid))
        .unwrap();
    let up = upscale(&img, ScaleFactor::X2, &Upscaler::Builtin(InterpKernel::Lanczos3)).unwrap();
    let big = active_mask(&grid.scaled(2).unwrap());
    for (k, &on) in big.bits().iter().enumerate() {
        if on {
            assert_eq!(unit_to_u8(up.plane(0)[k]), unit_to_u8(0.9));
        }
    }
}

#[test]
fn exec_modes_agree() {
    let img = from_fn(40, 20, |x, y| ((x * y) * 0.01).sin() * 0.5 + 0.5);
    let a = downscale_with(&img, ScaleFactor::X2, InterpKernel::Lanczos3, Exec::Sequential);
    let b = downscale_with(&img, ScaleFactor::X2, InterpKernel::Lanczos3, Exec::Parallel);
    assert_eq!(a, b);
}

#[test]
fn external_template_needs_placeholders() {
    assert!(ExternalUpscaler::new("cp {in} {out}").is_err());
    assert!(ExternalUpscaler::new("sr {in} {scale}").is_err());
    assert!(ExternalUpscaler::new("sr --in {in} --out {out} -s {scale}").is_ok());
}

#[cfg(unix)]
mod external {
    use super::*;

    /// Upscaler running `body` as a shell script with $1 = in, $2 = out,
    /// $3 = scale. The returned guard keeps the script alive.
    fn script(body: &str) -> (tempfile::TempDir, ExternalUpscaler) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sr.sh");
        std::fs::write(&path, body).unwrap();
        let ext = ExternalUpscaler::new(format!("sh {} {{in}} {{out}} {{scale}}", path.display())).unwrap();
        (dir, ext)
    }

    #[test]
    fn identity_copy_is_lossless() {
        let (_g, copy) = script("cp \"$1\" \"$2\"\n");
        let bytes: Vec<u8> = (0..30 * 20 * 3).map(|k| (k * 13 % 256) as u8).collect();
        let rgb = PlanarImage::from_u8_interleaved(30, 20, ColorModel::Rgb, &bytes).unwrap();
        let out = upscale(&rgb, sf(1), &Upscaler::External(copy.clone())).unwrap();
        assert_eq!(out, rgb);

        let yuv = rgb.clone().with_color(ColorModel::Yuv).unwrap();
        let out = upscale(&yuv, sf(1), &Upscaler::External(copy)).unwrap();
        assert_eq!(out, yuv);
    }

    #[test]
    fn failures_are_reported() {
        let img = PlanarImage::filled(8, 8, ColorModel::Gray, 0.5);
        let (_g1, copy) = script("cp \"$1\" \"$2\"\n");
        let err = upscale(&img, sf(2), &Upscaler::External(copy)).unwrap_err();
        assert!(err.to_string().contains("expected 16x16"), "{err}");

        let (_g2, boom) = script("echo boom >&2\nexit 3\n");
        let err = upscale(&img, sf(2), &Upscaler::External(boom)).unwrap_err();
        assert!(matches!(err, Error::External(_)));
        assert!(err.to_string().contains("boom"), "{err}");

        let (_g3, idle) = script("exit 0\n");
        let err = upscale(&img, sf(2), &Upscaler::External(idle)).unwrap_err();
        assert!(err.to_string().contains("no output"), "{err}");

        let (_g4, slow) = script("exec sleep 5\n");
        let slow = slow.with_timeout(Duration::from_millis(200));
        let start = Instant::now();
        let err = upscale(&img, sf(2), &Upscaler::External(slow)).unwrap_err();
        assert!(err.to_string().contains("timed out"), "{err}");
        assert!(start.elapsed() < Duration::from_secs(3));

        let missing = ExternalUpscaler::new("/nonexistent/sr {in} {out} {scale}").unwrap();
        assert!(upscale(&img, sf(2), &Upscaler::External(missing)).is_err());
    }
}

#[test]
fn resize_to_matches_integer_downscale() {
    let img = from_fn(48, 24, |x, y| 0.5 + 0.3 * (x / 5.0).sin() * (y / 3.0).cos());
    let a = downscale(&img, ScaleFactor::X3, InterpKernel::Bicubic);
    let b = resize_to(&img, 16, 8, InterpKernel::Bicubic, Exec::default()).unwrap();
    assert_eq!(a, b);
    let c = resize_to(&img, 17, 9, InterpKernel::Bicubic, Exec::default()).unwrap();
    assert_eq!((c.width(), c.height()), (17, 9));
    assert!(resize_to(&img, 0, 9, InterpKernel::Bicubic, Exec::default()).is_err());
}
