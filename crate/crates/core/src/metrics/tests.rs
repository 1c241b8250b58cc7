use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::projection::{default_grid, ActiveMask, ProjectionFormat, ProjectionGrid};
use crate::raster::{u8_to_unit, unit_to_u8};

fn gray(w: usize, h: usize, f: impl Fn(usize, usize) -> u8) -> PlanarImage {
    let bytes: Vec<u8> = (0..h).flat_map(|j| (0..w).map(move |i| (i, j))).map(|(i, j)| f(i, j)).collect();
    PlanarImage::from_u8_interleaved(w, h, ColorModel::Gray, &bytes).unwrap()
}

fn random_gray(rng: &mut ChaCha8Rng, w: usize, h: usize) -> PlanarImage {
    let bytes: Vec<u8> = (0..w * h).map(|_| rng.random()).collect();
    PlanarImage::from_u8_interleaved(w, h, ColorModel::Gray, &bytes).unwrap()
}

#[test]
fn psnr_examples() {
    let a = gray(16, 8, |i, j| (i * 7 + j * 3) as u8 + 10);
    assert!(psnr(&a, &a, 1.0).unwrap().is_inf());

    let b = gray(16, 8, |i, j| (i * 7 + j * 3) as u8 + 11);
    let v = psnr(&a, &b, 1.0).unwrap().value;
    assert!((v - 48.1308).abs() < 1e-3, "{v}");
    // Samples are stored as f32, which limits agreement with the closed form.
    assert!((v - 20.0 * 255f64.log10()).abs() < 1e-5);

    let black = gray(4, 4, |_, _| 0);
    let white = gray(4, 4, |_, _| 255);
    assert_eq!(psnr(&black, &white, 1.0).unwrap().value, 0.0);
}

#[test]
fn psnr_is_symmetric_and_shift_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10 {
        let mut pick = || -> Vec<u8> { (0..120).map(|_| rng.random_range(20..200)).collect() };
        let a = PlanarImage::from_u8_interleaved(12, 10, ColorModel::Gray, &pick()).unwrap();
        let b = PlanarImage::from_u8_interleaved(12, 10, ColorModel::Gray, &pick()).unwrap();
        let ab = psnr(&a, &b, 1.0).unwrap().value;
        assert_eq!(ab, psnr(&b, &a, 1.0).unwrap().value);
        let shift = |img: &PlanarImage| {
            let bytes: Vec<u8> = img.to_u8_interleaved().iter().map(|v| v + 30).collect();
            PlanarImage::from_u8_interleaved(12, 10, ColorModel::Gray, &bytes).unwrap()
        };
        assert!((psnr(&shift(&a), &shift(&b), 1.0).unwrap().value - ab).abs() < 1e-5);
    }
}

#[test]
fn psnr_errors() {
    let a = gray(4, 4, |_, _| 1);
    let b = gray(4, 2, |_, _| 1);
    assert!(matches!(psnr(&a, &b, 1.0), Err(Error::DimensionMismatch(_))));

    let m1 = ActiveMask::from_bits(2, 1, vec![true, false]).unwrap();
    let m2 = ActiveMask::from_bits(2, 1, vec![false, true]).unwrap();
    let x = gray(2, 1, |_, _| 5).with_mask(m1).unwrap();
    let y = gray(2, 1, |_, _| 5).with_mask(m2).unwrap();
    assert!(matches!(psnr(&x, &y, 1.0), Err(Error::EmptyDomain(_))));
}

#[test]
fn metrics_ignore_inactive_pixels() {
    let mask = ActiveMask::from_bits(2, 1, vec![true, false]).unwrap();
    let a = gray(2, 1, |_, _| 40).with_mask(mask.clone()).unwrap();
    // The inactive pixel differs wildly before masking; with_mask grays it.
    let b = gray(2, 1, |i, _| if i == 0 { 41 } else { 250 });
    let b = b.with_mask(mask).unwrap();
    let v = psnr(&a, &b, 1.0).unwrap().value;
    assert!((v - 48.1308).abs() < 1e-3);
}

#[test]
fn erp_weight_examples() {
    let w = erp_weights(&ProjectionGrid::new(ProjectionFormat::Erp, 4, 2).unwrap()).unwrap();
    for v in w.values() {
        assert!((v - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-7);
    }
    let g = ProjectionGrid::new(ProjectionFormat::Erp, 2000, 1000).unwrap();
    let w = erp_weights(&g).unwrap();
    assert_eq!(w.get(0, 499), (PI / 2000.0).cos());
    assert_eq!(w.get(1999, 500), (PI / 2000.0).cos());

    let w = erp_weights(&ProjectionGrid::new(ProjectionFormat::Erp, 128, 64).unwrap()).unwrap();
    let pole: f64 = (0..128).map(|i| w.get(i, 0)).sum();
    let eq: f64 = (0..128).map(|i| w.get(i, 31)).sum();
    let want = (31.5 * PI / 64.0).cos() / (0.5 * PI / 64.0).cos();
    assert!((pole / eq - want).abs() < 1e-12);

    let cmp = default_grid(ProjectionFormat::Cmp, 2048).unwrap();
    assert!(matches!(erp_weights(&cmp), Err(Error::UnsupportedFormat(_))));
}

#[test]
fn weight_map_validation() {
    assert!(WeightMap::new(2, 1, vec![0.0, 0.0]).is_err());
    assert!(WeightMap::new(2, 1, vec![1.0, -1.0]).is_err());
    assert!(WeightMap::new(2, 1, vec![1.0, f64::NAN]).is_err());
    assert!(WeightMap::new(2, 1, vec![1.0]).is_err());
    assert!(WeightMap::new(2, 1, vec![1.0, 0.0]).is_ok());
}

#[test]
fn ws_psnr_with_uniform_weights_is_psnr() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let uni = WeightMap::uniform(20, 10);
    for _ in 0..100 {
        let a = random_gray(&mut rng, 20, 10);
        let b = random_gray(&mut rng, 20, 10);
        let p = psnr(&a, &b, 1.0).unwrap().value;
        let q = ws_psnr(&a, &b, &uni, 1.0).unwrap().value;
        assert!((p - q).abs() < 1e-9);
    }
}

#[test]
fn ws_psnr_examples() {
    let a = gray(2, 2, |_, _| 100);
    let b = gray(2, 2, |i, j| if i == j { 101 } else { 100 });
    let w = WeightMap::new(2, 2, vec![0.5; 4]).unwrap();
    let ws = ws_psnr(&a, &b, &w, 1.0).unwrap().value;
    let p = psnr(&a, &b, 1.0).unwrap().value;
    assert!((ws - p).abs() < 1e-9);
    // MSE = (1/255)² / 2.
    assert!((p - (20.0 * 255f64.log10() + 10.0 * 2f64.log10())).abs() < 1e-5);
    assert!(ws_psnr(&a, &a, &w, 1.0).unwrap().is_inf());
    assert!(ws_psnr(&a, &b, &WeightMap::uniform(3, 2), 1.0).is_err());
}

#[test]
fn ssim_oracles() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let a = random_gray(&mut rng, 24, 20);
    assert_eq!(ssim(&a, &a).unwrap().value, 1.0);

    let zero = gray(16, 16, |_, _| 0);
    let full = gray(16, 16, |_, _| 255);
    let c1 = 0.01f64 * 0.01;
    let v = ssim(&zero, &full).unwrap().value;
    assert!((v - c1 / (1.0 + c1)).abs() < 1e-9, "{v}");

    for _ in 0..10 {
        let x = random_gray(&mut rng, 20, 16);
        let y = random_gray(&mut rng, 20, 16);
        let s = ssim(&x, &y).unwrap().value;
        assert!((s - ssim(&y, &x).unwrap().value).abs() < 1e-12);
        assert!((-1.0..=1.0).contains(&s));
    }
}

#[test]
fn ssim_errors_and_masks() {
    let small = gray(10, 20, |_, _| 0);
    assert!(matches!(ssim(&small, &small), Err(Error::InvalidInput(_))));
    let rgb = PlanarImage::zeros(16, 16, ColorModel::Rgb);
    assert!(ssim(&rgb, &rgb).is_err());

    // Left half inactive, and the two images differ only there.
    let bits: Vec<bool> = (0..32 * 16).map(|k| k % 32 >= 16).collect();
    let mask = ActiveMask::from_bits(32, 16, bits).unwrap();
    let a = gray(32, 16, |i, j| (i * 5 + j * 9) as u8);
    let b = gray(32, 16, |i, j| if i < 16 { 0 } else { (i * 5 + j * 9) as u8 });
    let a = a.with_mask(mask.clone()).unwrap();
    let b = b.with_mask(mask).unwrap();
    assert_eq!(ssim(&a, &b).unwrap().value, 1.0);
}

#[test]
fn ssim_exec_modes_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let a = random_gray(&mut rng, 40, 30);
    let b = random_gray(&mut rng, 40, 30);
    let s = ssim_with(&a, &b, Exec::Sequential).unwrap().value;
    let p = ssim_with(&a, &b, Exec::Parallel).unwrap().value;
    assert_eq!(s.to_bits(), p.to_bits());
}

#[test]
fn y_channel_examples() {
    let px = |r: u8, g: u8, b: u8| {
        let img = PlanarImage::from_u8_interleaved(1, 1, ColorModel::Rgb, &[r, g, b]).unwrap();
        unit_to_u8(y_channel(&img).unwrap().get(0, 0, 0))
    };
    assert_eq!(px(128, 128, 128), 128);
    assert_eq!(px(255, 0, 0), 54);
    assert_eq!(px(255, 255, 255), 255);

    let yuv = PlanarImage::from_u8_interleaved(2, 1, ColorModel::Yuv, &[10, 20, 30, 40, 50, 60]).unwrap();
    let y = y_channel(&yuv).unwrap();
    assert_eq!(y.plane(0), &[u8_to_unit(10), u8_to_unit(40)]);
}

#[test]
fn evaluate_selects_channels() {
    let a = PlanarImage::from_u8_interleaved(12, 12, ColorModel::Yuv, &[90; 432]).unwrap();
    let b = PlanarImage::from_u8_interleaved(12, 12, ColorModel::Yuv, &[91; 432]).unwrap();
    let all = evaluate(MetricKind::Psnr, &a, &b, None, ChannelSelect::All).unwrap();
    let labels: Vec<_> = all.iter().map(|r| r.channel).collect();
    assert_eq!(labels, vec![Channel::Y, Channel::U, Channel::V]);
    let y = evaluate(MetricKind::Ssim, &a, &b, None, ChannelSelect::Luma).unwrap();
    assert_eq!(y.len(), 1);
    assert!(evaluate(MetricKind::WsPsnr, &a, &b, None, ChannelSelect::Luma).is_err());
    assert_eq!(format_value(f64::INFINITY, 3), "inf");
    assert_eq!(format_value(33.5244, 3), "33.524");
}

#[test]
fn solid_angles_cover_the_sphere() {
    for budget in [2048, 32768] {
        for f in ProjectionFormat::ALL {
            let g = default_grid(f, budget).unwrap();
            let w = solid_angle_weights(&g);
            let rel = (w.sum() / (4.0 * PI) - 1.0).abs();
            assert!(rel < 1e-3, "{f} budget {budget}: {:.5}%", rel * 100.0);
            let faces = g.face_map();
            for j in 0..g.height() {
                for i in 0..g.width() {
                    if faces.get(i, j).is_none() {
                        assert_eq!(w.get(i, j), 0.0);
                    }
                }
            }
        }
    }
}

#[test]
fn erp_solid_angles_follow_cosine_rows() {
    for h in [64, 256] {
        let g = ProjectionGrid::new(ProjectionFormat::Erp, 2 * h, h).unwrap();
        let num = solid_angle_weights(&g);
        let ana = erp_weights(&g).unwrap();
        let row = |m: &WeightMap, j: usize| (0..2 * h).map(|i| m.get(i, j)).sum::<f64>();
        let ratios: Vec<f64> = (0..h).map(|j| row(&num, j) / row(&ana, j)).collect();
        let mid = ratios[h / 2];
        for (j, r) in ratios.iter().enumerate() {
            assert!((r / mid - 1.0).abs() < 5e-3, "H={h} row {j}: {}", r / mid);
        }
    }
}

#[test]
fn cube_corner_pixels_are_smallest() {
    let g = ProjectionGrid::new(ProjectionFormat::Cmp, 3 * 64, 2 * 64).unwrap();
    let w = solid_angle_weights(&g);
    let vals = w.values();
    let max = vals.iter().cloned().fold(0.0, f64::max);
    let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!((max / min / 27f64.sqrt() - 1.0).abs() < 0.05, "{}", max / min);
    // Front face (index 1) spans x in [64, 128), y in [0, 64).
    assert!(w.get(64, 0) / min - 1.0 < 1e-12);
}

#[test]
fn weights_exec_modes_agree() {
    let g = default_grid(ProjectionFormat::Isp, 4096).unwrap();
    let a = solid_angle_weights_with(&g, Exec::Sequential);
    let b = solid_angle_weights_with(&g, Exec::Parallel);
    assert_eq!(a, b);
}
