use super::*;
use crate::geometry::{angular_error, dir_to_latlon};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{FRAC_PI_2, PI};

fn random_dir(rng: &mut ChaCha8Rng) -> SphereDir {
    loop {
        let v = Vec3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return SphereDir::from_vec(v).unwrap();
        }
    }
}

fn grids(budget: usize) -> Vec<ProjectionGrid> {
    ProjectionFormat::ALL
        .iter()
        .map(|&f| default_grid(f, budget).unwrap())
        .collect()
}

#[test]
fn erp_unproject_examples() {
    let g = ProjectionGrid::new(ProjectionFormat::Erp, 4, 2).unwrap();
    let d = unproject(&g, ImagePoint::new(2.0, 1.0)).unwrap().unwrap();
    assert!(angular_error(&d, &SphereDir::new(1.0, 0.0, 0.0).unwrap()) < 1e-15);
    let d = unproject(&g, ImagePoint::new(0.5, 0.5)).unwrap().unwrap();
    let ll = dir_to_latlon(d).unwrap();
    assert!((ll.lat() - 0.25 * PI).abs() < 1e-14);
    assert!((ll.lon() + 0.75 * PI).abs() < 1e-14);
}

#[test]
fn erp_project_example() {
    let g = ProjectionGrid::new(ProjectionFormat::Erp, 4, 2).unwrap();
    let p = project(&g, &SphereDir::new(1.0, 0.0, 0.0).unwrap());
    assert_eq!((p.x, p.y), (2.0, 1.0));
}

#[test]
fn unproject_rejects_out_of_bounds() {
    let g = ProjectionGrid::new(ProjectionFormat::Erp, 4, 2).unwrap();
    assert!(unproject(&g, ImagePoint::new(4.5, 1.0)).is_err());
    assert!(unproject(&g, ImagePoint::new(1.0, -0.1)).is_err());
    assert!(unproject(&g, ImagePoint::new(f64::NAN, 1.0)).is_err());
    assert!(unproject(&g, ImagePoint::new(4.0, 2.0)).is_ok());
}

#[test]
fn cmp_front_center() {
    let g = ProjectionGrid::new(ProjectionFormat::Cmp, 192, 128).unwrap();
    let p = project(&g, &SphereDir::new(1.0, 0.0, 0.0).unwrap());
    assert!((p.x - 96.0).abs() < 1e-12 && (p.y - 32.0).abs() < 1e-12);
    // Face centers of the rest of the layout.
    let centers = [
        ((0.0, -1.0, 0.0), (32.0, 32.0)),
        ((0.0, 1.0, 0.0), (160.0, 32.0)),
        ((0.0, 0.0, -1.0), (32.0, 96.0)),
        ((-1.0, 0.0, 0.0), (96.0, 96.0)),
        ((0.0, 0.0, 1.0), (160.0, 96.0)),
    ];
    for ((x, y, z), (px, py)) in centers {
        let p = project(&g, &SphereDir::new(x, y, z).unwrap());
        assert!((p.x - px).abs() < 1e-12 && (p.y - py).abs() < 1e-12, "{x},{y},{z}");
    }
}

#[test]
fn ssp_corner_is_inactive() {
    let g = default_grid(ProjectionFormat::Ssp, 8192).unwrap();
    assert!(unproject(&g, ImagePoint::new(0.5, 0.5)).unwrap().is_none());
    let h = g.height() as f64;
    assert!(unproject(&g, ImagePoint::new(0.5, h - 0.5)).unwrap().is_none());
    assert!(unproject(&g, ImagePoint::new(h / 4.0, h / 4.0)).unwrap().is_some());
}

#[test]
fn eac_remap_examples() {
    assert_eq!(eac_remap(0.0).unwrap(), 0.0);
    assert_eq!(eac_remap(1.0).unwrap(), 1.0);
    assert_eq!(eac_remap(-1.0).unwrap(), -1.0);
    assert!((eac_remap((PI / 8.0).tan()).unwrap() - 0.5).abs() < 1e-12);
    assert!((eac_unmap(0.5).unwrap() - 0.414_213_562_373_095).abs() < 1e-12);
    assert!(eac_remap(1.000_001).is_err());
    assert!(eac_unmap(-2.0).is_err());
    for k in 0..=1000 {
        let u = -1.0 + 2.0 * k as f64 / 1000.0;
        let r = eac_remap(u).unwrap();
        assert!((eac_unmap(r).unwrap() - u).abs() < 1e-12);
        assert!((eac_remap(-u).unwrap() + r).abs() < 1e-15);
    }
}

#[test]
fn default_grid_examples() {
    let g = default_grid(ProjectionFormat::Erp, 2048).unwrap();
    assert_eq!((g.width(), g.height()), (64, 32));
    let g = default_grid(ProjectionFormat::Cmp, 6 * 64 * 64).unwrap();
    assert_eq!((g.width(), g.height(), g.face_size()), (192, 128, Some(64)));
    assert!(default_grid(ProjectionFormat::Erp, 100).is_err());
    for g in grids(128) {
        assert!(active_mask(&g).active_count() > 0);
    }
}

#[test]
fn default_grid_valid_for_every_small_budget() {
    for budget in 128..4096 {
        for f in ProjectionFormat::ALL {
            if let Err(e) = default_grid(f, budget) {
                panic!("{f} budget {budget}: {e}");
            }
        }
    }
}

#[test]
fn default_grid_hits_budget() {
    // Even dimensions quantize cube faces in steps of 2 px, so the 10% bound is
    // only reachable from about 2k pixels up.
    for budget in [2048, 4096, 32_768, 131_072, 524_288] {
        for g in grids(budget) {
            let active = active_mask(&g).active_count() as f64;
            let rel = (active - budget as f64).abs() / budget as f64;
            assert!(rel <= 0.10, "{} budget {budget}: {active} active", g.format());
            assert_eq!(g.width() % 2, 0);
            assert_eq!(g.height() % 2, 0);
        }
    }
}

#[test]
fn masks() {
    let erp = ProjectionGrid::new(ProjectionFormat::Erp, 64, 32).unwrap();
    assert_eq!(active_mask(&erp).active_count(), 2048);
    for f in [ProjectionFormat::Cmp, ProjectionFormat::Eac, ProjectionFormat::Tsp] {
        assert!(active_mask(&default_grid(f, 4096).unwrap()).is_full());
    }
    for f in [ProjectionFormat::Ssp, ProjectionFormat::Isp, ProjectionFormat::Ohp] {
        assert!(active_mask(&default_grid(f, 4096).unwrap()).active_fraction() < 1.0);
    }
}

#[test]
fn ssp_cap_square_fill_is_quarter_pi() {
    // Pole square of side 64 and 128 (heights 128, 256).
    for h in [128usize, 256] {
        let g = ProjectionGrid::new(ProjectionFormat::Ssp, 2 * h, h).unwrap();
        let m = active_mask(&g);
        let s = h / 2;
        let count = (0..s).flat_map(|j| (0..s).map(move |i| (i, j))).filter(|&(i, j)| m.get(i, j)).count();
        let frac = count as f64 / (s * s) as f64;
        assert!((frac / (PI / 4.0) - 1.0).abs() < 0.02, "side {s}: {frac}");
    }
}

#[test]
fn polyhedral_active_fraction_matches_net() {
    for (f, want) in [(ProjectionFormat::Isp, 10.0 / 16.5), (ProjectionFormat::Ohp, 0.5)] {
        let g = default_grid(f, 131_072).unwrap();
        let got = active_mask(&g).active_fraction();
        assert!((got - want).abs() < 0.01, "{f}: {got}");
    }
}

#[test]
fn every_pixel_center_reprojects() {
    for g in grids(16_384) {
        let fm = g.face_map();
        let mut worst: f64 = 0.0;
        for j in 0..g.height() {
            for i in 0..g.width() {
                if fm.get(i, j).is_none() {
                    continue;
                }
                let p = ImagePoint::pixel_center(i, j);
                let d = unproject(&g, p).unwrap().unwrap();
                let q = project(&g, &d);
                worst = worst.max((q.x - p.x).abs().max((q.y - p.y).abs()));
            }
        }
        assert!(worst < 1e-6, "{}: worst reprojection {worst} px", g.format());
    }
}

#[test]
fn random_directions_roundtrip_and_land_active() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for g in grids(32_768) {
        for _ in 0..20_000 {
            let d = random_dir(&mut rng);
            let p = project(&g, &d);
            assert!(p.x >= 0.0 && p.y >= 0.0 && p.x <= g.width() as f64 && p.y <= g.height() as f64);
            let back = unproject(&g, p).unwrap();
            let back = back.unwrap_or_else(|| panic!("{}: {d:?} projected to inactive {p:?}", g.format()));
            assert!(angular_error(&back, &d) < 1e-9, "{}", g.format());
        }
    }
}

#[test]
fn eac_with_identity_remap_is_cmp() {
    let cmp = ProjectionGrid::new(ProjectionFormat::Cmp, 96, 64).unwrap();
    let f = 32.0;
    for j in 0..64 {
        for i in 0..96 {
            let (x, y) = (i as f64 + 0.5, j as f64 + 0.5);
            let face = cmp.face_at(x, y).unwrap();
            let a = cmp.unproject_in_face(face, x, y);
            let b = cube::cube_unproject(face, x, y, f, false);
            assert_eq!(a, b);
        }
    }
    // And the EAC mapping is the CMP mapping composed with the remap.
    let eac = ProjectionGrid::new(ProjectionFormat::Eac, 96, 64).unwrap();
    let d = eac.unproject_in_face(1, 48.0 + 8.0, 16.0);
    let u = eac_unmap(2.0 * 24.0 / 32.0 - 1.0).unwrap();
    let v = eac_unmap(2.0 * 16.0 / 32.0 - 1.0).unwrap();
    assert!((d - Vec3::new(1.0, u, -v)).norm() < 1e-15);
}

#[test]
fn poles_and_seams_follow_tie_rule() {
    let g = ProjectionGrid::new(ProjectionFormat::Cmp, 96, 64).unwrap();
    // (1, 1, 0)/√2 lies on the Front/Right seam: lowest face is Front (1).
    let (face, p) = g.project_face(Vec3::new(1.0, 1.0, 0.0));
    assert_eq!(face, 1);
    assert!((p.x - 64.0).abs() < 1e-12 && (p.y - 16.0).abs() < 1e-12);
    let ssp = ProjectionGrid::new(ProjectionFormat::Ssp, 64, 32).unwrap();
    let on_rim = crate::geometry::latlon_vec(std::f64::consts::FRAC_PI_4, 0.3);
    assert_eq!(ssp.project_face(on_rim).0, 0);
    let (f, p) = ssp.project_face(Vec3::Z);
    assert_eq!(f, 0);
    assert_eq!((p.x, p.y), (8.0, 8.0));
}

#[test]
fn unproject_is_locally_lipschitz() {
    for g in grids(32_768) {
        let fm = g.face_map();
        let mean_pitch = (4.0 * PI / fm.to_mask().active_count() as f64).sqrt();
        let mut worst: f64 = 0.0;
        for j in 0..g.height() {
            for i in 0..g.width() {
                let Some(f) = fm.get(i, j) else { continue };
                let d = unproject(&g, ImagePoint::pixel_center(i, j)).unwrap().unwrap();
                for (di, dj) in [(1usize, 0usize), (0, 1)] {
                    let (ni, nj) = (i + di, j + dj);
                    if ni >= g.width() || nj >= g.height() || fm.get(ni, nj) != Some(f) {
                        continue;
                    }
                    let e = unproject(&g, ImagePoint::pixel_center(ni, nj)).unwrap().unwrap();
                    worst = worst.max(angular_error(&d, &e));
                }
            }
        }
        assert!(worst < 4.0 * mean_pitch, "{}: {worst} vs pitch {mean_pitch}", g.format());
    }
}

#[test]
fn grid_validation() {
    use ProjectionFormat::*;
    assert!(ProjectionGrid::new(Erp, 64, 31).is_err());
    assert!(ProjectionGrid::new(Cmp, 90, 64).is_err());
    assert!(ProjectionGrid::new(Ssp, 66, 33).is_err());
    assert!(ProjectionGrid::new(Isp, 100, 100).is_err());
    assert!(ProjectionGrid::new(Erp, 1, 1).is_err());
    let bad = LayoutParams {
        tsp_back_ratio: 1.5,
        ..LayoutParams::default()
    };
    assert!(ProjectionGrid::with_params(Tsp, 64, 32, bad).is_err());
    assert!("eac".parse::<ProjectionFormat>().is_ok());
    assert!("hec".parse::<ProjectionFormat>().is_err());
}

#[test]
fn tsp_custom_ratio_roundtrips() {
    let params = LayoutParams {
        tsp_back_ratio: 0.25,
        ..LayoutParams::default()
    };
    let g = ProjectionGrid::with_params(ProjectionFormat::Tsp, 128, 64, params).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..5000 {
        let d = random_dir(&mut rng);
        let back = unproject(&g, project(&g, &d)).unwrap().unwrap();
        assert!(angular_error(&back, &d) < 1e-9);
    }
    // Back face center sits at the middle of the right half.
    let p = project(&g, &SphereDir::new(-1.0, 0.0, 0.0).unwrap());
    assert!((p.x - 96.0).abs() < 1e-12 && (p.y - 32.0).abs() < 1e-12);
    let _ = FRAC_PI_2;
}

