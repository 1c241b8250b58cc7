use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use omniproj::imageio::{gen_pattern_with, Pattern, PatternKind};
use omniproj::metrics::{solid_angle_weights_with, ssim_with, y_channel};
use omniproj::resample::convert_with;
use omniproj::scaler::{upscale_with, ScaleFactor, Upscaler};
use omniproj::{default_grid, ColorModel, Exec, InterpKernel, ProjectionFormat, ProjectionGrid};

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn bench(c: &mut Criterion) {
    let erp = ProjectionGrid::new(ProjectionFormat::Erp, 512, 256).unwrap();
    let pattern = Pattern::new(PatternKind::SmoothHarmonic, ColorModel::Rgb, 1);
    let src = gen_pattern_with(&pattern, &erp, Exec::default());
    let eac = default_grid(ProjectionFormat::Eac, erp.pixel_count()).unwrap();
    let isp = default_grid(ProjectionFormat::Isp, 32768).unwrap();
    let luma = y_channel(&src).unwrap();
    let noisy = luma.quantized();

    let mut g = c.benchmark_group("exec");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::new("convert_erp_to_eac", name), &exec, |b, &e| {
            b.iter(|| convert_with(&src, &erp, &eac, InterpKernel::Bicubic, e).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("solid_angle_weights_isp", name), &exec, |b, &e| {
            b.iter(|| solid_angle_weights_with(&isp, e))
        });
        g.bench_with_input(BenchmarkId::new("ssim_512x256", name), &exec, |b, &e| {
            b.iter(|| ssim_with(&luma, &noisy, e).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("upscale_x2_bicubic", name), &exec, |b, &e| {
            b.iter(|| upscale_with(&src, ScaleFactor::X2, &Upscaler::default(), e).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("gen_pattern_erp", name), &exec, |b, &e| {
            b.iter(|| gen_pattern_with(&pattern, &erp, e))
        });
    }
    g.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
