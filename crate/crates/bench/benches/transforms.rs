use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ridgelet_bench::{phantom_pair, signal};
use ridgelet_core::radon::{drt_gdb, drt_rotation, fbp_invert, RotationGeometry};
use ridgelet_core::ridgelet::{denoise, DenoiseConfig};
use ridgelet_core::wavelet::{dwt_forward_padded, dwt_inverse, Mode, WaveletSpec};

fn radon(c: &mut Criterion) {
    let mut group = c.benchmark_group("drt");
    for size in [32, 64, 128] {
        let (clean, _) = phantom_pair(size, 0);
        group.bench_with_input(BenchmarkId::new("gdb", size), &clean, |b, img| {
            b.iter(|| drt_gdb(black_box(img)).unwrap())
        });
        let geometry = RotationGeometry::new(size, size, 180);
        group.bench_with_input(BenchmarkId::new("rotation", size), &clean, |b, img| {
            b.iter(|| drt_rotation(black_box(img), &geometry))
        });
        let sino = drt_rotation(&clean, &geometry);
        group.bench_with_input(BenchmarkId::new("fbp", size), &sino, |b, s| b.iter(|| fbp_invert(black_box(s)).unwrap()));
    }
    group.finish();
}

fn dwt(c: &mut Criterion) {
    let mut group = c.benchmark_group("dwt");
    let x = signal(362);
    for mode in [Mode::Decimated, Mode::Undecimated] {
        let spec = WaveletSpec::haar(3, mode);
        group.bench_function(BenchmarkId::new("round_trip", mode.name()), |b| {
            b.iter(|| dwt_inverse(&dwt_forward_padded(black_box(&x), &spec).unwrap()).unwrap())
        });
    }
    group.finish();
}

fn denoising(c: &mut Criterion) {
    let mut group = c.benchmark_group("denoise");
    group.sample_size(10);
    let (clean, noisy) = phantom_pair(64, 1);
    let config = DenoiseConfig::default();
    group.bench_function("oracle_64", |b| b.iter(|| denoise(black_box(&noisy), &config, Some(&clean)).unwrap()));
    group.finish();
}

criterion_group!(benches, radon, dwt, denoising);
criterion_main!(benches);
