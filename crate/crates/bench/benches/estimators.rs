use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use npe_bench::Fixture;
use npe_core::estimators::{
    aic_estimate, cbe_estimate, ml_estimate, mmse_estimate, mvu_estimate, AicPenalty,
};
use npe_core::separation::{fisher_separate, rof_separate};
use npe_core::spectral::averaged_periodogram;
use npe_core::RofParams;
use std::hint::black_box;

fn separation(c: &mut Criterion) {
    let mut group = c.benchmark_group("separation");
    let params = RofParams::default();
    for n in [128, 256, 512] {
        let fx = Fixture::new(n, 1);
        let p = &fx.powers[0];
        group.bench_with_input(BenchmarkId::new("rof", n), p, |b, p| {
            b.iter(|| rof_separate(black_box(p), &params))
        });
        group.bench_with_input(BenchmarkId::new("fisher", n), p, |b, p| {
            b.iter(|| fisher_separate(black_box(p)))
        });
    }
    group.finish();
}

fn estimators(c: &mut Criterion) {
    let mut group = c.benchmark_group("estimators");
    group.sample_size(20);
    for n in [128, 256, 512] {
        let fx = Fixture::new(n, 100);
        let avg = averaged_periodogram(&fx.block);
        group.bench_function(BenchmarkId::new("ml", n), |b| {
            b.iter(|| ml_estimate(black_box(&fx.powers[99]), &fx.ideal[99]))
        });
        group.bench_function(BenchmarkId::new("mvu", n), |b| {
            b.iter(|| mvu_estimate(black_box(&fx.powers), &fx.ideal))
        });
        group.bench_function(BenchmarkId::new("aic", n), |b| {
            b.iter(|| aic_estimate(black_box(&avg), 100, AicPenalty::default()))
        });
        group.bench_function(BenchmarkId::new("mmse", n), |b| {
            b.iter(|| mmse_estimate(black_box(&fx.block), true))
        });
        group.bench_function(BenchmarkId::new("cbe", n), |b| {
            b.iter(|| cbe_estimate(black_box(&fx.block), 0.25, 100))
        });
    }
    group.finish();
}

criterion_group!(benches, separation, estimators);
criterion_main!(benches);
