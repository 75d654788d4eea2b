//! Parallel (global rayon pool) against sequential (one-thread pool) runs of
//! the hot paths. Build with `--no-default-features` to time the fallback
//! code path without rayon at all.

use std::f64::consts::TAU;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fracns::grid::{forward_transform, inverse_unchecked, make_preset, GridSpec};
use fracns::mild::{bilinear_b, random_trajectory, SolverConfig};
use fracns::operators::{maximal_function, random_scalar, riesz_potential_direct, RadiusLadder};
use fracns::random::SeedStream;
use fracns::varlp::{luxemburg_norm, Domain, ExponentRule, VariableExponent};

fn modes() -> Vec<(&'static str, rayon::ThreadPool)> {
    let all = rayon::current_num_threads();
    vec![
        ("parallel", rayon::ThreadPoolBuilder::new().num_threads(all).build().unwrap()),
        ("sequential", rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap()),
    ]
}

fn fft(c: &mut Criterion) {
    let g = GridSpec::new(3, 64, TAU).unwrap();
    let u = make_preset("random_divfree", g, 1.0, 1).unwrap();
    let mut group = c.benchmark_group("fft_round_trip_64^3");
    for (name, pool) in modes() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pool.install(|| inverse_unchecked(&forward_transform(&u).unwrap())))
        });
    }
    group.finish();
}

fn bilinear(c: &mut Criterion) {
    let cfg = SolverConfig::new(0.8, 0.5, 9, GridSpec::new(3, 32, TAU).unwrap()).unwrap();
    let e = random_trajectory(&cfg, 3).unwrap();
    let mut group = c.benchmark_group("bilinear_32^3_9_nodes");
    group.sample_size(10);
    for (name, pool) in modes() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pool.install(|| bilinear_b(&cfg, &e, &e).unwrap()))
        });
    }
    group.finish();
}

fn luxemburg(c: &mut Criterion) {
    let g = GridSpec::new(1, 1 << 20, 1.0).unwrap();
    let p = VariableExponent::new(ExponentRule::Sinusoidal { p0: 3.0, a: 1.0, period: 0.25 }, Domain::Grid(g)).unwrap();
    let mut rng = SeedStream::new(5);
    let f: Vec<f64> = (0..g.len()).map(|_| rng.uniform(-2.0, 2.0)).collect();
    let mut group = c.benchmark_group("luxemburg_2^20");
    for (name, pool) in modes() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pool.install(|| luxemburg_norm(&f, &p).unwrap()))
        });
    }
    group.finish();
}

fn operators(c: &mut Criterion) {
    let g = GridSpec::new(3, 32, 8.0).unwrap();
    let f = random_scalar(g, 2);
    let ladder = RadiusLadder::standard(&g);
    let small = random_scalar(GridSpec::new(3, 12, 8.0).unwrap(), 3);
    let mut group = c.benchmark_group("operators");
    group.sample_size(10);
    for (name, pool) in modes() {
        group.bench_function(BenchmarkId::new("maximal_32^3", name), |b| {
            b.iter(|| pool.install(|| maximal_function(&f, &ladder)))
        });
        group.bench_function(BenchmarkId::new("riesz_direct_12^3", name), |b| {
            b.iter(|| pool.install(|| riesz_potential_direct(&small, 1.0).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, fft, bilinear, luxemburg, operators);
criterion_main!(benches);
