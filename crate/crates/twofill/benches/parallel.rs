//! Thread pool against a single thread on the data-parallel workloads:
//! histograms over several seeds, second returns for a sample of heights,
//! the saddle connection census and the verification runner.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rayon::ThreadPool;

use twofill::flatdyn::{build_f, hitting_histograms, second_returns};
use twofill::numerics::rat;
use twofill::rectcomplex::{saddle_connection_census, RectComplex};
use twofill::traintrack::build_t;
use twofill::verify::{iet_sample, run_suite, Config};

fn pools() -> Vec<(&'static str, ThreadPool)> {
    let wide = rayon::ThreadPoolBuilder::new().build().expect("thread pool");
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().expect("thread pool");
    vec![("parallel", wide), ("sequential", single)]
}

fn histograms(c: &mut Criterion) {
    let sys = build_f(40).unwrap();
    let seeds: Vec<_> = [(1, 7), (2, 5), (3, 11), (5, 13)].iter().map(|&(a, b)| rat(a, b)).collect();
    let mut group = c.benchmark_group("histograms");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::new(name, seeds.len()), |b| b.iter(|| pool.install(|| hitting_histograms(&sys, &seeds, 20_000, 8))));
    }
    group.finish();
}

fn iet_sampling(c: &mut Criterion) {
    let sys = build_f(24).unwrap();
    let xs = iet_sample(400, 11, 24);
    let mut group = c.benchmark_group("iet_sampling");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::new(name, xs.len()), |b| b.iter(|| pool.install(|| second_returns(&sys, &xs))));
    }
    group.finish();
}

fn census(c: &mut Criterion) {
    let (t, w) = build_t(12).unwrap();
    let g = RectComplex::new(&t, &w).unwrap();
    let mut group = c.benchmark_group("census");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::new(name, 6), |b| b.iter(|| pool.install(|| saddle_connection_census(&g, 6, 100_000))));
    }
    group.finish();
}

fn verify_runner(c: &mut Criterion) {
    let config = Config::default();
    let mut group = c.benchmark_group("verify_runner");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::new(name, "ray"), |b| b.iter(|| pool.install(|| run_suite("ray", "ray.", &config, false))));
    }
    group.finish();
}

criterion_group!(benches, histograms, iet_sampling, census, verify_runner);
criterion_main!(benches);
