//! Sequential vs rayon for the data-parallel kernels.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use stein_core::analytic::density_table;
use stein_core::minimality::minimality_scan;
use stein_core::moments::for_spec;
use stein_core::scalar::int;
use stein_core::steinops::{stein_operator, DistributionSpec};
use stein_core::verify::{default_bank, mc_check_with, DEFAULT_THRESHOLD};
use stein_core::{Exec, Sampler};

const MODES: [(&str, Exec); 2] = [
    ("sequential", Exec::Sequential),
    ("parallel", Exec::Parallel),
];

fn sampling(c: &mut Criterion) {
    let spec = DistributionSpec::product_normal(int(1), int(2));
    let s = Sampler::new(&spec, 7).unwrap();
    let mut g = c.benchmark_group("sample_200k");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| black_box(s.sample_with(200_000, exec)))
        });
    }
    g.finish();
}

fn mc(c: &mut Criterion) {
    let spec = DistributionSpec::product_normal(int(1), int(2));
    let op = stein_operator(&spec).unwrap();
    let s = Sampler::new(&spec, 7).unwrap();
    let bank = default_bank();
    let mut g = c.benchmark_group("mc_check_100k");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                black_box(mc_check_with(
                    &op,
                    &s,
                    &bank,
                    100_000,
                    DEFAULT_THRESHOLD,
                    exec,
                ))
            })
        });
    }
    g.finish();
}

fn scan(c: &mut Criterion) {
    let spec = DistributionSpec::product_normal(int(1), int(1));
    let mut g = c.benchmark_group("minimality_scan_4x2");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                let mut m = for_spec(&spec).unwrap();
                black_box(minimality_scan(&mut m, 4, 2, 17, exec).unwrap())
            })
        });
    }
    g.finish();
}

fn density(c: &mut Criterion) {
    let xs: Vec<f64> = (0..64).map(|k| 0.25 + k as f64 * (3.75 / 63.0)).collect();
    let mut g = c.benchmark_group("density_table_64");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| black_box(density_table(&xs, 0.5, 1.0, 30, exec).unwrap()))
        });
    }
    g.finish();
}

criterion_group!(benches, sampling, mc, scan, density);
criterion_main!(benches);
