//! Parallel vs sequential alpha survey.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lorenz_lab::sweep::{alpha_sweep, alpha_sweep_seq};

fn bench_sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("alpha_sweep");
    for n in [21usize, 101] {
        group.bench_with_input(BenchmarkId::new("parallel", n), &n, |b, &n| {
            b.iter(|| alpha_sweep(n).unwrap());
        });
        group.bench_with_input(BenchmarkId::new("sequential", n), &n, |b, &n| {
            b.iter(|| alpha_sweep_seq(n).unwrap());
        });
    }
    group.finish();
}

criterion_group!(benches, bench_sweep);
criterion_main!(benches);
