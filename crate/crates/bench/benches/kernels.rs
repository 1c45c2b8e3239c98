use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dsine_bench::{dense, oscillating};
use dsine_core::kernels::{dirichlet_conj, rect_sum_direct, rect_sum_parts};
use dsine_core::{DiffOrder, KernelPoint, Rect};

fn rect_sums(c: &mut Criterion) {
    let sep = oscillating();
    let gen = dense(&sep);
    let mut g = c.benchmark_group("rect_sum");
    for side in [64u64, 256] {
        let rect = Rect::new(1, side, 1, side).unwrap();
        g.bench_with_input(BenchmarkId::new("direct_separable", side), &rect, |b, r| {
            b.iter(|| rect_sum_direct(&sep, black_box(*r), 0.7, 2.1))
        });
        g.bench_with_input(BenchmarkId::new("direct_dense", side), &rect, |b, r| {
            b.iter(|| rect_sum_direct(&gen, black_box(*r), 0.7, 2.1))
        });
        g.bench_with_input(BenchmarkId::new("parts_r2", side), &rect, |b, r| {
            b.iter(|| rect_sum_parts(&gen, black_box(*r), 0.7, 2.1, DiffOrder::new(2).unwrap()).unwrap())
        });
    }
    g.finish();
}

fn kernel(c: &mut Criterion) {
    c.bench_function("dirichlet_conj_k4096", |b| {
        b.iter(|| dirichlet_conj(KernelPoint { k: black_box(4096), r: 2, x: 1.3 }).unwrap())
    });
}

criterion_group!(benches, rect_sums, kernel);
criterion_main!(benches);
