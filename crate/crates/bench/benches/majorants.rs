use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use dsine_bench::{dense, mod3, oscillating};
use dsine_core::majorants::rhs;
use dsine_core::membership::{check_membership, dyadic_grid};
use dsine_core::{Axis, DiffOrder, Family, MajorantFamily};

fn majorant_values(c: &mut Criterion) {
    let osc = oscillating();
    let gen = dense(&osc);
    let fam = MajorantFamily::new(Family::Three).with_horizon(1 << 12);
    let mut g = c.benchmark_group("rhs");
    for axis in Axis::ALL {
        g.bench_function(format!("separable_{axis}"), |b| b.iter(|| rhs(&osc, &fam, axis, black_box(16), 16).unwrap()));
    }
    g.sample_size(10);
    g.bench_function("dense_double", |b| b.iter(|| rhs(&gen, &fam, Axis::Double, black_box(16), 16).unwrap()));
    g.finish();
}

fn membership(c: &mut Criterion) {
    let m3 = mod3();
    let fam = MajorantFamily::new(Family::Three).with_horizon(1 << 14);
    let grid = dyadic_grid(2, 1 << 10);
    let r = DiffOrder::new(3).unwrap();
    c.bench_function("check_membership_mod3_r3", |b| {
        b.iter(|| check_membership(&m3, r, &fam, black_box(&grid), &Axis::ALL, None).unwrap())
    });
}

criterion_group!(benches, majorant_values, membership);
criterion_main!(benches);
