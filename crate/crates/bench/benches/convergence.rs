use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use dsine_bench::oscillating;
use dsine_core::convergence::{eta_search, interior_grid, uniform_tail_probe, EtaConfig, ProbeConfig};

fn probe(c: &mut Criterion) {
    let osc = oscillating();
    let cfg = ProbeConfig { xy_grid: interior_grid(9), lattice_max: 1024, ..ProbeConfig::default() };
    let mut g = c.benchmark_group("convergence");
    g.sample_size(10);
    g.bench_function("uniform_tail_probe_9x9", |b| b.iter(|| uniform_tail_probe(&osc, black_box(&cfg)).unwrap()));
    let eta_cfg = EtaConfig { constant: 3.0, ..EtaConfig::default() };
    g.bench_function("eta_search_0.05", |b| b.iter(|| eta_search(&osc, black_box(0.05), &eta_cfg).unwrap()));
    g.finish();
}

criterion_group!(benches, probe);
criterion_main!(benches);
