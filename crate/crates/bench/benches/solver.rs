use criterion::{criterion_group, criterion_main, Criterion};
use hardy_core::solver::{minimize, RayleighProblem, SolverOptions};
use hardy_core::HardyParams;

fn plain(c: &mut Criterion) {
    let params = HardyParams::new(2.0, 3, 3, 1.0).unwrap();
    let prob = RayleighProblem::plain(params, 1e-16, 400).unwrap();
    let opts = SolverOptions::default();
    let mut group = c.benchmark_group("solver");
    group.sample_size(10);
    group.bench_function("plain p=2 400 nodes", |b| {
        b.iter(|| minimize(&prob, &opts).unwrap())
    });
    group.finish();
}

criterion_group!(benches, plain);
criterion_main!(benches);
