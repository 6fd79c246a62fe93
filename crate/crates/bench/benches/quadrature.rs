use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use hardy_core::functionals::hardy_functional;
use hardy_core::profile::random_bump_sum;
use hardy_core::quadrature::{integrate_singular, QuadOptions, RadialMeasure, WeightedIntegrand};
use hardy_core::HardyParams;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn singular_integral(c: &mut Criterion) {
    let opts = QuadOptions::default();
    let f = WeightedIntegrand::new(-1.0, 2.5, 1.0);
    c.bench_function("integrate_singular x^1.5", |b| {
        b.iter(|| integrate_singular(black_box(&f), 0.0, 0.5, &opts).unwrap())
    });
}

fn functional_on_profile(c: &mut Criterion) {
    let params = HardyParams::new(2.0, 3, 3, 1.0).unwrap();
    let m = RadialMeasure::Sphere { dim: 3 };
    let opts = QuadOptions::with_rel_tol(1e-10);
    let u = random_bump_sum(&mut ChaCha8Rng::seed_from_u64(7), 0.9);
    c.bench_function("hardy_functional bump sum", |b| {
        b.iter(|| hardy_functional(&params, black_box(&u), &m, &opts).unwrap())
    });
}

criterion_group!(benches, singular_integral, functional_on_profile);
criterion_main!(benches);
