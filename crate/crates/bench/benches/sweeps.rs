use criterion::{criterion_group, criterion_main, Criterion};
use hardy_core::certificates::{certify, CertifyOptions, VectorFieldSpec};
use hardy_core::minimizing_sequences::{optimality_sweep_a, SweepSettings};
use hardy_core::quadrature::RadialMeasure;
use hardy_core::HardyParams;

fn sweep(c: &mut Criterion) {
    let params = HardyParams::new(2.0, 3, 3, std::f64::consts::E).unwrap();
    let m = RadialMeasure::Sphere { dim: 3 };
    let settings = SweepSettings::default();
    c.bench_function("optimality_sweep_a p=2", |b| {
        b.iter(|| optimality_sweep_a(&params, &m, 0.55, 1.0, &settings).unwrap())
    });
}

fn certificate(c: &mut Criterion) {
    let spec = VectorFieldSpec::with_default_a(HardyParams::new(1.5, 3, 3, 1.0).unwrap()).unwrap();
    let opts = CertifyOptions::default();
    c.bench_function("certify case A", |b| {
        b.iter(|| certify(&spec, 0.5, &opts).unwrap())
    });
}

criterion_group!(benches, sweep, certificate);
criterion_main!(benches);
