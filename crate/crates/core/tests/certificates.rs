use hardy_core::certificates::{
    certify, divergence_check, f_eval, one_dimensional_hardy_check, pointwise_margin_sampler,
    weighted_sobolev_check, CaseTag, CertifyOptions, LemmaBranch, VectorFieldSpec,
};
use hardy_core::functionals::{hardy_functional, remainder_term};
use hardy_core::profile::{bump, random_bump_sum};
use hardy_core::quadrature::{QuadOptions, RadialMeasure};
use hardy_core::{HardyParams, KGeometry, RadialFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CASES: [(f64, usize, CaseTag); 4] = [
    (1.5, 3, CaseTag::A),
    (3.0, 5, CaseTag::B),
    (1.5, 1, CaseTag::C),
    (3.0, 1, CaseTag::D),
];

fn spec(p: f64, k: usize) -> VectorFieldSpec {
    VectorFieldSpec::with_default_a(HardyParams::new(p, k, k, 1.0).unwrap()).unwrap()
}

fn measure(k: usize) -> RadialMeasure {
    if k == 1 {
        RadialMeasure::Boundary
    } else {
        RadialMeasure::Sphere { dim: k }
    }
}

fn geometry(k: usize) -> KGeometry {
    if k == 1 {
        KGeometry::AffinePlane { dim: 2, codim: 1 }
    } else {
        KGeometry::Point {
            dim: k,
            center: None,
        }
    }
}

#[test]
fn derivatives_agree_with_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (p, k, _) in CASES {
        let s = spec(p, k);
        let m0 = certify(&s, 1.0, &CertifyOptions::default()).unwrap().m0;
        for _ in 0..100 {
            let t = rng.gen_range(0.05..0.95) * m0.min(10.0);
            let h = 1e-4 * t.max(1e-2);
            let at = |x| f_eval(&s, x).unwrap();
            let v = at(t);
            let (up, down) = (at(t + h), at(t - h));
            let scale = |x: f64| 1e-5 * (1.0 + x.abs());
            assert!(((up.f - down.f) / (2.0 * h) - v.df).abs() < scale(v.df));
            assert!(((up.df - down.df) / (2.0 * h) - v.d2f).abs() < scale(v.d2f));
            assert!(((up.d2f - down.d2f) / (2.0 * h) - v.d3f).abs() < scale(v.d3f));
        }
    }
}

#[test]
fn every_case_certifies_with_its_default() {
    for (p, k, tag) in CASES {
        let s = spec(p, k);
        assert_eq!(s.case_tag, tag);
        let r = certify(&s, 0.5, &CertifyOptions::default()).unwrap();
        assert!(r.verified, "{tag:?}: {r:?}");
        assert!(r.m0 > 0.0 && r.d0 >= 0.5);
        if tag == CaseTag::B {
            assert_eq!(r.d0, 0.5);
            assert_eq!(r.m0, 50.0);
        } else {
            assert!((r.d0 - (1.0 / r.m0).exp() * 0.5).abs() < 1e-12 * r.d0);
        }
    }
}

#[test]
fn quadratic_exponent_margin_is_zero() {
    let s = VectorFieldSpec::new(HardyParams::new(2.0, 3, 3, 1.0).unwrap(), 0.0).unwrap();
    let r = certify(&s, 1.0, &CertifyOptions::default()).unwrap();
    assert!(r.min_margin.abs() < 1e-12, "{}", r.min_margin);
}

#[test]
fn certificate_json_uses_upper_case_keys() {
    let r = certify(&spec(3.0, 5), 1.0, &CertifyOptions::default()).unwrap();
    let json = serde_json::to_value(&r).unwrap();
    assert_eq!(json["D0"], 1.0);
    assert_eq!(json["spec"]["case_tag"], "b");
}

#[test]
fn field_satisfies_its_divergence_inequality() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (p, k, _) in CASES
        .into_iter()
        .chain([(2.0, 3, CaseTag::B), (2.0, 2, CaseTag::Degenerate)])
    {
        let s = if p == 2.0 && k == 3 {
            VectorFieldSpec::new(HardyParams::new(p, k, k, 1.0).unwrap(), 0.0).unwrap()
        } else {
            spec(p, k)
        };
        let geom = geometry(k);
        let big_d = if s.case_tag == CaseTag::Degenerate {
            2.0
        } else {
            certify(&s, 1.0, &CertifyOptions::default()).unwrap().d0
        };
        for _ in 0..40 {
            let dim = geom.dim();
            let dir: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let norm = dir.iter().map(|c| c * c).sum::<f64>().sqrt();
            let radius = rng.gen_range(0.05..0.95);
            let mut x: Vec<f64> = dir.iter().map(|c| radius * c / norm).collect();
            if k == 1 {
                // only the normal coordinate matters for the half-plane
                x[1] = radius;
            }
            let c = divergence_check(&s, &geom, &x, big_d).unwrap();
            assert!(c.relative_defect() > -1e-7, "p={p} k={k}: {c:?}");
            if s.case_tag == CaseTag::Degenerate || (p == 2.0 && k == 3) {
                assert!(c.relative_defect().abs() < 1e-7, "{c:?}");
            }
        }
    }
}

#[test]
fn certificate_implies_the_improved_inequality() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let opts = QuadOptions::with_rel_tol(1e-10);
    for (p, k, tag) in CASES {
        let s = spec(p, k);
        let r = certify(&s, 1.0, &CertifyOptions::default()).unwrap();
        let params = s.params.with_d(r.d0);
        let m = measure(k);
        for _ in 0..25 {
            let u = random_bump_sum(&mut rng, 1.0);
            let i = hardy_functional(&params, &u, &m, &opts).unwrap().value;
            let rem = remainder_term(&params, &u, &m, 2.0, &opts).unwrap().value;
            let gap = i - params.remainder_constant() * rem;
            assert!(
                gap >= -1e-9 * (1.0 + i.abs()),
                "{tag:?}: I = {i}, R2 = {rem}"
            );
        }
    }
}

#[test]
fn sampler_restricted_branch_at_p3() {
    let report = pointwise_margin_sampler(3.0, 1_000_000, 7).unwrap();
    let quad = report
        .branches
        .iter()
        .find(|b| b.branch == LemmaBranch::Quadratic)
        .unwrap();
    assert!(quad.restricted_infimum.unwrap() >= 1.5 - 1e-9);
    assert!(report.passed());
}

#[test]
fn sampler_subquadratic_branch_is_positive() {
    let report = pointwise_margin_sampler(1.5, 1_000_000, 7).unwrap();
    let sub = report
        .branches
        .iter()
        .find(|b| b.branch == LemmaBranch::Subquadratic)
        .unwrap();
    assert!(sub.infimum > 0.0);
}

#[test]
fn sampler_flags_the_restricted_bound_at_p2() {
    // The infimum on |b| <= |a|/2 is p/2, below p/2^{p-2} for p < 3.
    let report = pointwise_margin_sampler(2.0, 200_000, 1).unwrap();
    let quad = report
        .branches
        .iter()
        .find(|b| b.branch == LemmaBranch::Quadratic)
        .unwrap();
    let inf = quad.restricted_infimum.unwrap();
    assert!(inf >= quad.corrected_bound.unwrap() - 1e-9);
    assert!(inf < 1.05);
    assert_eq!(quad.stated_bound_holds, Some(false));
}

#[test]
fn one_dimensional_hardy_on_a_bump() {
    let u = bump(0.45, 0.15);
    let table = one_dimensional_hardy_check(
        2.0,
        2.0,
        0.0,
        &[&u as &dyn RadialFunction],
        &QuadOptions::default(),
    )
    .unwrap();
    assert!(table.passed);
    assert!(table.rows[0].ratio > 0.0 && table.rows[0].ratio.is_finite());
}

#[test]
fn weighted_sobolev_on_random_profiles() {
    let params = HardyParams::new(2.0, 3, 3, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let profiles: Vec<_> = (0..50).map(|_| random_bump_sum(&mut rng, 0.9)).collect();
    let refs: Vec<&dyn RadialFunction> =
        profiles.iter().map(|p| p as &dyn RadialFunction).collect();
    let table = weighted_sobolev_check(
        &params,
        &RadialMeasure::Sphere { dim: 3 },
        3.0,
        2.0,
        &refs,
        &QuadOptions::with_rel_tol(1e-9),
    )
    .unwrap();
    assert_eq!(table.rows.len(), 50);
    assert!(table.passed && table.infimum > 0.0);
    let mut buf = Vec::new();
    table.write_csv(&mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 51);
}
