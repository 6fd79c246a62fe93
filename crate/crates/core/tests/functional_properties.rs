use hardy_core::functionals::{
    hardy_functional, remainder_term, weighted_gradient_integral, weighted_integral,
    weighted_lq_norm,
};
use hardy_core::minimizing_sequences::{MinSeqParams, UEpsilon};
use hardy_core::profile::{bump, random_bump_sum};
use hardy_core::quadrature::{QuadOptions, RadialMeasure};
use hardy_core::{FnProfile, HardyParams};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut sum = f(a) + f(b);
    for i in 1..panels {
        let x = a + i as f64 * h;
        sum += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
    }
    sum * h / 3.0
}

/// The quintic cut-off, written out independently of the library.
fn cutoff(r: f64, delta: f64) -> (f64, f64) {
    let s = 2.0 * r / delta - 1.0;
    if s <= 0.0 {
        (1.0, 0.0)
    } else if s >= 1.0 {
        (0.0, 0.0)
    } else {
        let value = 1.0 - s.powi(3) * (10.0 - 15.0 * s + 6.0 * s * s);
        let ds = -30.0 * s * s * (1.0 - s).powi(2);
        (value, ds * 2.0 / delta)
    }
}

#[test]
fn deficit_of_a_log_corrected_power_matches_brute_force() {
    // u = r^{-H+0.3} X^{-0.6} φ, p = 2, k = N = 3, D = 1, cut-off at 1/2.
    let params = HardyParams::new(2.0, 3, 3, 1.0).unwrap();
    let delta = 0.5;
    let u = UEpsilon::unchecked(MinSeqParams::new(params, 0.3, 0.6, delta));
    let opts = QuadOptions::with_rel_tol(1e-11);
    let value = hardy_functional(&params, &u, &RadialMeasure::Sphere { dim: 3 }, &opts)
        .unwrap()
        .value;
    let a = -0.5 + 0.3;
    let theta = 0.6;
    // In t = ln(1/r), dx = 4π r³ dt; both integrands decay like e^{-0.6 t}.
    let grad = |t: f64| {
        let r = (-t).exp();
        let (phi, dphi) = cutoff(r, delta);
        let du = r.powf(a - 1.0) * t.powf(theta) * (phi * (a - theta / t))
            + r.powf(a) * t.powf(theta) * dphi;
        FOUR_PI * du * du * r.powi(3)
    };
    let zero = |t: f64| {
        let r = (-t).exp();
        let (phi, _) = cutoff(r, delta);
        let u = r.powf(a) * t.powf(theta) * phi;
        FOUR_PI * u * u * r
    };
    let (lo, hi) = (2f64.ln(), 120.0);
    let brute = simpson(grad, lo, hi, 1_000_000) - 0.25 * simpson(zero, lo, hi, 1_000_000);
    assert!(value > 0.0);
    assert!(((value - brute) / brute).abs() < 1e-6, "{value} vs {brute}");
}

#[test]
fn bump_deficit_is_the_difference_of_its_parts() {
    let params = HardyParams::new(2.0, 3, 3, 1.0).unwrap();
    let m = RadialMeasure::Sphere { dim: 3 };
    let opts = QuadOptions::with_rel_tol(1e-12);
    let u = bump(0.45, 0.15);
    let i = hardy_functional(&params, &u, &m, &opts).unwrap().value;
    let grad = weighted_gradient_integral(&params, &u, &m, 2.0, 0.0, 0.0, &opts)
        .unwrap()
        .value;
    let zero = remainder_term(&params, &u, &m, 0.0, &opts).unwrap().value;
    assert!((i - (grad - 0.25 * zero)).abs() < 1e-8 * grad);
    // R_0 is the plain denominator ∫ u²/r² dx.
    let direct = simpson(|r| FOUR_PI * u.eval(r).powi(2), 0.3, 0.6, 20_000);
    assert!(((zero - direct) / direct).abs() < 1e-9);
}

#[test]
fn zero_profile_has_zero_functionals() {
    let params = HardyParams::new(2.0, 3, 3, 1.0).unwrap();
    let m = RadialMeasure::Sphere { dim: 3 };
    let opts = QuadOptions::default();
    let zero = FnProfile::new(|_| 0.0, |_| 0.0, (0.1, 0.5));
    assert_eq!(
        hardy_functional(&params, &zero, &m, &opts).unwrap().value,
        0.0
    );
    assert_eq!(
        remainder_term(&params, &zero, &m, 2.0, &opts)
            .unwrap()
            .value,
        0.0
    );
}

#[test]
fn lq_norm_reductions() {
    let params = HardyParams::new(2.5, 3, 3, 1.0).unwrap();
    let m = RadialMeasure::Sphere { dim: 3 };
    let opts = QuadOptions::with_rel_tol(1e-12);
    let u = bump(0.4, 0.2);
    for gamma in [0.0, 2.0] {
        let r = remainder_term(&params, &u, &m, gamma, &opts).unwrap().value;
        let n = weighted_lq_norm(&params, &u, &m, 2.5, -2.5, gamma, &opts)
            .unwrap()
            .value;
        assert!((n - r.powf(1.0 / 2.5)).abs() < 1e-12 * n);
    }
}

#[test]
fn sobolev_weights_match_brute_force() {
    // p = 2, q = 3, N = k = 3: weights d^{-q-N+Nq/p} X^{1+q/p} = r^{-1.5} X^{2.5}.
    let params = HardyParams::new(2.0, 3, 3, 1.0).unwrap();
    let m = RadialMeasure::Sphere { dim: 3 };
    let opts = QuadOptions::with_rel_tol(1e-11);
    let u = bump(0.45, 0.15);
    let norm = weighted_lq_norm(&params, &u, &m, 3.0, -1.5, 2.5, &opts)
        .unwrap()
        .value;
    let brute = simpson(
        |r| FOUR_PI * u.eval(r).abs().powi(3) * r.powf(-1.5) * (-1.0 / r.ln()).powf(2.5) * r * r,
        0.3,
        0.6,
        1_000_000,
    )
    .powf(1.0 / 3.0);
    assert!(((norm - brute) / brute).abs() < 1e-6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn functionals_are_p_homogeneous(seed in 0u64..10_000, which in 0usize..3) {
        let lambda = [2.0, -3.0, 0.5][which];
        let params = HardyParams::new(1.7, 3, 3, 2.0).unwrap();
        let m = RadialMeasure::Sphere { dim: 3 };
        let opts = QuadOptions::with_rel_tol(1e-10);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_bump_sum(&mut rng, 1.0);
        let v = u.scaled(lambda);
        let factor = lambda.abs().powf(params.p);
        let i_u = hardy_functional(&params, &u, &m, &opts).unwrap().value;
        let i_v = hardy_functional(&params, &v, &m, &opts).unwrap().value;
        prop_assert!((i_v - factor * i_u).abs() <= 1e-12 * (factor * i_u).abs());
        for gamma in [0.0, 1.0, 2.0] {
            let r_u = remainder_term(&params, &u, &m, gamma, &opts).unwrap().value;
            let r_v = remainder_term(&params, &v, &m, gamma, &opts).unwrap().value;
            prop_assert!((r_v - factor * r_u).abs() <= 1e-12 * factor * r_u);
        }
    }
}

#[test]
fn log_weight_transfer_inequality_on_point_geometry() {
    // For a point dΔd + 1 - k = 0, so only the first two terms remain.
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let opts = QuadOptions::with_rel_tol(1e-10);
    for &(p, k) in &[(1.5, 3usize), (2.0, 3), (3.0, 2), (2.0, 5)] {
        let params = HardyParams::new(p, k, k, 1.5).unwrap();
        let m = RadialMeasure::Sphere { dim: k };
        for &alpha in &[-1.0, 0.5, 2.0, 3.5] {
            for _ in 0..10 {
                let v = random_bump_sum(&mut rng, 1.0);
                let lhs = ((alpha - 1.0f64).abs() / p).powf(p)
                    * weighted_integral(&params, &v, &m, p, -(k as f64), alpha, &opts)
                        .unwrap()
                        .value;
                let rhs =
                    weighted_gradient_integral(&params, &v, &m, p, p - k as f64, alpha - p, &opts)
                        .unwrap()
                        .value;
                assert!(
                    lhs <= rhs * (1.0 + 1e-9) + 1e-9,
                    "p={p} k={k} α={alpha}: {lhs} > {rhs}"
                );
            }
        }
    }
}

#[test]
fn gradient_weighted_deficit_bound_has_positive_constant() {
    // q = p - 1/2, β = 1 + q/p + 0.1.
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let opts = QuadOptions::with_rel_tol(1e-10);
    for &(p, k) in &[(2.0, 3usize), (3.0, 5), (1.5, 3)] {
        let params = HardyParams::new(p, k, k, std::f64::consts::E).unwrap();
        let m = RadialMeasure::Sphere { dim: k };
        let q = p - 0.5;
        let beta = 1.0 + q / p + 0.1;
        let kf = k as f64;
        let mut min_ratio = f64::INFINITY;
        for _ in 0..40 {
            let u = random_bump_sum(&mut rng, 1.0);
            let i = hardy_functional(&params, &u, &m, &opts).unwrap().value;
            let g = weighted_gradient_integral(&params, &u, &m, q, kf * (q / p - 1.0), beta, &opts)
                .unwrap()
                .value;
            min_ratio = min_ratio.min(i / g.powf(p / q));
        }
        assert!(
            min_ratio > 0.0 && min_ratio.is_finite(),
            "p={p}: {min_ratio}"
        );
    }
}

#[test]
fn non_integrable_denominator_is_reported() {
    // u ~ r^{-H} near 0 makes ∫|u|^p d^{-p} diverge logarithmically.
    let params = HardyParams::new(2.0, 3, 3, 1.0).unwrap();
    let u = UEpsilon::unchecked(MinSeqParams::new(params, 0.0, 0.0, 0.5));
    let err = remainder_term(
        &params,
        &u,
        &RadialMeasure::Sphere { dim: 3 },
        0.0,
        &QuadOptions::default(),
    );
    assert!(err.is_err());
}
