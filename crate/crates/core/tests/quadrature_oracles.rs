use hardy_core::quadrature::{
    composite_gauss, integrate_singular, GradedGrid, QuadOptions, WeightedIntegrand,
};
use hardy_core::weights::{x_eval, x_power_antiderivative};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Exponential integral E1 by its power series (fine for small arguments).
fn e1_small(x: f64) -> f64 {
    const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
    let mut sum = 0.0;
    let mut term = 1.0;
    for n in 1..60 {
        term *= -x / n as f64;
        sum += term / n as f64;
    }
    -EULER_GAMMA - x.ln() - sum
}

#[test]
fn randomized_closed_form_cases() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let opts = QuadOptions::default();
    for _ in 0..50 {
        let positive = rng.gen_bool(0.6);
        let beta = if positive {
            rng.gen_range(0.1..5.0)
        } else {
            -rng.gen_range(0.1..3.0)
        };
        let s2 = rng.gen_range(0.01..0.95);
        let s1 = if positive {
            0.0
        } else {
            s2 * rng.gen_range(1e-6..0.9)
        };
        let f = WeightedIntegrand::new(-1.0, beta + 1.0, 1.0);
        let est = integrate_singular(&f, s1, s2, &opts).unwrap();
        let exact = x_power_antiderivative(beta, s1, s2).unwrap();
        let rel = ((est.value - exact) / exact).abs();
        assert!(rel < 1e-8, "beta={beta} s1={s1} s2={s2}: rel {rel:e}");
        assert!(est.error >= (est.value - exact).abs() * 0.999);
    }
}

#[test]
fn small_epsilon_power_matches_two_oracles() {
    let eps = 0.01;
    let f = WeightedIntegrand::new(-1.0 + 2.0 * eps, 2.0, 1.0);
    let adaptive = integrate_singular(&f, 0.0, 0.5, &QuadOptions::with_rel_tol(1e-10))
        .unwrap()
        .value;

    // ∫_{ln 2}^∞ e^{-αt} t^{-2} dt with α = 2ε, integrated by parts.
    let alpha = 2.0 * eps;
    let c = 2f64.ln();
    let closed = (-alpha * c).exp() / c - alpha * e1_small(alpha * c);

    // Brute force on 10^6 graded panels in s = r^ε, where the integrand
    // becomes ε s / ln² s on (0, 2^{-ε}).
    let s_max = 0.5f64.powf(eps);
    let grid = GradedGrid::power(s_max, 1_000_000, 3.0).unwrap();
    let brute = composite_gauss(
        |s: f64| {
            if s <= 0.0 {
                0.0
            } else {
                eps * s / (s.ln() * s.ln())
            }
        },
        &grid,
    )
    .value;

    // Frozen reference (50-digit evaluation of the closed form).
    let frozen = 1.348_530_325_794_176_4;
    assert!(
        ((closed - frozen) / frozen).abs() < 1e-12,
        "closed {closed:.15}"
    );
    assert!(((brute - closed) / closed).abs() < 1e-9, "brute {brute}");
    assert!(
        ((adaptive - closed) / closed).abs() < 1e-9,
        "adaptive {adaptive}"
    );
}

#[test]
fn doubling_never_increases_error_estimate() {
    for &beta in &[0.5, 1.0, 2.0] {
        let s2 = 0.5;
        let g = move |r: f64| {
            if r <= 0.0 {
                0.0
            } else {
                x_eval(r).unwrap().powf(beta + 1.0) / r
            }
        };
        let mut grid = GradedGrid::power(s2, 64, 3.0).unwrap();
        let mut last = f64::INFINITY;
        for _ in 0..5 {
            let est = composite_gauss(g, &grid);
            assert!(est.error <= last, "beta={beta}: {} > {last}", est.error);
            last = est.error;
            grid = grid.refined();
        }
    }
}
