use hardy_core::fit::fit_line;
use hardy_core::functionals::{gradient_term, remainder_term};
use hardy_core::minimizing_sequences::{
    degenerate_ratio_limit, hp_optimality, j_beta, optimality_sweep_a, optimality_sweep_pk,
    weak_norm_failure, MinSeqParams, Regime, SweepSettings, UEpsilon, WeakNormWindow,
};
use hardy_core::quadrature::{QuadOptions, RadialMeasure};
use hardy_core::{HardyError, HardyParams};

const E: f64 = std::f64::consts::E;

fn deep() -> SweepSettings {
    SweepSettings {
        eps_list: SweepSettings::log_spaced(-10.0, -100.0, 10),
        ..SweepSettings::default()
    }
}

#[test]
fn closed_form_region_and_support() {
    let params = HardyParams::new(2.0, 3, 3, E).unwrap();
    let msp = MinSeqParams::new(params, 0.01, 0.6, 1.0);
    let u = UEpsilon::new(msp, Regime::SharpConstant).unwrap();
    let r = 0.25;
    let t = (E / r).ln();
    let exact = r.powf(-0.5 + 0.01) * t.powf(0.6);
    assert!((u.value(r) - exact).abs() < 1e-14 * exact);
    assert_eq!(u.value(1.0), 0.0);
    assert_eq!(u.value(1.3), 0.0);
    let h = 1e-6;
    let closed = |r: f64| r.powf(-0.49) * (E / r).ln().powf(0.6);
    let fd = (closed(r + h) - closed(r - h)) / (2.0 * h);
    assert!((u.derivative(r) - fd).abs() < 1e-8 * fd.abs());
}

#[test]
fn regime_violations_name_the_bound() {
    let params = HardyParams::new(2.0, 3, 3, E).unwrap();
    let err = UEpsilon::new(
        MinSeqParams::new(params, 0.01, 1.2, 1.0),
        Regime::SharpConstant,
    )
    .unwrap_err();
    assert!(matches!(err, HardyError::Parameter(_)));
    assert!(err.to_string().contains("1/p < θ < 2/p"));
}

#[test]
fn j_beta_with_negative_index_is_bounded() {
    // The approach to the limit is O(εp ln(1/ε)) relative to ln(D/δ) + ln 2, so keep p small and δ near D.
    let params = HardyParams::new(1.2, 3, 3, 1.0).unwrap();
    let m = RadialMeasure::Sphere { dim: 3 };
    let opts = QuadOptions::with_rel_tol(1e-10);
    let j = |eps| {
        j_beta(&MinSeqParams::new(params, eps, 0.6, 0.999), -2.0, &m, &opts)
            .unwrap()
            .value
    };
    let (a, b) = (j(1e-2), j(1e-3));
    assert!(((a - b) / b).abs() < 0.05);
}

#[test]
fn j_beta_growth_bracket() {
    let params = HardyParams::new(2.0, 3, 3, E).unwrap();
    let m = RadialMeasure::Sphere { dim: 3 };
    let opts = QuadOptions::with_rel_tol(1e-10);
    let scaled: Vec<f64> = [1e-1, 1e-2, 1e-3, 1e-4]
        .iter()
        .map(|&eps| {
            eps * eps
                * j_beta(&MinSeqParams::new(params, eps, 0.6, 1.0), 1.0, &m, &opts)
                    .unwrap()
                    .value
        })
        .collect();
    let max = scaled.iter().cloned().fold(0.0, f64::max);
    let min = scaled.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(min > 0.0 && max / min < 3.0, "{scaled:?}");
}

#[test]
fn j_beta_recursion_defect_stays_bounded() {
    let params = HardyParams::new(2.0, 3, 3, E).unwrap();
    let m = RadialMeasure::Sphere { dim: 3 };
    let opts = QuadOptions::with_rel_tol(1e-11);
    let beta = 0.5;
    let eps_list = SweepSettings::log_spaced(-1.0, -4.0, 7);
    let defects: Vec<f64> = eps_list
        .iter()
        .map(|&eps| {
            let msp = MinSeqParams::new(params, eps, 0.6, 1.0);
            let a = j_beta(&msp, beta, &m, &opts).unwrap().value;
            let b = j_beta(&msp, beta + 1.0, &m, &opts).unwrap().value;
            (a - 2.0 * eps / (beta + 1.0) * b).abs()
        })
        .collect();
    let xs: Vec<f64> = eps_list.iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = defects.iter().map(|d| d.ln()).collect();
    let slope = fit_line(&xs, &ys).unwrap().slope;
    assert!(slope.abs() < 0.1, "slope {slope}, defects {defects:?}");
}

#[test]
fn remainder_is_j_beta() {
    let params = HardyParams::new(1.5, 3, 3, E).unwrap();
    let m = RadialMeasure::Sphere { dim: 3 };
    let opts = QuadOptions::with_rel_tol(1e-12);
    let theta = 0.9;
    for eps in [1e-1, 1e-3] {
        let msp = MinSeqParams::new(params, eps, theta, 1.0);
        let u = UEpsilon::new(msp, Regime::SharpConstant).unwrap();
        let r = remainder_term(&params, &u, &m, 2.0, &opts).unwrap().value;
        let j = j_beta(&msp, params.p * theta - 2.0, &m, &opts)
            .unwrap()
            .value;
        assert!(((r - j) / j).abs() < 1e-8);
    }
}

#[test]
fn gradient_excess_is_of_lower_order() {
    // (∫|∇U_ε|^p - |H|^p J_{pθ}) ε^{pθ-1} stays bounded.
    let params = HardyParams::new(2.0, 3, 3, E).unwrap();
    let m = RadialMeasure::Sphere { dim: 3 };
    let opts = QuadOptions::with_rel_tol(1e-11);
    let theta = 0.6;
    let scaled: Vec<f64> = SweepSettings::default()
        .eps_list
        .iter()
        .map(|&eps| {
            let msp = MinSeqParams::new(params, eps, theta, 1.0);
            let u = UEpsilon::new(msp, Regime::SharpConstant).unwrap();
            let g = gradient_term(&params, &u, &m, &opts).unwrap().value;
            let j = j_beta(&msp, 2.0 * theta, &m, &opts).unwrap().value;
            (g - 0.25 * j) * eps.powf(2.0 * theta - 1.0)
        })
        .collect();
    let max = scaled.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let min = scaled.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
    assert!(max / min < 3.0, "{scaled:?}");
}

#[test]
fn default_sweep_reproduces_constant_and_exponent() {
    let params = HardyParams::new(2.0, 3, 3, E).unwrap();
    let m = RadialMeasure::Sphere { dim: 3 };
    let r = optimality_sweep_a(&params, &m, 0.55, 1.0, &SweepSettings::default()).unwrap();
    assert!((r.constant.fitted_limit.unwrap().value - 0.25).abs() < 0.01);
    assert!((r.exponent.fitted_exponent.unwrap().value - 1.0).abs() < 0.1);
    assert_eq!(r.constant.rows.len(), 7);
    assert!(r
        .constant
        .rows
        .windows(2)
        .all(|w| w[0].epsilon < w[1].epsilon));
}

#[test]
fn interval_remainder_limit_below_its_bound() {
    let params = HardyParams::new(2.0, 1, 1, E).unwrap();
    let r = optimality_sweep_a(
        &params,
        &RadialMeasure::Boundary,
        0.55,
        1.0,
        &SweepSettings::default(),
    )
    .unwrap();
    assert!(r.remainder.fitted_limit.unwrap().value <= 0.285);
}

#[test]
fn deep_sweep_limits_are_exact() {
    let params = HardyParams::new(1.5, 3, 3, E).unwrap();
    let m = RadialMeasure::Sphere { dim: 3 };
    let r = optimality_sweep_a(&params, &m, 0.9, 1.5, &deep()).unwrap();
    assert!((r.constant.fitted_limit.unwrap().value - 1.0).abs() < 1e-6);
    assert!((r.exponent.fitted_exponent.unwrap().value - 0.5).abs() < 1e-3);
    let target = 0.9 * 0.5 / 2.0;
    assert!((r.remainder.fitted_limit.unwrap().value - target).abs() < 1e-4 * target);
}

#[test]
fn degenerate_sweep_matches_closed_limit() {
    let params = HardyParams::new(2.0, 2, 2, E).unwrap();
    let m = RadialMeasure::Sphere { dim: 2 };
    let low = optimality_sweep_pk(&params, &m, 0.51, 2.0, &deep()).unwrap();
    let high = optimality_sweep_pk(&params, &m, 0.75, 2.0, &deep()).unwrap();
    let (a, b) = (
        low.fitted_limit.unwrap().value,
        high.fitted_limit.unwrap().value,
    );
    assert!((0.25..=0.27).contains(&a));
    assert!(b > a);
    assert!((a - degenerate_ratio_limit(2.0, 0.51)).abs() < 1e-6);
    let probe = optimality_sweep_pk(&params, &m, 0.51, 1.5, &deep()).unwrap();
    assert!((probe.fitted_exponent.unwrap().value - 0.5).abs() < 0.05);
}

#[test]
fn degenerate_limit_quadrature() {
    // p = 2: E|2θ - s|² = Var(s) + (2θ - mean)² = α + 1 with α = 2θ - 1.
    for theta in [0.51, 0.75, 1.3] {
        let exact = (2.0 * theta - 1.0 + 1.0) / 4.0;
        assert!((degenerate_ratio_limit(2.0, theta) - exact).abs() < 1e-10);
    }
}

#[test]
fn literal_weak_norm_window_is_empty() {
    for p in [1.5, 1.2] {
        let params = HardyParams::new(p, 3, 3, E).unwrap();
        let err = weak_norm_failure(
            &params,
            2.2,
            WeakNormWindow::Literal,
            &SweepSettings::default(),
        )
        .unwrap_err();
        assert!(err.to_string().contains("empty"), "{err}");
    }
}

#[test]
fn swapped_weak_norm_window_recovers_slopes() {
    let params = HardyParams::new(1.5, 3, 3, E).unwrap();
    let settings = SweepSettings {
        eps_list: SweepSettings::log_spaced(-2.0, -6.0, 9),
        ..SweepSettings::default()
    };
    let theta = 1.25;
    let r = weak_norm_failure(&params, theta, WeakNormWindow::Swapped, &settings).unwrap();
    let num = r.ratio.numerator_exponent.unwrap().value;
    let den = r.ratio.denominator_exponent.unwrap().value;
    assert!((num - (1.0 - 1.5 * theta)).abs() < 0.05);
    assert!((den + theta).abs() < 0.05);
    assert!(r.ratio.fitted_exponent.unwrap().value > 0.0);
}

#[test]
fn hp_probe_separates_the_two_sides() {
    let params = HardyParams::new(2.0, 3, 3, E).unwrap();
    let m = RadialMeasure::Sphere { dim: 3 };
    let below = hp_optimality(&params, &m, 1.0, 1.2, 0.55, &deep(), 0.1).unwrap();
    let above = hp_optimality(&params, &m, 1.0, 1.6, 0.55, &deep(), 0.1).unwrap();
    assert!(below.failure);
    assert!(!above.failure);
    assert!((below.report.fitted_exponent.unwrap().value - below.predicted_exponent).abs() < 0.01);
    assert!(hp_optimality(&params, &m, 2.0, 1.2, 0.55, &deep(), 0.1).is_err());
}
