use hardy_core::certificates::{
    appendix_spot_checks, certify, AppendixSettings, CertifyOptions, SpotCheckTable,
    VectorFieldSpec,
};
use hardy_core::functionals::{hardy_functional, weighted_integral};
use hardy_core::geometry::{check_condition_c, sample_domain, SamplerSpec};
use hardy_core::minimizing_sequences::{
    degenerate_ratio_limit, hp_optimality, optimality_sweep_a, optimality_sweep_pk,
    weak_norm_failure,
};
use hardy_core::profile::random_bump_sum;
use hardy_core::quadrature::{integrate_singular, QuadOptions, WeightedIntegrand};
use hardy_core::solver::{minimize, QuotientKind, RayleighProblem, SolverOptions, SolverResult};
use hardy_core::weights::x_power_antiderivative;
use hardy_core::{HardyError, RadialFunction, Result, SweepReport, Verdict};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::config::RunConfig;
use crate::output::{csv_bytes, Outcome};

pub const COMMANDS: [&str; 10] = [
    "quad-selftest",
    "check-condition-c",
    "verify-constant",
    "verify-remainder",
    "verify-exponent",
    "verify-pk",
    "weak-norm-failure",
    "hp-optimality",
    "sobolev-check",
    "rayleigh-min",
];

pub fn run(command: &str, cfg: &RunConfig) -> Result<Outcome> {
    match command {
        "quad-selftest" => quad_selftest(cfg),
        "check-condition-c" => condition_c(cfg),
        "verify-constant" => verify_constant(cfg),
        "verify-remainder" => verify_remainder(cfg),
        "verify-exponent" => verify_exponent(cfg),
        "verify-pk" => verify_pk(cfg),
        "weak-norm-failure" => weak_norm(cfg),
        "hp-optimality" => hp(cfg),
        "sobolev-check" => sobolev(cfg),
        "rayleigh-min" => rayleigh(cfg),
        other => Err(HardyError::Parameter(format!("unknown command {other}"))),
    }
}

/// One sweep row tagged with the run it belongs to.
#[derive(Serialize)]
struct TaggedRow {
    run: String,
    epsilon: f64,
    value: f64,
    numerator: f64,
    denominator: f64,
}

fn tagged<'a>(run: &str, report: &'a SweepReport) -> impl Iterator<Item = TaggedRow> + 'a {
    let run = run.to_string();
    report.rows.iter().map(move |r| TaggedRow {
        run: run.clone(),
        epsilon: r.epsilon,
        value: r.value,
        numerator: r.numerator,
        denominator: r.denominator,
    })
}

fn theta(cfg: &RunConfig) -> f64 {
    cfg.sweep.theta.expect("resolved config carries θ")
}

fn quad_selftest(cfg: &RunConfig) -> Result<Outcome> {
    #[derive(Serialize)]
    struct Row {
        beta: f64,
        s1: f64,
        s2: f64,
        numeric: f64,
        exact: f64,
        rel_error: f64,
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let opts = QuadOptions::with_rel_tol(cfg.quad.rel_tol);
    let mut rows = Vec::with_capacity(cfg.quad.cases);
    for _ in 0..cfg.quad.cases {
        // Both signs of β: for β < 0 the lower limit has to stay positive.
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
        let numeric = integrate_singular(
            &WeightedIntegrand::new(-1.0, beta + 1.0, 1.0),
            s1,
            s2,
            &opts,
        )?
        .value;
        let exact = x_power_antiderivative(beta, s1, s2)?;
        rows.push(Row {
            beta,
            s1,
            s2,
            numeric,
            exact,
            rel_error: ((numeric - exact) / exact).abs(),
        });
    }
    let worst = rows.iter().map(|r| r.rel_error).fold(0.0, f64::max);
    let passed = worst <= cfg.thresholds.quad_rel_error;
    Ok(Outcome::new(
        passed,
        format!(
            "{} oracle cases, worst relative error {worst:.2e}",
            rows.len()
        ),
        json!({ "cases": rows.len(), "worst_rel_error": worst }),
    )
    .with_csv("cases", csv_bytes(&rows)?))
}

fn condition_c(cfg: &RunConfig) -> Result<Outcome> {
    #[derive(Serialize)]
    struct Row {
        x: String,
        d: f64,
        defect: f64,
        value: f64,
        on_ridge: bool,
    }
    let params = cfg.hardy_params()?;
    let geom = cfg.geometry();
    let spec = SamplerSpec {
        count: cfg.sampler.count,
        seed: cfg.seed,
        d_min: cfg.sampler.d_min,
        d_max: cfg.sampler.d_max,
        extent: cfg.sampler.extent,
    };
    let points = sample_domain(&geom, &spec)?;
    let report = check_condition_c(&geom, &params, &points)?;
    let rows: Vec<Row> = report
        .samples
        .iter()
        .map(|s| Row {
            x: s.x
                .iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(" "),
            d: s.d,
            defect: s.defect,
            value: s.value,
            on_ridge: s.on_ridge,
        })
        .collect();
    // The command reports the state of the geometry; only an inconclusive
    // sample set counts as a failure.
    let mut outcome = Outcome::new(
        report.verdict != Verdict::Inconclusive,
        format!(
            "worst signed value {:.3e}, max |dΔd + 1 - k| {:.3e}, ridge fraction {:.3}",
            report.worst_value, report.max_abs_defect, report.ridge_fraction
        ),
        json!({
            "kind": report.kind,
            "verdict": report.verdict,
            "worst_value": report.worst_value,
            "max_abs_defect": report.max_abs_defect,
            "defect_within_tolerance": report.max_abs_defect < cfg.thresholds.condition_defect,
            "ridge_fraction": report.ridge_fraction,
            "interior_fraction": report.interior_fraction,
            "caveats": report.caveats,
        }),
    )
    .with_csv("samples", csv_bytes(&rows)?);
    outcome.label = report.verdict.to_string();
    Ok(outcome)
}

fn verify_constant(cfg: &RunConfig) -> Result<Outcome> {
    let params = cfg.hardy_params()?;
    let gamma = cfg.sweep.gamma.first().copied().unwrap_or(1.0);
    let mut reports = optimality_sweep_a(
        &params,
        &cfg.measure(),
        theta(cfg),
        gamma,
        &cfg.sweep_settings(),
    )?;
    let target = params.sharp_constant();
    let limit = reports.constant.fitted_limit.expect("fitted").value;
    let rel = ((limit - target) / target).abs();
    let passed = rel <= cfg.thresholds.constant_rel;
    reports
        .constant
        .judge(target, cfg.thresholds.constant_rel, passed);
    let rows: Vec<TaggedRow> = tagged("sharp_constant", &reports.constant).collect();
    Ok(Outcome::new(
        passed,
        format!("fitted_limit {limit:.6} vs |H|^p = {target:.6} (relative {rel:.2e})"),
        json!({ "fitted_limit": limit, "target": target, "relative_error": rel, "report": reports.constant }),
    )
    .with_csv("sweep", csv_bytes(&rows)?))
}

fn verify_exponent(cfg: &RunConfig) -> Result<Outcome> {
    let params = cfg.hardy_params()?;
    let mut rows = Vec::new();
    let mut results = Vec::new();
    let mut passed = true;
    let mut detail = Vec::new();
    for &gamma in &cfg.sweep.gamma {
        let mut r = optimality_sweep_a(
            &params,
            &cfg.measure(),
            theta(cfg),
            gamma,
            &cfg.sweep_settings(),
        )?
        .exponent;
        let fit = r.fitted_exponent.expect("fitted").value;
        let ok = (fit - (2.0 - gamma)).abs() <= cfg.thresholds.exponent_abs && fit > 0.0;
        r.judge(2.0 - gamma, cfg.thresholds.exponent_abs, ok);
        passed &= ok;
        detail.push(format!(
            "γ = {gamma}: exponent {fit:.4} (target {})",
            2.0 - gamma
        ));
        rows.extend(tagged(&format!("gamma={gamma}"), &r));
        results.push(r);
    }
    Ok(
        Outcome::new(passed, detail.join("; "), json!({ "reports": results }))
            .with_csv("sweep", csv_bytes(&rows)?),
    )
}

fn verify_remainder(cfg: &RunConfig) -> Result<Outcome> {
    let params = cfg.hardy_params()?;
    let thetas = cfg
        .sweep
        .thetas
        .clone()
        .expect("resolved config carries θ values");
    let mut rows = Vec::new();
    let mut results = Vec::new();
    let mut limits = Vec::new();
    let mut passed = true;
    for &theta in &thetas {
        let mut r = optimality_sweep_a(&params, &cfg.measure(), theta, 1.0, &cfg.sweep_settings())?
            .remainder;
        let bound = r.target.expect("target");
        let limit = r.fitted_limit.expect("fitted").value;
        let ok = limit <= bound * (1.0 + cfg.thresholds.remainder_rel);
        r.judge(bound, cfg.thresholds.remainder_rel, ok);
        passed &= ok;
        limits.push(limit);
        rows.extend(tagged(&format!("theta={theta}"), &r));
        results.push(r);
    }
    // The limits must decrease with θ toward (p-1)/(2p)|H|^{p-2}.
    let mut order: Vec<usize> = (0..thetas.len()).collect();
    order.sort_by(|&a, &b| thetas[a].total_cmp(&thetas[b]));
    let monotone = order.windows(2).all(|w| limits[w[0]] <= limits[w[1]]);
    let floor = params.remainder_constant();
    let above_floor = limits.iter().all(|&l| l >= floor * (1.0 - 1e-6));
    let spec = match cfg.certificate.a {
        Some(a) => VectorFieldSpec::new(params, a)?,
        None => VectorFieldSpec::with_default_a(params)?,
    };
    let opts = CertifyOptions {
        nodes: cfg.certificate.nodes,
        horizon: cfg.certificate.horizon,
        working_m: cfg.certificate.working_m,
    };
    let cert = certify(&spec, cfg.certificate.sup_d, &opts)?;
    passed &= monotone && above_floor && cert.verified;
    Ok(Outcome::new(
        passed,
        format!(
            "limits {:?} (floor {floor:.4}), certificate verified = {}, D0 = {:.4}",
            limits.iter().map(|l| format!("{l:.5}")).collect::<Vec<_>>(),
            cert.verified,
            cert.d0
        ),
        json!({
            "limits": limits,
            "monotone_in_theta": monotone,
            "remainder_constant": floor,
            "reports": results,
            "certificate": cert,
        }),
    )
    .with_csv("sweep", csv_bytes(&rows)?))
}

fn verify_pk(cfg: &RunConfig) -> Result<Outcome> {
    let params = cfg.hardy_params()?;
    if !params.is_degenerate() {
        return Err(HardyError::Parameter(format!(
            "verify-pk needs p = k, got p = {}, k = {}",
            params.p, params.k
        )));
    }
    let settings = cfg.sweep_settings();
    let theta = theta(cfg);
    let mut main = optimality_sweep_pk(&params, &cfg.measure(), theta, params.p, &settings)?;
    let probe_power = cfg.sweep.x_power_probe.expect("resolved");
    let probe = optimality_sweep_pk(&params, &cfg.measure(), theta, probe_power, &settings)?;
    let target = params.degenerate_constant();
    let limit = main.fitted_limit.expect("fitted").value;
    let in_band =
        limit >= target * (1.0 - 1e-9) && limit <= target * (1.0 + cfg.thresholds.degenerate_rel);
    main.judge(target, cfg.thresholds.degenerate_rel, in_band);
    let decay = probe.fitted_exponent.expect("fitted").value;
    let passed = in_band && decay > 0.0;
    let rows: Vec<TaggedRow> = tagged("x_power=p", &main)
        .chain(tagged(&format!("x_power={probe_power}"), &probe))
        .collect();
    Ok(Outcome::new(
        passed,
        format!(
            "limit {limit:.5} in [{target:.5}, +{}%]; probe exponent {decay:.3}",
            100.0 * cfg.thresholds.degenerate_rel
        ),
        json!({
            "fitted_limit": limit,
            "target": target,
            "limit_for_theta": degenerate_ratio_limit(params.p, theta),
            "probe_exponent": decay,
            "report": main,
            "probe": probe,
        }),
    )
    .with_csv("sweep", csv_bytes(&rows)?))
}

fn weak_norm(cfg: &RunConfig) -> Result<Outcome> {
    let params = cfg.hardy_params()?;
    let theta = theta(cfg);
    let r = weak_norm_failure(&params, theta, cfg.sweep.window, &cfg.sweep_settings())?;
    let p = params.p;
    let num = r.ratio.numerator_exponent.expect("fitted").value;
    let den = r.ratio.denominator_exponent.expect("fitted").value;
    let ratio = r.ratio.fitted_exponent.expect("fitted").value;
    let tol = cfg.thresholds.slope_abs;
    let passed =
        (num - (1.0 - p * theta)).abs() <= tol && (den + theta).abs() <= tol && ratio > 0.0;
    let rows: Vec<TaggedRow> = tagged("ratio", &r.ratio)
        .chain(tagged("homogeneous", &r.homogeneous))
        .collect();
    Ok(Outcome::new(
        passed,
        format!(
            "slopes: numerator {num:.4} (target {:.4}), denominator {den:.4} (target {:.4}), ratio {ratio:.4}",
            1.0 - p * theta,
            -theta
        ),
        json!({ "window": r.window, "theta": theta, "ratio": r.ratio, "homogeneous": r.homogeneous }),
    )
    .with_csv("sweep", csv_bytes(&rows)?))
}

fn hp(cfg: &RunConfig) -> Result<Outcome> {
    let params = cfg.hardy_params()?;
    let (q, beta) = (cfg.sweep.q, cfg.sweep.beta);
    let out = hp_optimality(
        &params,
        &cfg.measure(),
        q,
        beta,
        theta(cfg),
        &cfg.sweep_settings(),
        cfg.thresholds.hp_margin,
    )?;
    let critical = 1.0 + q / params.p;
    let expect_failure = beta < critical;
    let fit = out.report.fitted_exponent.expect("fitted").value;
    let passed = out.failure == expect_failure;
    let rows: Vec<TaggedRow> = tagged("probe", &out.report).collect();
    Ok(Outcome::new(
        passed,
        format!(
            "β = {beta}, critical {critical}: exponent {fit:.4} (predicted {:.4}), {}",
            out.predicted_exponent,
            if out.failure {
                "inequality fails"
            } else {
                "no failure detected"
            }
        ),
        json!({
            "fitted_exponent": fit,
            "predicted_exponent": out.predicted_exponent,
            "failure": out.failure,
            "expected_failure": expect_failure,
            "critical_beta": critical,
            "report": out.report,
        }),
    )
    .with_csv("sweep", csv_bytes(&rows)?))
}

fn sobolev(cfg: &RunConfig) -> Result<Outcome> {
    #[derive(Serialize)]
    struct Row {
        check: String,
        profile: usize,
        lhs: f64,
        rhs: f64,
        ratio: f64,
    }
    let params = cfg.hardy_params()?;
    let measure = cfg.measure();
    let (p, n) = (params.p, params.n as f64);
    if p >= n {
        return Err(HardyError::Parameter(format!(
            "sobolev-check needs 1 < p < N, got p = {p}, N = {n}"
        )));
    }
    let q = cfg.sobolev.q.expect("resolved");
    let critical = n * p / (n - p);
    if !(q > p && q <= critical) {
        return Err(HardyError::Parameter(format!(
            "needs p < q <= Np/(N-p) = {critical}, got q = {q}"
        )));
    }
    let support = cfg.sobolev.support.min(params.d);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let profiles: Vec<_> = (0..cfg.sobolev.profiles)
        .map(|_| random_bump_sum(&mut rng, support))
        .collect();
    let refs: Vec<&dyn RadialFunction> =
        profiles.iter().map(|u| u as &dyn RadialFunction).collect();
    let opts = QuadOptions::with_rel_tol(1e-9);
    let mut rows = Vec::new();
    let mut infima = serde_json::Map::new();
    let mut passed = true;
    // I[u] against (∫|u|^q d^{-q-N+Nq/p} X^s)^{p/q}: s = 1 + q/p below the
    // critical exponent (point case), s = 2q/p up to it.
    let mut powers = vec![("x_power_2q_over_p", 2.0 * q / p)];
    if q < critical && params.k == params.n {
        powers.insert(0, ("x_power_1_plus_q_over_p", 1.0 + q / p));
    }
    for (name, s) in powers {
        let mut inf = f64::INFINITY;
        for (i, u) in refs.iter().enumerate() {
            let lhs = hardy_functional(&params, *u, &measure, &opts)?.value;
            let norm =
                weighted_integral(&params, *u, &measure, q, -q - n + n * q / p, s, &opts)?.value;
            let rhs = norm.powf(p / q);
            let ratio = lhs / rhs;
            inf = inf.min(ratio);
            rows.push(Row {
                check: name.into(),
                profile: i,
                lhs,
                rhs,
                ratio,
            });
        }
        passed &= inf > 0.0 && inf.is_finite();
        infima.insert(name.into(), json!(inf));
    }
    let settings = AppendixSettings {
        alpha: cfg.sobolev.alpha,
        q_hardy: cfg.sobolev.q_hardy.expect("resolved"),
        q_sobolev: q,
    };
    let unit: Vec<_> = profiles.iter().filter(|u| u.support().1 < 1.0).collect();
    let unit_refs: Vec<&dyn RadialFunction> =
        unit.iter().map(|u| *u as &dyn RadialFunction).collect();
    let tables: Vec<SpotCheckTable> =
        appendix_spot_checks(&params, &measure, &settings, &unit_refs, &opts)?;
    for t in &tables {
        let name = serde_json::to_value(t.lemma)?
            .as_str()
            .unwrap_or("appendix")
            .to_string();
        for r in &t.rows {
            rows.push(Row {
                check: name.clone(),
                profile: r.profile,
                lhs: r.lhs,
                rhs: r.rhs,
                ratio: r.ratio,
            });
        }
        passed &= t.passed;
        infima.insert(name, json!(t.infimum));
    }
    Ok(Outcome::new(
        passed,
        format!(
            "empirical constants {}",
            serde_json::Value::Object(infima.clone())
        ),
        json!({ "q": q, "profiles": profiles.len(), "empirical_constants": infima }),
    )
    .with_csv("ratios", csv_bytes(&rows)?))
}

fn solve(prob: &RayleighProblem, cfg: &RunConfig) -> Result<SolverResult> {
    minimize(
        prob,
        &SolverOptions {
            iterations: cfg.solver.iterations,
            tolerance: cfg.solver.tolerance,
            seed: cfg.seed,
        },
    )
}

fn rayleigh(cfg: &RunConfig) -> Result<Outcome> {
    let params = cfg.hardy_params()?;
    let kind = cfg.solver.kind.expect("resolved");
    let s = cfg.solver;
    let build = |nodes: usize| match kind {
        QuotientKind::Plain => RayleighProblem::plain(params, s.r_min, nodes),
        _ => RayleighProblem::new(params, kind, s.t_lo, s.t_hi, nodes),
    };
    let coarse = build(s.nodes)?;
    let first = solve(&coarse, cfg)?;
    let (prob, result, coarse_value) = if s.refine {
        let fine = build(2 * s.nodes)?;
        let r = solve(&fine, cfg)?;
        (fine, r, Some(first.value))
    } else {
        (coarse, first, None)
    };
    let reference = prob.reference_constant();
    let th = cfg.thresholds;
    let (lower, upper) = match kind {
        QuotientKind::Improved => (
            reference - th.solver_improved_floor,
            reference * (1.0 + th.solver_improved_rel),
        ),
        _ => (
            reference - th.solver_floor,
            reference * (1.0 + th.solver_plain_rel),
        ),
    };
    let v = result.value;
    let passed = result.converged && v >= lower && v <= upper;
    let mut minimizer = Vec::new();
    result.minimizer.write_csv(&mut minimizer)?;
    let mut history = Vec::new();
    result.write_history_csv(&mut history)?;
    Ok(Outcome::new(
        passed,
        format!(
            "value {v:.6} in [{lower:.6}, {upper:.6}]? converged = {} after {} iterations",
            result.converged, result.iterations
        ),
        json!({
            "kind": kind,
            "value": v,
            "coarse_value": coarse_value,
            "reference": reference,
            "bounds": [lower, upper],
            "converged": result.converged,
            "iterations": result.iterations,
            "nodes": prob.nodes,
            "t_range": prob.t_range,
        }),
    )
    .with_csv("minimizer", minimizer)
    .with_csv("history", history))
}

/// Distinguishes configuration and regime errors (exit 2) from numerical
/// failures of an otherwise valid run (exit 1).
pub fn is_configuration_error(err: &HardyError) -> bool {
    matches!(
        err,
        HardyError::Parameter(_)
            | HardyError::Precondition(_)
            | HardyError::Domain(_)
            | HardyError::Io(_)
    )
}
