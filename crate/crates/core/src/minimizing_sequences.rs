//! The test families `U_ε = φ(d) d^{-H+ε} X^{-θ}(d/D)` whose Rayleigh
//! ratios approach the sharp constants, the scalar integrals
//! `J_β(ε) = ∫ φ^p d^{-k+εp} X^{-β}(d/D) dx`, and the ε-sweeps built on them.
//!
//! Note that `R_γ[U_ε] = J_{pθ-γ}(ε)`, so every remainder of the family is a
//! `J` integral; both are computed independently and must agree.
//!
//! The sweeps are meant to be run far into the asymptotic regime. Ratios
//! such as `I[U_ε]/R_2[U_ε]` converge like `ε^{pθ-1}`, which is very slow
//! for `θ` near `1/p`, so limits are fitted by regressing the numerator on
//! the denominator (bounded additive terms do not bias the slope) and
//! ε-lists reaching `1e-100` are supported: everything is evaluated in
//! `t = ln(D/r)` with log-scaled jets.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{parameter, Result};
use crate::fit::{SweepReport, SweepRow};
use crate::functionals::{
    gradient_term, hardy_functional, remainder_term, weak_lq_norm, weighted_gradient_integral,
};
use crate::params::HardyParams;
use crate::profile::{Jet, RadialFunction};
use crate::quadrature::{
    integrate_singular, Estimate, QuadOptions, RadialMeasure, WeightedIntegrand,
};

/// The `C²` cut-off: 1 on `[0, δ/2]`, 0 on `[δ, ∞)`, a quintic smoothstep
/// in between.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cutoff {
    pub delta: f64,
}

impl Cutoff {
    /// `(s, 1 - s)` with `s = 2r/δ - 1`; the second is formed from
    /// `ln r - ln δ` so it keeps full relative accuracy as `r → δ`.
    fn coordinates(&self, log_r: f64) -> (f64, f64) {
        let w = (-2.0 * (log_r - self.delta.ln()).exp_m1()).clamp(0.0, 1.0);
        let s = (2.0 * log_r.exp() / self.delta - 1.0).clamp(0.0, 1.0);
        (s, w)
    }

    pub fn value(&self, r: f64) -> f64 {
        self.value_log(r.ln())
    }

    pub fn derivative(&self, r: f64) -> f64 {
        self.derivative_log(r.ln())
    }

    fn value_log(&self, log_r: f64) -> f64 {
        let (s, w) = self.coordinates(log_r);
        if s <= 0.0 {
            return 1.0;
        }
        // 1 - S(s) = S(1 - s) for the smoothstep S.
        w * w * w * (10.0 - 15.0 * w + 6.0 * w * w)
    }

    fn derivative_log(&self, log_r: f64) -> f64 {
        let (s, w) = self.coordinates(log_r);
        -60.0 * s * s * w * w / self.delta
    }
}

/// Admissible windows of `θ` for the weak-norm construction; the literal
/// window `(1/(p-1), 1/p)` is empty for every `p > 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeakNormWindow {
    /// `1/(p-1) < θ < 1/p`, as stated.
    Literal,
    /// `1/p < θ < min(2/p, 1/(p-1))`: `U_ε ∈ W^{1,p}` with
    /// `I[U_ε] ~ ε^{1-pθ}` while the weak norm grows like `ε^{-θ}` slower
    /// than `I` blows up.
    Swapped,
}

impl WeakNormWindow {
    pub fn bounds(&self, p: f64) -> (f64, f64) {
        match self {
            WeakNormWindow::Literal => (1.0 / (p - 1.0), 1.0 / p),
            WeakNormWindow::Swapped => (1.0 / p, (2.0 / p).min(1.0 / (p - 1.0))),
        }
    }
}

/// The constraint on `θ` an experiment needs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `1/p < θ < 2/p`.
    SharpConstant,
    /// `p = k` and `θ > (p-1)/p`.
    Degenerate,
    WeakNorm(WeakNormWindow),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinSeqParams {
    pub params: HardyParams,
    pub eps: f64,
    pub theta: f64,
    /// Cut-off radius.
    pub delta: f64,
}

impl MinSeqParams {
    pub fn new(params: HardyParams, eps: f64, theta: f64, delta: f64) -> Self {
        Self {
            params,
            eps,
            theta,
            delta,
        }
    }

    pub fn cutoff(&self) -> Cutoff {
        Cutoff { delta: self.delta }
    }

    pub fn check(&self, regime: Regime) -> Result<()> {
        self.params.validate()?;
        if !(self.eps > 0.0) {
            return parameter(format!("ε must be positive, got {}", self.eps));
        }
        if !(self.delta > 0.0 && self.delta < self.params.d) {
            return parameter(format!(
                "cut-off radius δ = {} must lie in (0, D) with D = {}",
                self.delta, self.params.d
            ));
        }
        check_theta(&self.params, self.theta, regime)
    }
}

/// Validates `θ` for a regime, naming the violated bound.
pub fn check_theta(params: &HardyParams, theta: f64, regime: Regime) -> Result<()> {
    let p = params.p;
    match regime {
        Regime::SharpConstant => {
            if !(theta > 1.0 / p && theta < 2.0 / p) {
                return parameter(format!(
                    "θ = {theta} violates 1/p < θ < 2/p = ({}, {})",
                    1.0 / p,
                    2.0 / p
                ));
            }
        }
        Regime::Degenerate => {
            if !params.is_degenerate() {
                return parameter(format!(
                    "this family needs p = k (p = {p}, k = {})",
                    params.k
                ));
            }
            if !(theta > (p - 1.0) / p) {
                return parameter(format!(
                    "θ = {theta} violates θ > (p-1)/p = {}",
                    (p - 1.0) / p
                ));
            }
        }
        Regime::WeakNorm(window) => {
            if !(p < 2.0) {
                return parameter(format!("the weak-norm family needs 1 < p < 2, got p = {p}"));
            }
            if !((params.n as f64) > p) {
                return parameter(format!(
                    "the weak-norm family needs N > p (N = {})",
                    params.n
                ));
            }
            let (lo, hi) = window.bounds(p);
            if !(lo < hi) {
                return parameter(format!(
                    "θ-window {window:?} = ({lo}, {hi}) is empty for p = {p}"
                ));
            }
            if !(theta > lo && theta < hi) {
                return parameter(format!(
                    "θ = {theta} violates {lo} < θ < {hi} ({window:?} window)"
                ));
            }
        }
    }
    Ok(())
}

/// `U_ε(r) = φ(r) r^{-H+ε} X^{-θ}(r/D)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UEpsilon {
    msp: MinSeqParams,
}

impl UEpsilon {
    pub fn new(msp: MinSeqParams, regime: Regime) -> Result<Self> {
        msp.check(regime)?;
        Ok(Self { msp })
    }

    /// Skips the `θ`-regime check (the profile itself is defined for any θ).
    pub fn unchecked(msp: MinSeqParams) -> Self {
        Self { msp }
    }

    pub fn params(&self) -> &MinSeqParams {
        &self.msp
    }

    /// `U_ε(r)` in ordinary floating point.
    pub fn value(&self, r: f64) -> f64 {
        let j = self.jet(r.ln());
        j.ln_scale.exp() * j.value
    }

    /// `U_ε'(r)`.
    pub fn derivative(&self, r: f64) -> f64 {
        let j = self.jet(r.ln());
        j.ln_scale.exp() * j.slope / r
    }
}

impl RadialFunction for UEpsilon {
    fn support(&self) -> (f64, f64) {
        (0.0, self.msp.delta)
    }

    fn jet(&self, log_r: f64) -> Jet {
        let h = self.msp.params.h();
        let v = self.substituted_jet(h, log_r);
        Jet {
            ln_scale: v.ln_scale - h * log_r,
            value: v.value,
            slope: -(h * v.value + v.slope),
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        vec![0.5 * self.msp.delta]
    }

    fn substituted_jet(&self, h: f64, log_r: f64) -> Jet {
        // v = r^{h} U_ε = r^{h-H+ε} t^θ φ with t = ln(D/r).
        let MinSeqParams {
            params, eps, theta, ..
        } = self.msp;
        let shift = h - params.h() + eps;
        let t = params.d.ln() - log_r;
        let cut = self.msp.cutoff();
        let phi = cut.value_log(log_r);
        let phi_t = -log_r.exp() * cut.derivative_log(log_r);
        Jet {
            ln_scale: shift * log_r + theta * t.ln(),
            value: phi,
            slope: phi * (theta / t - shift) + phi_t,
        }
    }
}

/// `J_β(ε)` by direct singular quadrature of `φ^p r^{-1+εp} X^{-β}(r/D)`.
pub fn j_beta(
    msp: &MinSeqParams,
    beta: f64,
    measure: &RadialMeasure,
    opts: &QuadOptions,
) -> Result<Estimate> {
    msp.params.validate()?;
    if !(msp.eps > 0.0) {
        return parameter(format!("J_β needs ε > 0, got {}", msp.eps));
    }
    let cut = msp.cutoff();
    let p = msp.params.p;
    let f = WeightedIntegrand::new(-1.0 + msp.eps * p, -beta, msp.params.d)
        .with_factor(move |r| cut.value(r).powf(p))
        .with_breakpoints(vec![0.5 * msp.delta]);
    let est = integrate_singular(&f, 0.0, msp.delta, opts)?;
    let c = measure.factor();
    Ok(Estimate {
        value: c * est.value,
        error: c * est.error,
        evaluations: est.evaluations,
    })
}

/// ε-list, cut-off radius and quadrature tolerances for a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSettings {
    pub eps_list: Vec<f64>,
    pub delta: f64,
    pub rel_tol: f64,
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self {
            eps_list: vec![1e-1, 5e-2, 2e-2, 1e-2, 5e-3, 2e-3, 1e-3],
            delta: 1.0,
            rel_tol: 1e-10,
        }
    }
}

impl SweepSettings {
    /// `count` values log-spaced from `10^hi_exp` down to `10^lo_exp`.
    pub fn log_spaced(hi_exp: f64, lo_exp: f64, count: usize) -> Vec<f64> {
        (0..count)
            .map(|i| 10f64.powf(hi_exp + (lo_exp - hi_exp) * i as f64 / (count - 1) as f64))
            .collect()
    }

    fn validate(&self) -> Result<()> {
        if self.eps_list.len() < 3 || self.eps_list.iter().any(|&e| !(e > 0.0)) {
            return parameter("a sweep needs at least three positive ε values");
        }
        Ok(())
    }

    fn opts(&self) -> QuadOptions {
        QuadOptions::with_rel_tol(self.rel_tol)
    }
}

fn sweep_rows<F>(settings: &SweepSettings, f: F) -> Result<Vec<Vec<f64>>>
where
    F: Fn(f64) -> Result<Vec<f64>> + Sync,
{
    settings.eps_list.par_iter().map(|&e| f(e)).collect()
}

fn report_from(name: &str, eps: &[f64], num: &[f64], den: &[f64]) -> SweepReport {
    let rows = eps
        .iter()
        .zip(num.iter().zip(den))
        .map(|(&epsilon, (&n, &d))| SweepRow {
            epsilon,
            value: n / d,
            numerator: n,
            denominator: d,
        })
        .collect();
    SweepReport::new(name, rows)
}

/// The three reports of the sharp-constant experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SharpConstantReports {
    /// `∫|∇U_ε|^p / R_0[U_ε] → |H|^p`.
    pub constant: SweepReport,
    /// `I[U_ε] / R_γ[U_ε] ~ ε^{2-γ}` for `γ < 2`.
    pub exponent: SweepReport,
    /// `I[U_ε] / R_2[U_ε] → θ(p-1)/2 |H|^{p-2}`.
    pub remainder: SweepReport,
}

pub fn optimality_sweep_a(
    params: &HardyParams,
    measure: &RadialMeasure,
    theta: f64,
    gamma: f64,
    settings: &SweepSettings,
) -> Result<SharpConstantReports> {
    settings.validate()?;
    if params.is_degenerate() {
        return parameter("the sharp-constant sweep needs p != k; use the p = k sweep");
    }
    if !(0.0..2.0).contains(&gamma) {
        return parameter(format!("the exponent probe needs 0 <= γ < 2, got {gamma}"));
    }
    let opts = settings.opts();
    let base = MinSeqParams::new(*params, settings.eps_list[0], theta, settings.delta);
    base.check(Regime::SharpConstant)?;
    let values = sweep_rows(settings, |eps| {
        let u = UEpsilon::new(MinSeqParams { eps, ..base }, Regime::SharpConstant)?;
        Ok(vec![
            gradient_term(params, &u, measure, &opts)?.value,
            remainder_term(params, &u, measure, 0.0, &opts)?.value,
            hardy_functional(params, &u, measure, &opts)?.value,
            remainder_term(params, &u, measure, gamma, &opts)?.value,
            remainder_term(params, &u, measure, 2.0, &opts)?.value,
        ])
    })?;
    let col = |i: usize| values.iter().map(|v| v[i]).collect::<Vec<_>>();
    let eps = &settings.eps_list;
    let mut constant = report_from("sharp_constant", eps, &col(0), &col(1));
    constant.fit_limit()?;
    constant.target = Some(params.sharp_constant());
    let mut exponent = report_from("remainder_exponent", eps, &col(2), &col(3));
    exponent.fit_exponent()?;
    exponent.fit_component_exponents()?;
    exponent.target = Some(2.0 - gamma);
    exponent.notes.push(format!("gamma = {gamma}"));
    let mut remainder = report_from("remainder_constant", eps, &col(2), &col(4));
    remainder.fit_limit()?;
    remainder.target = Some(theta * (params.p - 1.0) / 2.0 * params.h().abs().powf(params.p - 2.0));
    remainder.notes.push(format!(
        "upper bound theta(p-1)/2 |H|^(p-2); sharp constant (p-1)/(2p) |H|^(p-2) = {}",
        params.remainder_constant()
    ));
    Ok(SharpConstantReports {
        constant,
        exponent,
        remainder,
    })
}

/// Limit of the `p = k` ratio for given `θ`: `p^{-p} E|pθ - s|^p` with
/// `s ~ Gamma(pθ - p + 1)`.
pub fn degenerate_ratio_limit(p: f64, theta: f64) -> f64 {
    use crate::quadrature::{integrate_adaptive, integrate_to_infinity};
    let alpha = p * theta - p + 1.0;
    let mode = p * theta;
    let opts = QuadOptions::with_rel_tol(1e-12);
    // On (0, 1) substitute s = u^{1/α}, so that s^{α-1} ds = du/α.
    let near = |g: &dyn Fn(f64) -> f64| {
        integrate_adaptive(
            |u: f64| g(u.powf(1.0 / alpha)) / alpha,
            &[0.0, 0.5, 1.0],
            &opts,
        )
        .map_or(f64::NAN, |e| e.value)
    };
    let far = |g: &dyn Fn(f64) -> f64| {
        let split = (mode - 1.0).max(0.5);
        integrate_to_infinity(
            |x: f64| {
                let s = 1.0 + x;
                let w = ((alpha - 1.0) * s.ln() - s).exp();
                if w == 0.0 {
                    0.0
                } else {
                    w * g(s)
                }
            },
            &[0.0, split, split + 1.0],
            &opts,
        )
        .map_or(f64::NAN, |e| e.value)
    };
    let moment = |s: f64| (-s).exp() * (mode - s).abs().powf(p);
    let weight = |s: f64| (-s).exp();
    let far_moment = |s: f64| (mode - s).abs().powf(p);
    let far_weight = |_: f64| 1.0;
    (near(&moment) + far(&far_moment)) / (near(&weight) + far(&far_weight)) / p.powf(p)
}

/// `∫|∇U_ε|^p / ∫ U_ε^p d^{-p} X^{s}` for `p = k`; with `s = p` the limit
/// tends to `((p-1)/p)^p` as `θ ↓ (p-1)/p`, and for `s < p` it decays.
pub fn optimality_sweep_pk(
    params: &HardyParams,
    measure: &RadialMeasure,
    theta: f64,
    x_power: f64,
    settings: &SweepSettings,
) -> Result<SweepReport> {
    settings.validate()?;
    let opts = settings.opts();
    let base = MinSeqParams::new(*params, settings.eps_list[0], theta, settings.delta);
    base.check(Regime::Degenerate)?;
    let values = sweep_rows(settings, |eps| {
        let u = UEpsilon::new(MinSeqParams { eps, ..base }, Regime::Degenerate)?;
        Ok(vec![
            gradient_term(params, &u, measure, &opts)?.value,
            remainder_term(params, &u, measure, x_power, &opts)?.value,
        ])
    })?;
    let col = |i: usize| values.iter().map(|v| v[i]).collect::<Vec<_>>();
    let name = if x_power == params.p {
        "degenerate_constant"
    } else {
        "degenerate_power_probe"
    };
    let mut report = report_from(name, &settings.eps_list, &col(0), &col(1));
    report.fit_exponent()?;
    report.fit_component_exponents()?;
    if x_power == params.p {
        report.fit_limit()?;
        report.target = Some(params.degenerate_constant());
        report.notes.push(format!(
            "limit for this theta: {}",
            degenerate_ratio_limit(params.p, theta)
        ));
    } else {
        report
            .notes
            .push(format!("X power {x_power} below p: ratio should decay"));
    }
    Ok(report)
}

/// Reports of the weak-norm experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeakNormReports {
    pub window: WeakNormWindow,
    /// `I[U_ε] / ‖U_ε‖_{L^{q,∞}}`, exponent `1 - pθ + θ`.
    pub ratio: SweepReport,
    /// `I[U_ε] / ‖U_ε‖^p_{L^{q,∞}}`, exponent `1`.
    pub homogeneous: SweepReport,
}

pub fn weak_norm_failure(
    params: &HardyParams,
    theta: f64,
    window: WeakNormWindow,
    settings: &SweepSettings,
) -> Result<WeakNormReports> {
    settings.validate()?;
    check_theta(params, theta, Regime::WeakNorm(window))?;
    if params.k != params.n {
        return parameter("the weak-norm experiment uses the point geometry (k = N)");
    }
    let opts = settings.opts();
    let measure = RadialMeasure::Sphere { dim: params.n };
    let n = params.n as f64;
    let q = n * params.p / (n - params.p);
    let base = MinSeqParams::new(*params, settings.eps_list[0], theta, settings.delta);
    base.check(Regime::WeakNorm(window))?;
    let values = sweep_rows(settings, |eps| {
        let u = UEpsilon::new(MinSeqParams { eps, ..base }, Regime::WeakNorm(window))?;
        Ok(vec![
            hardy_functional(params, &u, &measure, &opts)?.value,
            weak_lq_norm(params, &u, q, &opts)?.value,
        ])
    })?;
    let num: Vec<f64> = values.iter().map(|v| v[0]).collect();
    let den: Vec<f64> = values.iter().map(|v| v[1]).collect();
    let den_p: Vec<f64> = den.iter().map(|d| d.powf(params.p)).collect();
    let p = params.p;
    let mut ratio = report_from("weak_norm_ratio", &settings.eps_list, &num, &den);
    ratio.fit_exponent()?;
    ratio.fit_component_exponents()?;
    ratio.target = Some(1.0 - p * theta + theta);
    ratio.notes.push(format!(
        "q = Np/(N-p) = {q}; predicted slopes: numerator {}, denominator {}",
        1.0 - p * theta,
        -theta
    ));
    let mut homogeneous = report_from(
        "weak_norm_ratio_homogeneous",
        &settings.eps_list,
        &num,
        &den_p,
    );
    homogeneous.fit_exponent()?;
    homogeneous.fit_component_exponents()?;
    homogeneous.target = Some(1.0);
    Ok(WeakNormReports {
        window,
        ratio,
        homogeneous,
    })
}

/// Outcome of the Hardy-Sobolev-type optimality probe.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HpOutcome {
    pub report: SweepReport,
    /// `(1 - pθ) - (p/q) min(0, β - θq - 1)`.
    pub predicted_exponent: f64,
    /// The ratio tends to zero (significantly positive fitted exponent), so
    /// no inequality of this shape can hold.
    pub failure: bool,
}

/// `I[U_ε] / (∫|∇U_ε|^q d^{k(q/p-1)} X^β dx)^{p/q}` along the sweep.
pub fn hp_optimality(
    params: &HardyParams,
    measure: &RadialMeasure,
    q: f64,
    beta: f64,
    theta: f64,
    settings: &SweepSettings,
    margin: f64,
) -> Result<HpOutcome> {
    settings.validate()?;
    let p = params.p;
    if !(q >= 1.0 && q < p) {
        return parameter(format!("the probe needs 1 <= q < p, got q = {q}, p = {p}"));
    }
    let opts = settings.opts();
    let base = MinSeqParams::new(*params, settings.eps_list[0], theta, settings.delta);
    base.check(Regime::SharpConstant)?;
    let kf = params.kf();
    let values = sweep_rows(settings, |eps| {
        let u = UEpsilon::new(MinSeqParams { eps, ..base }, Regime::SharpConstant)?;
        let i = hardy_functional(params, &u, measure, &opts)?.value;
        let g =
            weighted_gradient_integral(params, &u, measure, q, kf * (q / p - 1.0), beta, &opts)?
                .value;
        Ok(vec![i, g.powf(p / q)])
    })?;
    let num: Vec<f64> = values.iter().map(|v| v[0]).collect();
    let den: Vec<f64> = values.iter().map(|v| v[1]).collect();
    let mut report = report_from("hardy_sobolev_probe", &settings.eps_list, &num, &den);
    let fit = report.fit_exponent()?;
    report.fit_component_exponents()?;
    let predicted = (1.0 - p * theta) - (p / q) * (beta - theta * q - 1.0).min(0.0);
    report.target = Some(predicted);
    report.tolerance = Some(margin);
    let failure = fit.value > margin;
    report.notes.push(format!(
        "q = {q}, beta = {beta}, critical beta 1 + q/p = {}; {}",
        1.0 + q / p,
        if failure {
            "ratio tends to zero: inequality fails"
        } else {
            "no contradiction"
        }
    ));
    Ok(HpOutcome {
        report,
        predicted_exponent: predicted,
        failure,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn msp(eps: f64, theta: f64) -> MinSeqParams {
        let hp = HardyParams::new(2.0, 3, 3, std::f64::consts::E).unwrap();
        MinSeqParams::new(hp, eps, theta, 1.0)
    }

    #[test]
    fn cutoff_shape() {
        let c = Cutoff { delta: 1.0 };
        assert_eq!(c.value(0.3), 1.0);
        assert_eq!(c.value(1.2), 0.0);
        assert!((c.value(0.75) - 0.5).abs() < 1e-15);
        let h = 1e-6;
        for &r in &[0.55, 0.7, 0.9] {
            let fd = (c.value(r + h) - c.value(r - h)) / (2.0 * h);
            assert!((fd - c.derivative(r)).abs() < 1e-8);
        }
    }

    #[test]
    fn closed_form_region() {
        let m = msp(0.01, 0.6);
        let u = UEpsilon::new(m, Regime::SharpConstant).unwrap();
        let r: f64 = 0.25;
        let x = -1.0 / (r / m.params.d).ln();
        let exact = r.powf(-0.5 + 0.01) * x.powf(-0.6);
        assert!((u.value(r) - exact).abs() < 1e-13 * exact);
        assert_eq!(u.value(1.0), 0.0);
        assert_eq!(u.value(1.5), 0.0);
        let h = 1e-6;
        let f = |r: f64| r.powf(-0.49) * (-1.0 / (r / m.params.d).ln()).powf(-0.6);
        let fd = (f(r + h) - f(r - h)) / (2.0 * h);
        assert!((u.derivative(r) - fd).abs() < 1e-8 * fd.abs());
    }

    #[test]
    fn regimes_name_their_bounds() {
        let m = msp(0.01, 1.2);
        let err = UEpsilon::new(m, Regime::SharpConstant)
            .unwrap_err()
            .to_string();
        assert!(err.contains("2/p"), "{err}");
        let hp = HardyParams::new(1.5, 3, 3, 3.0).unwrap();
        let e = check_theta(&hp, 2.2, Regime::WeakNorm(WeakNormWindow::Literal)).unwrap_err();
        assert!(e.to_string().contains("empty"));
        let hp12 = HardyParams::new(1.2, 3, 3, 3.0).unwrap();
        assert!(check_theta(&hp12, 0.8, Regime::WeakNorm(WeakNormWindow::Literal)).is_err());
        assert!(check_theta(&hp, 1.25, Regime::WeakNorm(WeakNormWindow::Swapped)).is_ok());
        assert!(check_theta(&hp, 0.5, Regime::Degenerate).is_err());
    }

    #[test]
    fn remainders_agree_with_j_integrals() {
        let m = msp(0.01, 0.6);
        let u = UEpsilon::new(m, Regime::SharpConstant).unwrap();
        let meas = RadialMeasure::Sphere { dim: 3 };
        let o = QuadOptions::with_rel_tol(1e-11);
        for &gamma in &[0.0, 1.0, 2.0] {
            let r = remainder_term(&m.params, &u, &meas, gamma, &o)
                .unwrap()
                .value;
            let j = j_beta(&m, 2.0 * 0.6 - gamma, &meas, &o).unwrap().value;
            assert!(((r - j) / j).abs() < 1e-8, "γ={gamma}: {r} vs {j}");
        }
    }

    #[test]
    fn degenerate_limit_formula() {
        assert!((degenerate_ratio_limit(2.0, 0.51) - 0.255).abs() < 1e-9);
        assert!((degenerate_ratio_limit(2.0, 0.75) - 0.375).abs() < 1e-9);
    }
}
