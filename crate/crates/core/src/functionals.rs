//! The Hardy deficit `I[u]`, the remainder terms `R_γ[u]`, weighted
//! `L^q` integrals and the weak `L^q` norm, for radial profiles of the
//! distance variable.
//!
//! Integrals run over `t = ln(D/r)` after the substitution `v = r^H u`,
//! which turns
//!
//! * `∫|∇u|^p dx` into `c ∫ |H v + v_t|^p dt`,
//! * `∫|u|^p d^{-p} X^γ dx` into `c ∫ |v|^p t^{-γ} dt`,
//!
//! where `c` is the surface factor of the radial measure. The deficit is
//! evaluated as `c ∫ (|Hv + v_t|^p - |Hv|^p - p|Hv|^{p-2} Hv v_t) dt`: the
//! subtracted term is `H|H|^{p-2} d/dt |v|^p`, which integrates to zero for
//! compactly supported `u`, and what is left is pointwise nonnegative, so
//! no cancellation occurs even when `I[u]` is many orders of magnitude
//! smaller than either of its two integrals.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{domain, parameter, HardyError, Result};
use crate::params::HardyParams;
use crate::profile::RadialFunction;
use crate::quadrature::{
    integrate_adaptive, integrate_to_infinity, Estimate, QuadOptions, RadialMeasure,
};

fn zero() -> Estimate {
    Estimate {
        value: 0.0,
        error: 0.0,
        evaluations: 0,
    }
}

fn check_measure(params: &HardyParams, measure: &RadialMeasure) -> Result<()> {
    params.validate()?;
    if measure.codimension() != params.k {
        return parameter(format!(
            "radial measure has codimension {}, parameters have k = {}",
            measure.codimension(),
            params.k
        ));
    }
    Ok(())
}

/// `factor · ∫ f(t, ln r) dt` over the support of `u` in `t = ln(D/r)`.
fn integrate_support<F>(
    u: &dyn RadialFunction,
    scale: f64,
    factor: f64,
    weighted: bool,
    opts: &QuadOptions,
    f: F,
) -> Result<Estimate>
where
    F: Fn(f64, f64) -> f64,
{
    let (inner, outer) = u.support();
    if !(outer > inner) {
        return Ok(zero());
    }
    let ln_d = scale.ln();
    let t_lo = ln_d - outer.ln();
    if weighted && !(t_lo > 0.0) {
        return domain(format!(
            "support reaches r = {outer}, but X(r/D) needs r < D = {scale}"
        ));
    }
    let mut points: Vec<f64> = vec![t_lo];
    points.extend(
        u.breakpoints()
            .into_iter()
            .filter(|&r| r > inner && r < outer)
            .map(|r| ln_d - r.ln()),
    );
    if inner > 0.0 {
        points.push(ln_d - inner.ln());
    }
    points.sort_by(f64::total_cmp);
    points.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * a.abs().max(1.0));
    let integrand = |t: f64| f(t, ln_d - t);
    let est = if inner > 0.0 {
        integrate_adaptive(integrand, &points, opts)?
    } else {
        integrate_to_infinity(integrand, &points, opts)?
    };
    Ok(Estimate {
        value: factor * est.value,
        error: factor * est.error,
        evaluations: est.evaluations,
    })
}

/// `∫|∇u|^p dx`.
pub fn gradient_term(
    params: &HardyParams,
    u: &dyn RadialFunction,
    measure: &RadialMeasure,
    opts: &QuadOptions,
) -> Result<Estimate> {
    check_measure(params, measure)?;
    let (p, h) = (params.p, params.h());
    integrate_support(u, params.d, measure.factor(), false, opts, |_, log_r| {
        let j = u.substituted_jet(h, log_r);
        let g = (h * j.value + j.slope).abs();
        if g == 0.0 {
            0.0
        } else {
            (p * (j.ln_scale + g.ln())).exp()
        }
    })
}

/// `|1 + x|^p - 1 - p x`, accurate for small `|x|`.
pub fn bregman_kernel(p: f64, x: f64) -> f64 {
    if x.abs() < 0.05 {
        // binomial series from the quadratic term on
        let mut coef = p * (p - 1.0) / 2.0;
        let mut power = x * x;
        let mut sum = 0.0;
        for n in 2..40 {
            let term = coef * power;
            sum += term;
            if term.abs() <= 1e-18 * sum.abs() {
                break;
            }
            coef *= (p - n as f64) / (n as f64 + 1.0);
            power *= x;
        }
        sum
    } else {
        (1.0 + x).abs().powf(p) - 1.0 - p * x
    }
}

/// `I[u] = ∫|∇u|^p dx - |H|^p ∫|u|^p d^{-p} dx`.
pub fn hardy_functional(
    params: &HardyParams,
    u: &dyn RadialFunction,
    measure: &RadialMeasure,
    opts: &QuadOptions,
) -> Result<Estimate> {
    check_measure(params, measure)?;
    // The denominator must exist on its own for I[u] to be meaningful.
    remainder_term(params, u, measure, 0.0, &QuadOptions::with_rel_tol(1e-3))?;
    let (p, h) = (params.p, params.h());
    integrate_support(u, params.d, measure.factor(), false, opts, |_, log_r| {
        let j = u.substituted_jet(h, log_r);
        let a = h * j.value;
        let kernel_ln = if a == 0.0 {
            if j.slope == 0.0 {
                return 0.0;
            }
            p * j.slope.abs().ln()
        } else {
            let k = bregman_kernel(p, j.slope / a);
            if k <= 0.0 {
                return 0.0;
            }
            p * a.abs().ln() + k.ln()
        };
        (p * j.ln_scale + kernel_ln).exp()
    })
}

/// `R_γ[u] = ∫|u|^p d^{-p} X^γ(d/D) dx`.
pub fn remainder_term(
    params: &HardyParams,
    u: &dyn RadialFunction,
    measure: &RadialMeasure,
    gamma: f64,
    opts: &QuadOptions,
) -> Result<Estimate> {
    check_measure(params, measure)?;
    if !(gamma >= 0.0) {
        return parameter(format!("remainder exponent must be >= 0, got {gamma}"));
    }
    let (p, h) = (params.p, params.h());
    integrate_support(
        u,
        params.d,
        measure.factor(),
        gamma != 0.0,
        opts,
        |t, log_r| {
            let j = u.substituted_jet(h, log_r);
            if j.value == 0.0 {
                return 0.0;
            }
            let mut e = p * (j.ln_scale + j.value.abs().ln());
            if gamma != 0.0 {
                e -= gamma * t.ln();
            }
            e.exp()
        },
    )
}

/// Coefficient of `ln r` in a weighted integrand, with cancellation
/// residue snapped to zero: at `ln r ~ -1e100` a stray `1e-16` would
/// otherwise become a huge spurious factor.
fn log_r_coefficient(terms: &[f64]) -> f64 {
    let sum: f64 = terms.iter().sum();
    let size: f64 = terms.iter().map(|t| t.abs()).sum();
    if sum.abs() <= 1e-12 * size {
        0.0
    } else {
        sum
    }
}

/// `∫|u|^q d^{c} X^γ(d/D) dx`, evaluated as
/// `∫ |v|^q r^{c + k - qH} t^{-γ} dt` with `v = r^H u`.
pub fn weighted_integral(
    params: &HardyParams,
    u: &dyn RadialFunction,
    measure: &RadialMeasure,
    q: f64,
    d_power: f64,
    x_power: f64,
    opts: &QuadOptions,
) -> Result<Estimate> {
    check_measure(params, measure)?;
    let h = params.h();
    let lift = log_r_coefficient(&[d_power, measure.power() + 1.0, -q * h]);
    integrate_support(
        u,
        params.d,
        measure.factor(),
        x_power != 0.0,
        opts,
        |t, log_r| {
            let j = u.substituted_jet(h, log_r);
            if j.value == 0.0 {
                return 0.0;
            }
            let mut e = q * (j.ln_scale + j.value.abs().ln());
            if lift != 0.0 {
                e += lift * log_r;
            }
            if x_power != 0.0 {
                e -= x_power * t.ln();
            }
            e.exp()
        },
    )
}

/// `∫|∇u|^q d^{c} X^γ(d/D) dx`, evaluated as
/// `∫ |Hv + v_t|^q r^{c + k - q - qH} t^{-γ} dt`.
pub fn weighted_gradient_integral(
    params: &HardyParams,
    u: &dyn RadialFunction,
    measure: &RadialMeasure,
    q: f64,
    d_power: f64,
    x_power: f64,
    opts: &QuadOptions,
) -> Result<Estimate> {
    check_measure(params, measure)?;
    let h = params.h();
    let lift = log_r_coefficient(&[d_power, measure.power() + 1.0, -q, -q * h]);
    integrate_support(
        u,
        params.d,
        measure.factor(),
        x_power != 0.0,
        opts,
        |t, log_r| {
            let j = u.substituted_jet(h, log_r);
            let g = (h * j.value + j.slope).abs();
            if g == 0.0 {
                return 0.0;
            }
            let mut e = q * (j.ln_scale + g.ln());
            if lift != 0.0 {
                e += lift * log_r;
            }
            if x_power != 0.0 {
                e -= x_power * t.ln();
            }
            e.exp()
        },
    )
}

/// `(∫|u|^q d^{c} X^γ(d/D) dx)^{1/q}`.
pub fn weighted_lq_norm(
    params: &HardyParams,
    u: &dyn RadialFunction,
    measure: &RadialMeasure,
    q: f64,
    d_power: f64,
    x_power: f64,
    opts: &QuadOptions,
) -> Result<Estimate> {
    if !(q > 0.0) {
        return parameter(format!("q must be positive, got {q}"));
    }
    let est = weighted_integral(params, u, measure, q, d_power, x_power, opts)?;
    let root = est.value.powf(1.0 / q);
    let error = if est.value > 0.0 {
        root * est.error / (q * est.value)
    } else {
        0.0
    };
    Ok(Estimate {
        value: root,
        error,
        evaluations: est.evaluations,
    })
}

/// `max_{0<ρ<1} ρ^ε (-ln ρ)^θ = (θ/(e ε))^θ`.
pub fn max_power_log(eps: f64, theta: f64) -> f64 {
    (theta / (std::f64::consts::E * eps)).powf(theta)
}

/// The weak norm with the radius of the maximizing ball, in log form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeakNorm {
    pub value: f64,
    pub ln_value: f64,
    /// `ln ρ` of the maximizing ball `B_ρ`.
    pub ln_rho: f64,
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// `sup_ρ |B_ρ|^{1/q - 1} ∫_{B_ρ} u dx` for `u` radial, nonnegative and
/// nonincreasing in `R^N` (centered balls then attain the supremum).
pub fn weak_lq_norm(
    params: &HardyParams,
    u: &dyn RadialFunction,
    q: f64,
    opts: &QuadOptions,
) -> Result<WeakNorm> {
    params.validate()?;
    if !(q > 1.0) {
        return parameter(format!("weak norm needs q > 1, got {q}"));
    }
    let (inner, outer) = u.support();
    if !(outer > inner) {
        return Ok(WeakNorm {
            value: 0.0,
            ln_value: f64::NEG_INFINITY,
            ln_rho: f64::NAN,
        });
    }
    if inner > 0.0 {
        return Err(HardyError::Precondition(
            "a nonincreasing profile that vanishes near 0 is identically zero".into(),
        ));
    }
    let n = params.n as f64;
    let ln_d = params.d.ln();
    let t_lo = ln_d - outer.ln();
    // ln of the integrand of ∫_{B_ρ} u dx in t, without the surface factor.
    let g = |t: f64| -> f64 {
        let log_r = ln_d - t;
        let j = u.jet(log_r);
        if j.value <= 0.0 {
            f64::NEG_INFINITY
        } else {
            j.ln_scale + j.value.ln() + n * log_r
        }
    };
    let mut nodes = vec![t_lo];
    let per_decade = 40.0;
    let mut k = 0.0;
    loop {
        let off = 1e-3 * 10f64.powf(k / per_decade);
        if off > 1e12 {
            break;
        }
        nodes.push(t_lo + off);
        k += 1.0;
    }
    for w in nodes.windows(2) {
        for s in [0.0, 0.5] {
            let t = w[0] + s * (w[1] - w[0]);
            let j = u.jet(ln_d - t);
            let scale = j.ln_scale.exp();
            if j.value < 0.0 {
                return Err(HardyError::Precondition(format!(
                    "profile is negative at r = e^{:.6}",
                    ln_d - t
                )));
            }
            if j.slope > 1e-10 * j.value.abs() && scale * j.slope > 1e-300 {
                return Err(HardyError::Precondition(format!(
                    "profile increases at r = e^{:.6}; the centered-ball reduction does not apply",
                    ln_d - t
                )));
            }
        }
    }
    let piece = |a: f64, b: Option<f64>| -> Result<f64> {
        let probes = [a, b.unwrap_or(a + 1.0), 0.5 * (a + b.unwrap_or(a + 1.0))];
        let reference = probes
            .iter()
            .map(|&t| g(t))
            .fold(f64::NEG_INFINITY, f64::max);
        if reference == f64::NEG_INFINITY {
            return Ok(f64::NEG_INFINITY);
        }
        let f = |t: f64| {
            let v = g(t) - reference;
            if v == f64::NEG_INFINITY {
                0.0
            } else {
                v.exp()
            }
        };
        // g carries an absolute rounding error of a few ulps of |g|, which
        // is a relative error in f; asking for more than that cannot succeed.
        let size = probes
            .iter()
            .map(|&t| g(t).abs())
            .filter(|v| v.is_finite())
            .fold(0.0, f64::max);
        let local = QuadOptions {
            rel_tol: opts.rel_tol.max(1e3 * f64::EPSILON * size),
            ..*opts
        };
        let est = match b {
            Some(b) => {
                // Split long pieces geometrically from the left end so that
                // a sharply decaying integrand is never sampled only where
                // it has underflowed.
                let mut cuts = vec![a];
                let mut off = 1.0;
                while a + off < b {
                    cuts.push(a + off);
                    off *= 2.0;
                }
                cuts.push(b);
                integrate_adaptive(f, &cuts, &local)?
            }
            None => integrate_to_infinity(f, &[a], &local)?,
        };
        Ok(if est.value > 0.0 {
            reference + est.value.ln()
        } else {
            f64::NEG_INFINITY
        })
    };
    let m = nodes.len();
    let mut ln_pieces = vec![f64::NEG_INFINITY; m];
    for j in 0..m - 1 {
        ln_pieces[j] = piece(nodes[j], Some(nodes[j + 1]))?;
    }
    ln_pieces[m - 1] = piece(nodes[m - 1], None)?;
    let mut ln_tail = vec![f64::NEG_INFINITY; m];
    let mut acc = f64::NEG_INFINITY;
    for j in (0..m).rev() {
        acc = log_add(acc, ln_pieces[j]);
        ln_tail[j] = acc;
    }
    let c = crate::quadrature::unit_sphere_area(params.n);
    let ln_ball = |t: f64| (c / n).ln() + n * (ln_d - t);
    let objective = |t: f64, ln_integral: f64| (1.0 / q - 1.0) * ln_ball(t) + c.ln() + ln_integral;
    let (mut best_j, mut best) = (0, f64::NEG_INFINITY);
    for j in 0..m {
        let v = objective(nodes[j], ln_tail[j]);
        if v > best {
            best = v;
            best_j = j;
        }
    }
    if nodes[best_j] - t_lo > 1e-2 * (nodes[m - 1] - t_lo) {
        return Err(HardyError::Precondition(format!(
            "the supremum lies beyond ln(D/r) = {:.3e}, outside the resolvable range",
            nodes[m - 1]
        )));
    }
    let mut best_t = nodes[best_j];
    {
        let lo_j = best_j.saturating_sub(1);
        let (mut a, mut b) = (nodes[lo_j], nodes[best_j + 1]);
        let upper = nodes[best_j + 1];
        let eval = |t: f64| -> Result<f64> {
            let head = piece(t, Some(upper))?;
            Ok(objective(t, log_add(head, ln_tail[best_j + 1])))
        };
        let ratio = 0.5 * (5f64.sqrt() - 1.0);
        let mut x1 = b - ratio * (b - a);
        let mut x2 = a + ratio * (b - a);
        let (mut f1, mut f2) = (eval(x1)?, eval(x2)?);
        for _ in 0..60 {
            if f1 > f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - ratio * (b - a);
                f1 = eval(x1)?;
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + ratio * (b - a);
                f2 = eval(x2)?;
            }
            if (b - a) <= 1e-12 * a.abs().max(1.0) {
                break;
            }
        }
        let (t_star, f_star) = if f1 > f2 { (x1, f1) } else { (x2, f2) };
        if f_star > best {
            best = f_star;
            best_t = t_star;
        }
    }
    Ok(WeakNorm {
        value: best.exp(),
        ln_value: best,
        ln_rho: ln_d - best_t,
    })
}

/// A single functional evaluation, as emitted in JSON reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FunctionalRecord {
    pub functional: String,
    pub params: HardyParams,
    pub arguments: BTreeMap<String, f64>,
    pub value: f64,
    pub error: f64,
}

impl FunctionalRecord {
    pub fn new(functional: &str, params: &HardyParams, est: &Estimate) -> Self {
        Self {
            functional: functional.to_string(),
            params: *params,
            arguments: BTreeMap::new(),
            value: est.value,
            error: est.error,
        }
    }

    pub fn with_argument(mut self, name: &str, value: f64) -> Self {
        self.arguments.insert(name.to_string(), value);
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{bump, FnProfile};
    use std::f64::consts::PI;

    fn point3() -> (HardyParams, RadialMeasure) {
        (
            HardyParams::new(2.0, 3, 3, 1.0).unwrap(),
            RadialMeasure::Sphere { dim: 3 },
        )
    }

    #[test]
    fn kernel_series_matches_direct_form() {
        for &p in &[1.5, 2.0, 3.0, 4.5] {
            for &x in &[0.049, -0.049, 0.01, -0.02] {
                let direct = (1.0f64 + x).abs().powf(p) - 1.0 - p * x;
                let s = bregman_kernel(p, x);
                assert!(((s - direct) / direct).abs() < 1e-9, "p={p} x={x}");
            }
        }
        assert!((bregman_kernel(2.0, 1e-80) - 1e-160).abs() < 1e-175);
    }

    #[test]
    fn zero_profile() {
        let (hp, m) = point3();
        let z = FnProfile::new(|_| 0.0, |_| 0.0, (0.3, 0.3));
        let o = QuadOptions::default();
        assert_eq!(hardy_functional(&hp, &z, &m, &o).unwrap().value, 0.0);
        assert_eq!(remainder_term(&hp, &z, &m, 2.0, &o).unwrap().value, 0.0);
    }

    #[test]
    fn bump_deficit_equals_difference_of_integrals() {
        let (hp, m) = point3();
        let o = QuadOptions::with_rel_tol(1e-12);
        let b = bump(0.45, 0.15);
        let i = hardy_functional(&hp, &b, &m, &o).unwrap().value;
        let grad = weighted_gradient_integral(&hp, &b, &m, 2.0, 0.0, 0.0, &o)
            .unwrap()
            .value;
        let den = weighted_integral(&hp, &b, &m, 2.0, -2.0, 0.0, &o)
            .unwrap()
            .value;
        assert!((i - (grad - 0.25 * den)).abs() < 1e-8 * grad);
        let r0 = remainder_term(&hp, &b, &m, 0.0, &o).unwrap().value;
        assert!((r0 - den).abs() < 1e-10 * den);
        let g = gradient_term(&hp, &b, &m, &o).unwrap().value;
        assert!((g - grad).abs() < 1e-10 * grad);
    }

    #[test]
    fn measure_must_match_codimension() {
        let (hp, _) = point3();
        let b = bump(0.45, 0.15);
        let wrong = RadialMeasure::Sphere { dim: 2 };
        assert!(matches!(
            hardy_functional(&hp, &b, &wrong, &QuadOptions::default()),
            Err(HardyError::Parameter(_))
        ));
    }

    #[test]
    fn weak_norm_of_a_plateau() {
        let hp = HardyParams::new(1.5, 3, 3, 10.0).unwrap();
        let rho0 = 0.5;
        let w = 1e-4;
        // 1 on [0, ρ0 - w], smooth monotone drop to 0 on [ρ0 - w, ρ0 + w]
        let f = move |r: f64| {
            let s = ((r - rho0) / w).clamp(-1.0, 1.0);
            0.5 - 0.75 * s + 0.25 * s * s * s
        };
        let df = move |r: f64| {
            let s = (r - rho0) / w;
            if s.abs() >= 1.0 {
                0.0
            } else {
                (-0.75 + 0.75 * s * s) / w
            }
        };
        let plateau = FnProfile::new(f, df, (0.0, rho0 + w)).with_breakpoints(vec![rho0 - w, rho0]);
        for &q in &[1.5, 3.0, 6.0] {
            let wn = weak_lq_norm(&hp, &plateau, q, &QuadOptions::with_rel_tol(1e-10)).unwrap();
            let ball = 4.0 * PI / 3.0 * rho0.powi(3);
            let expected = ball.powf(1.0 / q);
            assert!(
                ((wn.value - expected) / expected).abs() < 1e-3,
                "q={q}: {} vs {expected}",
                wn.value
            );
        }
    }

    #[test]
    fn weak_norm_rejects_increasing_profiles() {
        let hp = HardyParams::new(1.5, 3, 3, 10.0).unwrap();
        let b = bump(0.45, 0.4);
        assert!(matches!(
            weak_lq_norm(&hp, &b, 2.0, &QuadOptions::default()),
            Err(HardyError::Precondition(_))
        ));
    }

    #[test]
    fn scalar_max_helper() {
        let (eps, theta) = (0.01, 0.7);
        let mut best: f64 = 0.0;
        for i in 1..200_000 {
            let t = i as f64 * 1e-3;
            best = best.max((-eps * t).exp() * t.powf(theta));
        }
        assert!((best / max_power_log(eps, theta) - 1.0).abs() < 1e-6);
    }
}
