//! Direct minimisation of discretised Rayleigh quotients.
//!
//! Radial profiles are written as `u = r^{-H} v` and discretised in
//! `t = ln(D/r)` (plain quotient) or `τ = ln t` (quotients carrying powers of
//! `X = 1/t`, whose extremals spread over many decades of `t`). `v` is
//! piecewise linear with zero values at both ends, so every discrete value is
//! an honest quotient of an admissible function.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{parameter, Result};
use crate::functionals::bregman_kernel;
use crate::params::HardyParams;

/// Regularisation of `|x|^{p-2} x` at `x = 0`.
pub const GRADIENT_REGULARIZATION: f64 = 1e-10;

const GAUSS3: [(f64, f64); 3] = [
    (0.112_701_665_379_258_31, 5.0 / 18.0),
    (0.5, 8.0 / 18.0),
    (0.887_298_334_620_741_7, 5.0 / 18.0),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuotientKind {
    /// `∫|u'|^p / ∫|u|^p d^{-p}`, infimum `|H|^p`.
    Plain,
    /// `I[u] / R_2[u]`, bounded below by `(p-1)/(2p)|H|^{p-2}`.
    Improved,
    /// `p = k`: `∫|u'|^p / ∫|u|^p d^{-p} X^p`, infimum `((p-1)/p)^p`.
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverVariable {
    /// Nodes uniform in `t`.
    Distance,
    /// Nodes uniform in `ln t`.
    LogDistance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RayleighProblem {
    pub params: HardyParams,
    pub kind: QuotientKind,
    pub variable: SolverVariable,
    /// Range of `t = ln(D/r)`.
    pub t_range: (f64, f64),
    pub nodes: usize,
}

impl RayleighProblem {
    /// Problem on `t ∈ [t_lo, t_hi]`, i.e. `r ∈ [D e^{-t_hi}, D e^{-t_lo}]`.
    pub fn new(
        params: HardyParams,
        kind: QuotientKind,
        t_lo: f64,
        t_hi: f64,
        nodes: usize,
    ) -> Result<Self> {
        let variable = match kind {
            QuotientKind::Plain => SolverVariable::Distance,
            _ => SolverVariable::LogDistance,
        };
        let prob = Self {
            params,
            kind,
            variable,
            t_range: (t_lo, t_hi),
            nodes,
        };
        prob.validate()?;
        Ok(prob)
    }

    /// The plain quotient on `r ∈ [r_min, D]`.
    pub fn plain(params: HardyParams, r_min: f64, nodes: usize) -> Result<Self> {
        if !(r_min > 0.0 && r_min < params.d) {
            return parameter(format!("the inner cut-off must lie in (0, D), got {r_min}"));
        }
        Self::new(
            params,
            QuotientKind::Plain,
            0.0,
            (params.d / r_min).ln(),
            nodes,
        )
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        let (lo, hi) = self.t_range;
        if self.nodes < 200 {
            return parameter(format!(
                "the solver needs at least 200 nodes, got {}",
                self.nodes
            ));
        }
        if !(hi > lo && lo >= 0.0 && hi.is_finite()) {
            return parameter(format!(
                "t-range must satisfy 0 <= t_lo < t_hi, got [{lo}, {hi}]"
            ));
        }
        if self.variable == SolverVariable::LogDistance && !(lo > 0.0) {
            return parameter("a logarithmic grid needs t_lo > 0");
        }
        match self.kind {
            QuotientKind::Degenerate if !self.params.is_degenerate() => {
                parameter("the X^p-weighted quotient is the p = k problem")
            }
            QuotientKind::Plain | QuotientKind::Improved if self.params.is_degenerate() => {
                parameter(
                    "for p = k the plain Hardy quotient has infimum 0; use the degenerate quotient",
                )
            }
            _ => Ok(()),
        }
    }

    /// Grid coordinates `s_i` (either `t` or `ln t`).
    pub fn coordinates(&self) -> Vec<f64> {
        let (lo, hi) = match self.variable {
            SolverVariable::Distance => self.t_range,
            SolverVariable::LogDistance => (self.t_range.0.ln(), self.t_range.1.ln()),
        };
        let n = self.nodes - 1;
        (0..=n)
            .map(|i| lo + (hi - lo) * i as f64 / n as f64)
            .collect()
    }

    fn t_of(&self, s: f64) -> (f64, f64) {
        match self.variable {
            SolverVariable::Distance => (s, 1.0),
            SolverVariable::LogDistance => {
                let t = s.exp();
                (t, t)
            }
        }
    }

    /// The theorem constant the infimum is compared against.
    pub fn reference_constant(&self) -> f64 {
        match self.kind {
            QuotientKind::Plain => self.params.sharp_constant(),
            QuotientKind::Improved => self.params.remainder_constant(),
            QuotientKind::Degenerate => self.params.degenerate_constant(),
        }
    }

    fn h(&self) -> f64 {
        if self.kind == QuotientKind::Degenerate {
            0.0
        } else {
            self.params.h()
        }
    }

    fn denominator_weight(&self, t: f64) -> f64 {
        match self.kind {
            QuotientKind::Plain => 1.0,
            QuotientKind::Improved => t.powi(-2),
            QuotientKind::Degenerate => t.powf(-self.params.p),
        }
    }

    /// Numerator `N`, denominator `Dn` and, on request, their gradients with
    /// respect to the nodal values.
    fn evaluate(
        &self,
        s: &[f64],
        v: &[f64],
        grads: Option<(&mut [f64], &mut [f64])>,
    ) -> (f64, f64) {
        let p = self.params.p;
        let h = self.h();
        let mu2 = GRADIENT_REGULARIZATION * GRADIENT_REGULARIZATION;
        let m = |x: f64| (x * x + mu2).powf(0.5 * (p - 2.0)) * x;
        let improved = self.kind == QuotientKind::Improved;
        let (mut num, mut den) = (0.0, 0.0);
        let mut grads = grads;
        if let Some((gn, gd)) = grads.as_mut() {
            gn.fill(0.0);
            gd.fill(0.0);
        }
        for e in 0..s.len() - 1 {
            let len = s[e + 1] - s[e];
            let slope = (v[e + 1] - v[e]) / len;
            for &(xi, w) in &GAUSS3 {
                let (t, jac) = self.t_of(s[e] + xi * len);
                let val = v[e] + xi * (v[e + 1] - v[e]);
                let g = slope / jac;
                let y = h * val;
                let phi = if improved {
                    if y == 0.0 {
                        g.abs().powf(p)
                    } else {
                        y.abs().powf(p) * bregman_kernel(p, g / y)
                    }
                } else {
                    (y + g).abs().powf(p)
                };
                let rho = self.denominator_weight(t);
                let scale = w * len * jac;
                num += scale * phi;
                den += scale * rho * val.abs().powf(p);
                if let Some((gn, gd)) = grads.as_mut() {
                    let (phi_g, phi_v) = if improved {
                        let d = m(y + g) - m(y);
                        let cross = (p - 1.0) * (y * y + mu2).powf(0.5 * (p - 2.0)) * g;
                        (p * d, h * p * (d - cross))
                    } else {
                        let d = p * m(y + g);
                        (d, h * d)
                    };
                    let dg = phi_g / (len * jac);
                    gn[e] += scale * (phi_v * (1.0 - xi) - dg);
                    gn[e + 1] += scale * (phi_v * xi + dg);
                    let dd = scale * rho * p * m(val);
                    gd[e] += dd * (1.0 - xi);
                    gd[e + 1] += dd * xi;
                }
            }
        }
        (num, den)
    }

    /// The discrete quotient of nodal values `v` (end values are ignored and
    /// treated as zero).
    pub fn quotient(&self, v: &[f64]) -> Result<f64> {
        if v.len() != self.nodes {
            return parameter(format!(
                "expected {} nodal values, got {}",
                self.nodes,
                v.len()
            ));
        }
        let mut v = v.to_vec();
        v[0] = 0.0;
        *v.last_mut().unwrap() = 0.0;
        let (num, den) = self.evaluate(&self.coordinates(), &v, None);
        if !(den > 0.0) {
            return parameter("the profile vanishes identically");
        }
        Ok(num / den)
    }

    /// Tridiagonal lagged-Hessian preconditioner for the numerator.
    fn preconditioner(&self, s: &[f64], v: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let p = self.params.p;
        let h = self.h();
        let n = s.len();
        let mut samples = Vec::with_capacity(3 * n);
        for e in 0..n - 1 {
            let len = s[e + 1] - s[e];
            let slope = (v[e + 1] - v[e]) / len;
            for &(xi, _) in &GAUSS3 {
                let (_, jac) = self.t_of(s[e] + xi * len);
                samples.push((h * (v[e] + xi * (v[e + 1] - v[e])) + slope / jac).abs());
            }
        }
        let peak = samples
            .iter()
            .cloned()
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE);
        let floor = (1e-3 * peak).powi(2);
        let mut diag = vec![0.0; n];
        let mut off = vec![0.0; n];
        for e in 0..n - 1 {
            let len = s[e + 1] - s[e];
            let mut stiff = 0.0;
            let mut mass = 0.0;
            for (q, &(xi, w)) in GAUSS3.iter().enumerate() {
                let (t, jac) = self.t_of(s[e] + xi * len);
                let a = samples[3 * e + q];
                let curv = p * (p - 1.0) * (a * a + floor).powf(0.5 * (p - 2.0));
                stiff += w * curv / (len * jac);
                // The Bregman form of the deficit has no zeroth-order part.
                let zeroth = if self.kind == QuotientKind::Improved {
                    0.0
                } else {
                    h * h * curv
                };
                mass += w * len * jac * (zeroth + self.denominator_weight(t) * 1e-6 * curv);
            }
            diag[e] += stiff + 0.5 * mass;
            diag[e + 1] += stiff + 0.5 * mass;
            off[e] -= stiff;
        }
        (diag, off)
    }

    fn initial_guess(&self, s: &[f64], seed: u64) -> Vec<f64> {
        let p = self.params.p;
        let (eps, theta) = (0.05, 1.5 / p);
        let (lo, hi) = (s[0], *s.last().unwrap());
        let t_lo = self.t_range.0;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        s.iter()
            .map(|&si| {
                let (t, _) = self.t_of(si);
                // U_ε in the substituted variable, tapered to vanish at both ends.
                let shape = t.max(1e-300).powf(theta) * (-eps * (t - t_lo)).exp();
                let taper = (std::f64::consts::PI * (si - lo) / (hi - lo)).sin();
                let noise = 1.0 + 0.01 * (2.0 * rng.gen::<f64>() - 1.0);
                shape * taper * noise + 1e-3 * taper
            })
            .collect()
    }
}

fn solve_tridiagonal(diag: &[f64], off: &[f64], rhs: &[f64]) -> Vec<f64> {
    // Dirichlet ends: unknowns 1..n-2.
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut x = vec![0.0; n];
    if n < 3 {
        return x;
    }
    let (first, last) = (1, n - 2);
    for i in first..=last {
        let sub = if i > first { off[i - 1] } else { 0.0 };
        let denom = diag[i] - sub * c[i - 1];
        c[i] = if i < last { off[i] / denom } else { 0.0 };
        d[i] = (rhs[i] - sub * d[i - 1]) / denom;
    }
    for i in (first..=last).rev() {
        x[i] = d[i] - if i < last { c[i] * x[i + 1] } else { 0.0 };
    }
    x
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub iterations: usize,
    /// Relative decrease per iteration below which the run counts as
    /// stationary.
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            iterations: 2000,
            tolerance: 1e-12,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Minimizer {
    pub variable: SolverVariable,
    pub t: Vec<f64>,
    /// `v = r^H u`, normalised so that the denominator equals 1.
    pub v: Vec<f64>,
}

impl Minimizer {
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["t", "v"])?;
        for (t, v) in self.t.iter().zip(&self.v) {
            w.write_record([format!("{t:e}"), format!("{v:e}")])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverResult {
    pub value: f64,
    pub reference: f64,
    pub converged: bool,
    pub iterations: usize,
    pub minimizer: Minimizer,
    /// `(iteration, value)`, nonincreasing.
    pub history: Vec<(usize, f64)>,
}

impl SolverResult {
    pub fn write_history_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["iteration", "value"])?;
        for (i, v) in &self.history {
            w.write_record([i.to_string(), format!("{v:e}")])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Backtracks from `step` until `f` drops below `f0`, or expands while it
/// keeps dropping, then refines the bracket by golden sections.
fn line_search<F: Fn(f64) -> f64>(f: F, f0: f64, step: f64) -> Option<(f64, f64)> {
    let mut b = step;
    let mut fb = f(b);
    while !(fb < f0) {
        b *= 0.5;
        if b < 1e-14 {
            return None;
        }
        fb = f(b);
    }
    let mut a = 0.0;
    let mut c = 2.0 * b;
    let mut fc = f(c);
    while fc < fb && c < 1e8 {
        a = b;
        b = c;
        fb = fc;
        c *= 2.0;
        fc = f(c);
    }
    // The minimum lies in [a, c] with f(b) below both ends.
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let (mut lo, mut hi) = (a, c);
    let (mut best, mut fbest) = (b, fb);
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..40 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = f(x2);
        }
        if hi - lo <= 1e-6 * hi {
            break;
        }
    }
    for (x, fx) in [(x1, f1), (x2, f2)] {
        if fx < fbest {
            best = x;
            fbest = fx;
        }
    }
    Some((best, fbest))
}

/// Preconditioned, normalised gradient descent with a backtracking step.
pub fn minimize(prob: &RayleighProblem, options: &SolverOptions) -> Result<SolverResult> {
    prob.validate()?;
    let s = prob.coordinates();
    let n = s.len();
    let mut v = prob.initial_guess(&s, options.seed);
    v[0] = 0.0;
    v[n - 1] = 0.0;
    let mut gn = vec![0.0; n];
    let mut gd = vec![0.0; n];
    let normalise = |v: &mut Vec<f64>, den: f64| {
        let k = den.powf(-1.0 / prob.params.p);
        v.iter_mut().for_each(|x| *x *= k);
    };
    let (_, den) = prob.evaluate(&s, &v, None);
    normalise(&mut v, den);
    let mut value = {
        let (num, den) = prob.evaluate(&s, &v, None);
        num / den
    };
    let mut history = vec![(0, value)];
    let mut quiet = 0;
    let mut converged = false;
    let mut iterations = 0;
    let mut step = 1.0;
    for it in 1..=options.iterations {
        iterations = it;
        let (num, den) = prob.evaluate(&s, &v, Some((&mut gn, &mut gd)));
        let q = num / den;
        let grad: Vec<f64> = gn.iter().zip(&gd).map(|(a, b)| (a - q * b) / den).collect();
        let (diag, off) = prob.preconditioner(&s, &v);
        let dir = solve_tridiagonal(&diag, &off, &grad);
        let quotient_at = |alpha: f64| -> f64 {
            let w: Vec<f64> = v.iter().zip(&dir).map(|(a, d)| a - alpha * d).collect();
            let (num, den) = prob.evaluate(&s, &w, None);
            if den > 0.0 && num.is_finite() {
                num / den
            } else {
                f64::INFINITY
            }
        };
        let Some((best_step, best_q)) = line_search(quotient_at, value, step) else {
            converged = true;
            break;
        };
        let best_v: Vec<f64> = v.iter().zip(&dir).map(|(a, d)| a - best_step * d).collect();
        let decrease = (value - best_q) / value.abs().max(f64::MIN_POSITIVE);
        v = best_v;
        let (_, den) = prob.evaluate(&s, &v, None);
        normalise(&mut v, den);
        value = best_q;
        step = best_step;
        history.push((it, value));
        if decrease < options.tolerance {
            quiet += 1;
            if quiet >= 5 {
                converged = true;
                break;
            }
        } else {
            quiet = 0;
        }
    }
    let t = s.iter().map(|&x| prob.t_of(x).0).collect();
    Ok(SolverResult {
        value,
        reference: prob.reference_constant(),
        converged,
        iterations,
        minimizer: Minimizer {
            variable: prob.variable,
            t,
            v,
        },
        history,
    })
}
