//! One-dimensional quadrature for integrands with a logarithmic endpoint
//! singularity at `r = 0`, and the radial reduction of N-dimensional
//! integrals.
//!
//! Integrals reaching `r = 0` are evaluated in the log variable
//! `t = ln(D/r)`, where `X(r/D) = 1/t` and `r^a dr = r^{a+1} dt`. Beyond the
//! first unit of `t` the tail is mapped once more by `t = t_s e^w`, which
//! turns the slowly decaying power laws `t^{-1-beta}` and the stretched
//! exponentials `e^{-eps p t}` produced by small `eps` into integrands that
//! decay at least exponentially in `w`. All powers are combined in log space
//! so that nothing overflows even when `r` itself underflows.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{domain, HardyError, Result};

/// Tolerances for the adaptive routines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    /// Relative tolerance (default 1e-8).
    pub rel_tol: f64,
    /// Absolute tolerance (default 0).
    pub abs_tol: f64,
    /// Maximum number of subintervals kept by the adaptive routine.
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 0.0,
            max_intervals: 20_000,
        }
    }
}

impl QuadOptions {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }
}

/// A value with its (absolute) error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

impl Estimate {
    pub fn relative_error(&self) -> f64 {
        if self.value == 0.0 {
            self.error
        } else {
            self.error / self.value.abs()
        }
    }
}

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// One application of the 15-point Gauss-Kronrod rule on `[a, b]`, with the
/// QUADPACK error rescaling.
pub fn gauss_kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_g = fc * WG[3];
    let mut res_k = fc * WGK[7];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    res_abs *= half.abs();
    res_asc *= half.abs();
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (value, err)
}

/// Globally adaptive Gauss-Kronrod integration over the partition given by
/// `breakpoints` (strictly increasing, at least two entries).
pub fn integrate_adaptive<F: Fn(f64) -> f64>(
    f: F,
    breakpoints: &[f64],
    opts: &QuadOptions,
) -> Result<Estimate> {
    if breakpoints.len() < 2 {
        return domain("adaptive quadrature needs at least two breakpoints");
    }
    if breakpoints.windows(2).any(|w| !(w[1] > w[0])) {
        return domain(format!(
            "breakpoints must be strictly increasing: {breakpoints:?}"
        ));
    }
    let mut heap = BinaryHeap::new();
    let mut finished: Vec<Panel> = Vec::new();
    let mut evaluations = 0;
    let mut total = 0.0;
    let mut total_err = 0.0;
    for w in breakpoints.windows(2) {
        let (value, error) = gauss_kronrod15(&f, w[0], w[1]);
        evaluations += 15;
        total += value;
        total_err += error;
        heap.push(Panel {
            a: w[0],
            b: w[1],
            value,
            error,
        });
    }
    loop {
        if !total.is_finite() || !total_err.is_finite() {
            return Err(HardyError::NonIntegrable(format!(
                "integrand produced a non-finite value (sum {total}, error {total_err})"
            )));
        }
        if total_err <= opts.abs_tol.max(opts.rel_tol * total.abs()) {
            break;
        }
        if heap.len() + finished.len() >= opts.max_intervals {
            return Err(HardyError::Convergence {
                best: total,
                error: total_err,
                message: format!("subdivision limit {} reached", opts.max_intervals),
            });
        }
        let Some(worst) = heap.pop() else {
            return Err(HardyError::Convergence {
                best: total,
                error: total_err,
                message: "no refinable subinterval left (roundoff limit)".into(),
            });
        };
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b)
            || (worst.b - worst.a) <= 1e-14 * worst.a.abs().max(worst.b.abs())
        {
            finished.push(worst);
            continue;
        }
        let (v1, e1) = gauss_kronrod15(&f, worst.a, mid);
        let (v2, e2) = gauss_kronrod15(&f, mid, worst.b);
        evaluations += 30;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
    }
    // Re-sum from the panels to shed the drift of the running updates.
    let panels = heap.into_iter().chain(finished);
    let (value, error) = panels.fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
    Ok(Estimate {
        value,
        error,
        evaluations,
    })
}

/// Largest `t` reached on the mapped tail.
const TAIL_T_MAX: f64 = 1e250;

/// Integrates `f(t)` over `[breakpoints[0], ∞)`.
///
/// The finite breakpoints partition the leading part; the tail beyond
/// `max(last breakpoint, 1)` is mapped by `t = t_s e^w`. The routine rejects
/// integrands whose weighted tail `t·f(t)` has not died out at `t = 1e250`.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(
    f: F,
    breakpoints: &[f64],
    opts: &QuadOptions,
) -> Result<Estimate> {
    if breakpoints.is_empty() {
        return domain("tail quadrature needs a starting point");
    }
    let mut finite: Vec<f64> = breakpoints.to_vec();
    let last = *finite.last().unwrap();
    let t_s = last.max(1.0);
    if t_s > last {
        finite.push(t_s);
    }
    let w_max = (TAIL_T_MAX / t_s).ln();
    let split = t_s;
    let mapped = |u: f64| -> f64 {
        if u <= split {
            f(u)
        } else {
            let t = t_s * (u - split).exp();
            let v = f(t);
            if v == 0.0 {
                0.0
            } else {
                v * t
            }
        }
    };
    let mut nodes = finite.clone();
    let mut w = 1.0;
    while w < w_max {
        nodes.push(split + w);
        w *= 2.0;
    }
    nodes.push(split + w_max);
    let est = integrate_adaptive(mapped, &nodes, opts)?;
    let end = mapped(split + w_max).abs();
    let budget = 1e-3 * opts.abs_tol.max(opts.rel_tol * est.value.abs());
    if !(end <= budget) && end > 0.0 {
        return Err(HardyError::NonIntegrable(format!(
            "integrand has not decayed at t = {TAIL_T_MAX:e} (t·f(t) = {end:e})"
        )));
    }
    Ok(est)
}

/// Bounded smooth factor multiplying `r^a X^beta(r/D)`.
pub type SmoothFactor = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// The integrand `r^a · X^beta(r/D) · g(r)`.
#[derive(Clone)]
pub struct WeightedIntegrand {
    pub a: f64,
    pub beta: f64,
    pub scale: f64,
    pub factor: Option<SmoothFactor>,
    /// Points (in `r`) where `factor` is not smooth.
    pub breakpoints: Vec<f64>,
}

impl std::fmt::Debug for WeightedIntegrand {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("WeightedIntegrand")
            .field("a", &self.a)
            .field("beta", &self.beta)
            .field("scale", &self.scale)
            .field("factor", &self.factor.as_ref().map(|_| "<fn>"))
            .field("breakpoints", &self.breakpoints)
            .finish()
    }
}

impl WeightedIntegrand {
    pub fn new(a: f64, beta: f64, scale: f64) -> Self {
        Self {
            a,
            beta,
            scale,
            factor: None,
            breakpoints: Vec::new(),
        }
    }

    pub fn with_factor(mut self, g: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.factor = Some(Arc::new(g));
        self
    }

    pub fn with_breakpoints(mut self, points: Vec<f64>) -> Self {
        self.breakpoints = points;
        self
    }

    /// Whether `∫_0 r^a X^beta(r/D) dr` converges at `r = 0`.
    pub fn integrable_at_zero(&self) -> bool {
        self.a > -1.0 || (self.a == -1.0 && self.beta > 1.0)
    }
}

/// `∫_lower^upper r^a X^beta(r/D) g(r) dr`.
///
/// The interval must satisfy `0 <= lower < upper < D`; when `beta = 0` the
/// weight is absent and `upper` may exceed `D`.
pub fn integrate_singular(
    f: &WeightedIntegrand,
    lower: f64,
    upper: f64,
    opts: &QuadOptions,
) -> Result<Estimate> {
    if !(lower >= 0.0 && upper > lower && upper.is_finite()) {
        return domain(format!("need 0 <= lower < upper, got [{lower}, {upper}]"));
    }
    if !(f.scale > 0.0) {
        return domain(format!("length scale D must be positive, got {}", f.scale));
    }
    if f.beta != 0.0 && upper >= f.scale {
        return domain(format!(
            "upper limit {upper} must stay below D = {} for X(r/D) to be defined",
            f.scale
        ));
    }
    if lower == 0.0 && !f.integrable_at_zero() {
        return Err(HardyError::NonIntegrable(format!(
            "r^{} X^{} is not integrable at r = 0 (need a > -1, or a = -1 and beta > 1)",
            f.a, f.beta
        )));
    }
    // Map r = L e^{-t}; with L = D the weight is X = 1/t.
    let big_l = if upper < f.scale {
        f.scale
    } else {
        upper * std::f64::consts::E
    };
    let ln_l = big_l.ln();
    let shift = (f.scale / big_l).ln();
    let a1 = f.a + 1.0;
    let beta = f.beta;
    let factor = f.factor.clone();
    let integrand = move |t: f64| -> f64 {
        let log_r = ln_l - t;
        let mut expo = a1 * log_r;
        if beta != 0.0 {
            expo -= beta * (t + shift).ln();
        }
        let g = match &factor {
            Some(g) => g(log_r.exp()),
            None => 1.0,
        };
        if g == 0.0 {
            0.0
        } else {
            g * expo.exp()
        }
    };
    let t_hi_r = (big_l / upper).ln();
    let mut points: Vec<f64> = f
        .breakpoints
        .iter()
        .filter(|&&r| r > lower && r < upper)
        .map(|&r| (big_l / r).ln())
        .collect();
    points.push(t_hi_r);
    if lower > 0.0 {
        points.push((big_l / lower).ln());
    }
    points.sort_by(f64::total_cmp);
    points.dedup();
    if lower > 0.0 {
        integrate_adaptive(integrand, &points, opts)
    } else {
        integrate_to_infinity(integrand, &points, opts)
    }
}

/// Area of the unit sphere `S^{n-1} ⊂ R^n`, `2 π^{n/2} / Γ(n/2)`.
pub fn unit_sphere_area(n: usize) -> f64 {
    assert!(n >= 1, "sphere dimension must be positive");
    // Γ(n/2) by the recursion Γ(x+1) = x Γ(x) from Γ(1) = 1 or Γ(1/2) = √π.
    let (mut gamma, mut x) = if n.is_multiple_of(2) {
        (1.0, 1.0)
    } else {
        (PI.sqrt(), 0.5)
    };
    let half = n as f64 / 2.0;
    while x < half {
        gamma *= x;
        x += 1.0;
    }
    2.0 * PI.powf(half) / gamma
}

/// How `dx` disintegrates over the level sets `{d = r}` near `K`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RadialMeasure {
    /// `K` a point in `R^dim`: `dx = |S^{dim-1}| r^{dim-1} dr dσ`.
    Sphere { dim: usize },
    /// `K` affine of codimension `codim`; `section` is the measure of the
    /// bounded section along `K`.
    Affine { codim: usize, section: f64 },
    /// Distance to the boundary (`k = 1`) in a one-dimensional model.
    Boundary,
}

impl RadialMeasure {
    /// The exponent `k - 1` of `r` in the surface element.
    pub fn power(&self) -> f64 {
        match *self {
            RadialMeasure::Sphere { dim } => dim as f64 - 1.0,
            RadialMeasure::Affine { codim, .. } => codim as f64 - 1.0,
            RadialMeasure::Boundary => 0.0,
        }
    }

    pub fn codimension(&self) -> usize {
        match *self {
            RadialMeasure::Sphere { dim } => dim,
            RadialMeasure::Affine { codim, .. } => codim,
            RadialMeasure::Boundary => 1,
        }
    }

    /// Constant in front of `r^{k-1} dr`.
    pub fn factor(&self) -> f64 {
        match *self {
            RadialMeasure::Sphere { dim } => unit_sphere_area(dim),
            RadialMeasure::Affine { codim, section } => unit_sphere_area(codim) * section,
            RadialMeasure::Boundary => 1.0,
        }
    }
}

/// `∫_{d < outer} F(d(x)) dx` for `F(r) = r^a X^beta(r/D) g(r)`, reduced to
/// `factor · ∫_0^outer F(r) r^{k-1} dr`.
pub fn radial_integral(
    measure: &RadialMeasure,
    integrand: &WeightedIntegrand,
    outer: f64,
    opts: &QuadOptions,
) -> Result<Estimate> {
    let mut lifted = integrand.clone();
    lifted.a += measure.power();
    let est = integrate_singular(&lifted, 0.0, outer, opts)?;
    let c = measure.factor();
    Ok(Estimate {
        value: c * est.value,
        error: c * est.error,
        evaluations: est.evaluations,
    })
}

/// Node placement for a [`GradedGrid`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum GridScheme {
    /// `nodes[i] = δ (i/M)^γ`.
    Power { exponent: f64 },
    /// Geometric clustering `nodes[i] = r_min (δ/r_min)^{(i-1)/(M-1)}`.
    Geometric { r_min: f64 },
    /// Nodes supplied by the caller (e.g. read from a file).
    Explicit,
}

/// Increasing nodes in `(0, δ]` clustered at the origin.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradedGrid {
    nodes: Vec<f64>,
    delta: f64,
    scheme: GridScheme,
}

impl GradedGrid {
    /// Power grading, `γ ≥ 1`.
    pub fn power(delta: f64, count: usize, exponent: f64) -> Result<Self> {
        if !(delta > 0.0) || count < 2 || !(exponent >= 1.0) {
            return domain(format!(
                "power grid needs δ > 0, M ≥ 2, γ ≥ 1 (got δ={delta}, M={count}, γ={exponent})"
            ));
        }
        let m = count as f64;
        let nodes = (1..=count)
            .map(|i| delta * (i as f64 / m).powf(exponent))
            .collect();
        Ok(Self {
            nodes,
            delta,
            scheme: GridScheme::Power { exponent },
        })
    }

    pub fn geometric(delta: f64, count: usize, r_min: f64) -> Result<Self> {
        if !(delta > 0.0) || count < 2 || !(r_min > 0.0 && r_min < delta) {
            return domain(format!(
                "geometric grid needs 0 < r_min < δ and M ≥ 2 (got r_min={r_min}, δ={delta}, M={count})"
            ));
        }
        let ratio = (delta / r_min).ln();
        let nodes = (0..count)
            .map(|i| {
                if i + 1 == count {
                    delta
                } else {
                    r_min * (ratio * i as f64 / (count - 1) as f64).exp()
                }
            })
            .collect();
        Ok(Self {
            nodes,
            delta,
            scheme: GridScheme::Geometric { r_min },
        })
    }

    /// Wraps arbitrary strictly increasing positive nodes; `δ` is the last.
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 || !(nodes[0] > 0.0) || nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return domain("grid nodes must be positive and strictly increasing (at least two)");
        }
        let delta = *nodes.last().unwrap();
        Ok(Self {
            nodes,
            delta,
            scheme: GridScheme::Explicit,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn scheme(&self) -> GridScheme {
        self.scheme
    }

    /// The grid with twice as many nodes under the same scheme.
    pub fn refined(&self) -> Self {
        let m = 2 * self.len();
        match self.scheme {
            GridScheme::Power { exponent } => Self::power(self.delta, m, exponent).unwrap(),
            GridScheme::Geometric { r_min } => Self::geometric(self.delta, m, r_min).unwrap(),
            GridScheme::Explicit => {
                let mut nodes = vec![0.5 * self.nodes[0]];
                nodes.push(self.nodes[0]);
                for w in self.nodes.windows(2) {
                    nodes.push(0.5 * (w[0] + w[1]));
                    nodes.push(w[1]);
                }
                Self::from_nodes(nodes).unwrap()
            }
        }
    }
}

// 5-point Gauss-Legendre on [-1, 1].
const GL5_X: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
const GL5_W: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

fn composite_on<F: Fn(f64) -> f64 + Sync>(f: &F, edges: &[f64]) -> f64 {
    use rayon::prelude::*;
    edges
        .par_windows(2)
        .map(|w| {
            let c = 0.5 * (w[0] + w[1]);
            let h = 0.5 * (w[1] - w[0]);
            GL5_X
                .iter()
                .zip(GL5_W.iter())
                .map(|(x, wt)| wt * f(c + h * x))
                .sum::<f64>()
                * h
        })
        .collect::<Vec<_>>()
        .iter()
        .sum()
}

/// Composite 5-point Gauss-Legendre over `[0, δ]` on the panels of `grid`
/// (the first panel is `[0, nodes[0]]`). The error estimate is the change
/// from the grid restricted to every other node.
pub fn composite_gauss<F: Fn(f64) -> f64 + Sync>(f: F, grid: &GradedGrid) -> Estimate {
    let mut edges = Vec::with_capacity(grid.len() + 1);
    edges.push(0.0);
    edges.extend_from_slice(grid.nodes());
    let fine = composite_on(&f, &edges);
    // Coarse partition: keep 0, the odd-indexed nodes (i = 2, 4, ... in 1-based terms) and δ.
    let mut coarse: Vec<f64> = vec![0.0];
    coarse.extend(grid.nodes().iter().skip(1).step_by(2));
    if *coarse.last().unwrap() != grid.delta() {
        coarse.push(grid.delta());
    }
    let rough = composite_on(&f, &coarse);
    Estimate {
        value: fine,
        error: (fine - rough).abs(),
        evaluations: 5 * (edges.len() + coarse.len() - 2),
    }
}
