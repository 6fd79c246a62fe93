//! Radial functions of the distance variable.
//!
//! Every profile is evaluated through a [`Jet`] carrying a separate log
//! scale, so that families like `r^{-H+ε} X^{-θ}` can be sampled at radii far
//! below the smallest positive double.

use std::io::{Read, Write};
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::quadrature::GradedGrid;

/// `u = e^{ln_scale} · value` and `r u'(r) = e^{ln_scale} · slope`.
///
/// For the substituted form `v = r^H u` in `t = ln(D/r)` the same triple
/// stores `v` and `dv/dt` instead.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub ln_scale: f64,
    pub value: f64,
    pub slope: f64,
}

impl Jet {
    pub fn plain(value: f64, slope: f64) -> Self {
        Self {
            ln_scale: 0.0,
            value,
            slope,
        }
    }
}

/// A radial function `u(r)` on `(0, ∞)`, vanishing for `r >= support().1`.
pub trait RadialFunction: Send + Sync {
    /// `(inner, outer)`: `u = 0` outside `[inner, outer]`; `inner = 0` means
    /// the support reaches the singular set.
    fn support(&self) -> (f64, f64);

    /// Value and `r u'` at `r = e^{log_r}`.
    fn jet(&self, log_r: f64) -> Jet;

    /// Radii where `u` is not smooth.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }

    /// `v = r^h u` and `dv/dt` for `t = ln(D/r)` (independent of `D`).
    fn substituted_jet(&self, h: f64, log_r: f64) -> Jet {
        let j = self.jet(log_r);
        Jet {
            ln_scale: j.ln_scale + h * log_r,
            value: j.value,
            slope: -h * j.value - j.slope,
        }
    }
}

/// Closed-form profile given by `u` and `u'`.
#[derive(Clone)]
pub struct FnProfile {
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    df: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    support: (f64, f64),
    breakpoints: Vec<f64>,
}

impl std::fmt::Debug for FnProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FnProfile")
            .field("support", &self.support)
            .field("breakpoints", &self.breakpoints)
            .finish_non_exhaustive()
    }
}

impl FnProfile {
    pub fn new(
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        df: impl Fn(f64) -> f64 + Send + Sync + 'static,
        support: (f64, f64),
    ) -> Self {
        Self {
            f: Arc::new(f),
            df: Arc::new(df),
            support,
            breakpoints: Vec::new(),
        }
    }

    pub fn with_breakpoints(mut self, points: Vec<f64>) -> Self {
        self.breakpoints = points;
        self
    }

    pub fn eval(&self, r: f64) -> f64 {
        if r >= self.support.1 || r < self.support.0 {
            0.0
        } else {
            (self.f)(r)
        }
    }

    pub fn derivative(&self, r: f64) -> f64 {
        if r >= self.support.1 || r < self.support.0 {
            0.0
        } else {
            (self.df)(r)
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let (f, df) = (self.f.clone(), self.df.clone());
        Self {
            f: Arc::new(move |r| factor * f(r)),
            df: Arc::new(move |r| factor * df(r)),
            support: self.support,
            breakpoints: self.breakpoints.clone(),
        }
    }

    /// Samples the profile on `grid`, with slopes from the derivative.
    pub fn sample(&self, grid: &GradedGrid) -> GridProfile {
        GridProfile::from_fn(grid.clone(), |r| self.eval(r), Some(|r| self.derivative(r)))
    }
}

impl RadialFunction for FnProfile {
    fn support(&self) -> (f64, f64) {
        self.support
    }

    fn jet(&self, log_r: f64) -> Jet {
        let r = log_r.exp();
        Jet::plain(self.eval(r), r * self.derivative(r))
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.breakpoints.clone()
    }
}

/// The smooth bump `exp(1 - 1/(1 - s²))`, `s = (r - c)/w`, with peak 1.
pub fn bump(center: f64, width: f64) -> FnProfile {
    let f = move |r: f64| {
        let s = (r - center) / width;
        if s.abs() >= 1.0 {
            0.0
        } else {
            (1.0 - 1.0 / (1.0 - s * s)).exp()
        }
    };
    let df = move |r: f64| {
        let s = (r - center) / width;
        if s.abs() >= 1.0 {
            0.0
        } else {
            let q = 1.0 - s * s;
            (1.0 - 1.0 / q).exp() * (-2.0 * s / (q * q)) / width
        }
    };
    FnProfile::new(f, df, ((center - width).max(0.0), center + width))
}

/// A random sum of one to four smooth bumps with support inside
/// `[δ/200, δ]`.
pub fn random_bump_sum<R: Rng>(rng: &mut R, delta: f64) -> FnProfile {
    let count = rng.gen_range(1..=4);
    let lo = delta / 200.0;
    let bumps: Vec<(f64, f64, f64)> = (0..count)
        .map(|_| {
            let a = rng.gen_range(lo..0.9 * delta);
            let b = rng.gen_range(a + 0.05 * (delta - a)..delta);
            let amplitude = rng.gen_range(0.2..1.0) * if rng.gen_bool(0.8) { 1.0 } else { -1.0 };
            (0.5 * (a + b), 0.5 * (b - a), amplitude)
        })
        .collect();
    let inner = bumps
        .iter()
        .map(|b| b.0 - b.1)
        .fold(f64::INFINITY, f64::min);
    let outer = bumps.iter().map(|b| b.0 + b.1).fold(0.0, f64::max);
    let parts: Vec<(FnProfile, f64)> = bumps.iter().map(|&(c, w, a)| (bump(c, w), a)).collect();
    let parts_d = parts.clone();
    FnProfile::new(
        move |r| parts.iter().map(|(b, a)| a * b.eval(r)).sum(),
        move |r| parts_d.iter().map(|(b, a)| a * b.derivative(r)).sum(),
        (inner, outer),
    )
    .with_breakpoints(
        bumps
            .iter()
            .flat_map(|b| [b.0 - b.1, b.0, b.0 + b.1])
            .collect(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeMode {
    Analytic,
    FiniteDifference,
}

/// A profile sampled on a graded grid and interpolated by cubic Hermite
/// pieces. Below the first node it is extended by its first value; beyond
/// the last node it vanishes.
#[derive(Debug, Clone, PartialEq)]
pub struct GridProfile {
    grid: GradedGrid,
    values: Vec<f64>,
    derivs: Vec<f64>,
    mode: DerivativeMode,
}

/// Weights of the derivative of order `order` at `x0` on the given nodes.
fn fornberg(x0: f64, xs: &[f64], order: usize) -> Vec<f64> {
    let n = xs.len();
    let mut c = vec![vec![0.0; n]; order + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c.pop().unwrap()
}

impl GridProfile {
    /// Samples `f`; node slopes come from `df` when given, otherwise from
    /// fourth-order differences.
    pub fn from_fn<F, G>(grid: GradedGrid, f: F, df: Option<G>) -> Self
    where
        F: Fn(f64) -> f64,
        G: Fn(f64) -> f64,
    {
        let values: Vec<f64> = grid.nodes().iter().map(|&r| f(r)).collect();
        match df {
            Some(df) => {
                let derivs = grid.nodes().iter().map(|&r| df(r)).collect();
                Self {
                    grid,
                    values,
                    derivs,
                    mode: DerivativeMode::Analytic,
                }
            }
            None => Self::from_values(grid, values).expect("grid and values are aligned"),
        }
    }

    /// Node values with slopes from five-point differences on the
    /// (nonuniform) grid.
    pub fn from_values(grid: GradedGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return domain(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return domain("profile values must be finite");
        }
        let nodes = grid.nodes();
        let n = nodes.len();
        let width = n.min(5);
        let derivs = (0..n)
            .map(|i| {
                let start = i.saturating_sub(width / 2).min(n - width);
                let xs = &nodes[start..start + width];
                let w = fornberg(nodes[i], xs, 1);
                w.iter()
                    .zip(&values[start..start + width])
                    .map(|(w, v)| w * v)
                    .sum()
            })
            .collect();
        Ok(Self {
            grid,
            values,
            derivs,
            mode: DerivativeMode::FiniteDifference,
        })
    }

    pub fn grid(&self) -> &GradedGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn node_derivatives(&self) -> &[f64] {
        &self.derivs
    }

    pub fn mode(&self) -> DerivativeMode {
        self.mode
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| factor * v).collect(),
            derivs: self.derivs.iter().map(|v| factor * v).collect(),
            mode: self.mode,
        }
    }

    /// Whether the trailing 2% of nodes (at least one) carry zeros.
    pub fn has_compact_support(&self) -> bool {
        let tail = (self.values.len() / 50).max(1);
        self.values[self.values.len() - tail..]
            .iter()
            .all(|&v| v == 0.0)
    }

    pub fn require_compact_support(&self) -> Result<()> {
        if self.has_compact_support() {
            Ok(())
        } else {
            Err(crate::HardyError::Precondition(
                "profile must vanish on the last 2% of grid nodes".into(),
            ))
        }
    }

    /// `(u(r), u'(r))`.
    pub fn eval(&self, r: f64) -> (f64, f64) {
        let nodes = self.grid.nodes();
        if r < nodes[0] {
            return (self.values[0], 0.0);
        }
        if r >= *nodes.last().unwrap() {
            return (0.0, 0.0);
        }
        let i = nodes.partition_point(|&x| x <= r) - 1;
        let (r0, r1) = (nodes[i], nodes[i + 1]);
        let h = r1 - r0;
        let s = (r - r0) / h;
        let (u0, u1, m0, m1) = (
            self.values[i],
            self.values[i + 1],
            self.derivs[i] * h,
            self.derivs[i + 1] * h,
        );
        let s2 = s * s;
        let s3 = s2 * s;
        let value = (2.0 * s3 - 3.0 * s2 + 1.0) * u0
            + (s3 - 2.0 * s2 + s) * m0
            + (-2.0 * s3 + 3.0 * s2) * u1
            + (s3 - s2) * m1;
        let slope = ((6.0 * s2 - 6.0 * s) * u0
            + (3.0 * s2 - 4.0 * s + 1.0) * m0
            + (-6.0 * s2 + 6.0 * s) * u1
            + (3.0 * s2 - 2.0 * s) * m1)
            / h;
        (value, slope)
    }

    /// Two-column CSV with header `r,value`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["r", "value"])?;
        for (r, v) in self.grid.nodes().iter().zip(&self.values) {
            w.write_record([format!("{r:e}"), format!("{v:e}")])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the format of [`GridProfile::write_csv`]; slopes are rebuilt by
    /// finite differences.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let mut nodes = Vec::new();
        let mut values = Vec::new();
        for row in rdr.deserialize() {
            let (r, v): (f64, f64) = row?;
            nodes.push(r);
            values.push(v);
        }
        Self::from_values(GradedGrid::from_nodes(nodes)?, values)
    }
}

impl RadialFunction for GridProfile {
    fn support(&self) -> (f64, f64) {
        let nodes = self.grid.nodes();
        let first = self.values.iter().position(|&v| v != 0.0);
        let last = self.values.iter().rposition(|&v| v != 0.0);
        match (first, last) {
            (Some(i), Some(j)) => {
                let inner = if i == 0 { 0.0 } else { nodes[i - 1] };
                let outer = nodes[(j + 1).min(nodes.len() - 1)];
                (inner, outer)
            }
            _ => (0.0, 0.0),
        }
    }

    fn jet(&self, log_r: f64) -> Jet {
        let r = log_r.exp();
        let (u, du) = self.eval(r);
        Jet::plain(u, r * du)
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.grid.nodes().to_vec()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fornberg_recovers_classical_weights() {
        let w = fornberg(0.0, &[-2.0, -1.0, 0.0, 1.0, 2.0], 1);
        let expected = [1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0];
        for (a, b) in w.iter().zip(expected) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn finite_difference_slopes_are_fourth_order() {
        let f = |r: f64| (3.0 * r).sin();
        let err = |m: usize| {
            let grid = GradedGrid::power(1.0, m, 2.0).unwrap();
            let p = GridProfile::from_fn(grid.clone(), f, None::<fn(f64) -> f64>);
            grid.nodes()
                .iter()
                .zip(p.node_derivatives())
                .skip(m / 4)
                .map(|(&r, d)| (d - 3.0 * (3.0 * r).cos()).abs())
                .fold(0.0, f64::max)
        };
        let ratio = err(100) / err(200);
        assert!(ratio > 12.0, "ratio {ratio}");
    }

    #[test]
    fn hermite_interpolation_and_extension() {
        let grid = GradedGrid::power(1.0, 400, 2.0).unwrap();
        let p = GridProfile::from_fn(
            grid,
            |r| r * r * (1.0 - r),
            Some(|r: f64| 2.0 * r - 3.0 * r * r),
        );
        let (v, d) = p.eval(0.37);
        assert!((v - 0.37 * 0.37 * 0.63).abs() < 1e-12);
        assert!((d - (0.74 - 3.0 * 0.37 * 0.37)).abs() < 1e-9);
        assert_eq!(p.eval(1.5), (0.0, 0.0));
        assert_eq!(p.eval(1e-9).1, 0.0);
    }

    #[test]
    fn csv_roundtrip() {
        let grid = GradedGrid::power(1.0, 50, 3.0).unwrap();
        let p = GridProfile::from_fn(grid, |r| (1.0 - r).powi(3), None::<fn(f64) -> f64>);
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let back = GridProfile::read_csv(buf.as_slice()).unwrap();
        for (a, b) in back.values().iter().zip(p.values()) {
            assert!((a - b).abs() <= 1e-15 * b.abs().max(1e-300) * 10.0);
        }
        assert_eq!(back.grid().len(), 50);
    }

    #[test]
    fn compact_support_flag() {
        let grid = GradedGrid::power(1.0, 100, 1.0).unwrap();
        let p = GridProfile::from_fn(
            grid.clone(),
            |r| (0.95 - r).max(0.0),
            None::<fn(f64) -> f64>,
        );
        assert!(p.has_compact_support());
        let q = GridProfile::from_fn(grid, |r| 1.0 - r + 0.5, None::<fn(f64) -> f64>);
        assert!(q.require_compact_support().is_err());
    }

    #[test]
    fn bump_derivative_matches_difference_quotient() {
        let b = bump(0.45, 0.15);
        for &r in &[0.35, 0.41, 0.5, 0.58] {
            let h = 1e-6;
            let fd = (b.eval(r + h) - b.eval(r - h)) / (2.0 * h);
            assert!((fd - b.derivative(r)).abs() < 1e-6);
        }
    }
}
