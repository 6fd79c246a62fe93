//! Least-squares fits and the sweep report format shared by all
//! asymptotic experiments.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Ordinary least squares `y = slope·x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
    pub intercept_se: f64,
    pub points: usize,
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    let n = xs.len();
    if n != ys.len() || n < 2 {
        return domain(format!(
            "line fit needs >= 2 paired points, got {n} and {}",
            ys.len()
        ));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return domain("line fit needs at least two distinct abscissae");
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let (slope_se, intercept_se) = if n > 2 {
        let rss: f64 = xs
            .iter()
            .zip(ys)
            .map(|(x, y)| (y - slope * x - intercept).powi(2))
            .sum();
        let s2 = rss / (nf - 2.0);
        let sum_x2: f64 = xs.iter().map(|x| x * x).sum();
        ((s2 / sxx).sqrt(), (s2 * sum_x2 / (nf * sxx)).sqrt())
    } else {
        (f64::INFINITY, f64::INFINITY)
    };
    Ok(LineFit {
        slope,
        intercept,
        slope_se,
        intercept_se,
        points: n,
    })
}

/// A fitted number with a symmetric confidence half-width (two standard
/// errors).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fitted {
    pub value: f64,
    pub half_width: f64,
}

impl Fitted {
    pub fn from_slope(fit: &LineFit) -> Self {
        Self {
            value: fit.slope,
            half_width: 2.0 * fit.slope_se,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub epsilon: f64,
    pub value: f64,
    pub numerator: f64,
    pub denominator: f64,
}

/// Measured ratios along a decreasing parameter, with fitted asymptotics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub name: String,
    /// Sorted by increasing `epsilon`.
    pub rows: Vec<SweepRow>,
    pub fitted_exponent: Option<Fitted>,
    pub fitted_limit: Option<Fitted>,
    /// Log-log slopes of numerator and denominator in `epsilon`.
    pub numerator_exponent: Option<Fitted>,
    pub denominator_exponent: Option<Fitted>,
    /// The value the fit is compared with.
    pub target: Option<f64>,
    pub tolerance: Option<f64>,
    pub verdict: Option<bool>,
    pub notes: Vec<String>,
}

impl SweepReport {
    pub fn new(name: &str, mut rows: Vec<SweepRow>) -> Self {
        rows.sort_by(|a, b| a.epsilon.total_cmp(&b.epsilon));
        Self {
            name: name.to_string(),
            rows,
            fitted_exponent: None,
            fitted_limit: None,
            numerator_exponent: None,
            denominator_exponent: None,
            target: None,
            tolerance: None,
            verdict: None,
            notes: Vec::new(),
        }
    }

    /// The smallest-`epsilon` half of the rows (at least three).
    pub fn fit_rows(&self) -> &[SweepRow] {
        let n = self.rows.len();
        let half = n.div_ceil(2).max(3).min(n);
        &self.rows[..half]
    }

    fn log_slope(&self, pick: impl Fn(&SweepRow) -> f64) -> Result<Fitted> {
        let rows = self.fit_rows();
        let xs: Vec<f64> = rows.iter().map(|r| r.epsilon.ln()).collect();
        let ys: Vec<f64> = rows.iter().map(|r| pick(r).abs().ln()).collect();
        Ok(Fitted::from_slope(&fit_line(&xs, &ys)?))
    }

    /// Fits `value ~ C ε^s` and stores `s`.
    pub fn fit_exponent(&mut self) -> Result<Fitted> {
        let f = self.log_slope(|r| r.value)?;
        self.fitted_exponent = Some(f);
        Ok(f)
    }

    /// Fits the log-log slopes of numerator and denominator.
    pub fn fit_component_exponents(&mut self) -> Result<(Fitted, Fitted)> {
        let n = self.log_slope(|r| r.numerator)?;
        let d = self.log_slope(|r| r.denominator)?;
        self.numerator_exponent = Some(n);
        self.denominator_exponent = Some(d);
        Ok((n, d))
    }

    /// The limit of `numerator/denominator` when both diverge: the slope of
    /// the regression of the numerator on the denominator, which ignores
    /// bounded additive terms in either.
    pub fn fit_limit(&mut self) -> Result<Fitted> {
        let rows = self.fit_rows();
        // A common scale keeps the sums of squares finite; the slope is unchanged.
        let scale = rows.iter().map(|r| r.denominator.abs()).fold(0.0, f64::max);
        let xs: Vec<f64> = rows.iter().map(|r| r.denominator / scale).collect();
        let ys: Vec<f64> = rows.iter().map(|r| r.numerator / scale).collect();
        let f = Fitted::from_slope(&fit_line(&xs, &ys)?);
        self.fitted_limit = Some(f);
        Ok(f)
    }

    pub fn judge(&mut self, target: f64, tolerance: f64, pass: bool) {
        self.target = Some(target);
        self.tolerance = Some(tolerance);
        self.verdict = Some(pass);
    }

    /// CSV with header `epsilon,value`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["epsilon", "value"])?;
        for r in &self.rows {
            w.write_record([format!("{:e}", r.epsilon), format!("{:e}", r.value)])?;
        }
        w.flush()?;
        Ok(())
    }

    /// CSV with numerator and denominator columns as well.
    pub fn write_detailed_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }
}
