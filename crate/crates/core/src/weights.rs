//! The logarithmic weight `X(t) = -1/ln t` on `(0, 1)`.
//!
//! Callers evaluate `X(r/D)` with `D` strictly larger than every distance in
//! play, so `t` stays away from 1. Arguments closer to 1 than [`T_MAX_GAP`]
//! are rejected as overflow rather than returning a huge but meaningless
//! value.

use crate::error::{domain, HardyError, Result};

/// Arguments in `(1 - T_MAX_GAP, 1)` are reported as overflow.
pub const T_MAX_GAP: f64 = 1e-12;

fn check_unit(t: f64) -> Result<()> {
    if !(t > 0.0 && t < 1.0) {
        return domain(format!("X(t) requires 0 < t < 1, got {t}"));
    }
    if t > 1.0 - T_MAX_GAP {
        return Err(HardyError::Overflow(format!(
            "X(t) blows up as t -> 1; t = {t} is within {T_MAX_GAP:e} of 1"
        )));
    }
    Ok(())
}

/// `X(t) = -1/ln t`.
pub fn x_eval(t: f64) -> Result<f64> {
    check_unit(t)?;
    Ok(-1.0 / t.ln())
}

/// `X(t)^beta`, with `X(0+)^beta = 0` for `beta > 0`.
pub fn x_power(t: f64, beta: f64) -> Result<f64> {
    if t == 0.0 && beta > 0.0 {
        return Ok(0.0);
    }
    if beta == 0.0 {
        check_unit(t)?;
        return Ok(1.0);
    }
    Ok(x_eval(t)?.powf(beta))
}

/// Closed form of `∫_{s1}^{s2} r^{-1} X^{beta+1}(r) dr = (X^beta(s2) - X^beta(s1)) / beta`.
///
/// `s1 = 0` is accepted for `beta > 0`, where `X^beta(0+) = 0`.
pub fn x_power_antiderivative(beta: f64, s1: f64, s2: f64) -> Result<f64> {
    if beta == 0.0 || !beta.is_finite() {
        return domain("antiderivative of r^-1 X^(beta+1) needs beta != 0");
    }
    if !(s1 >= 0.0 && s2 > s1) {
        return domain(format!("need 0 <= s1 < s2 < 1, got s1 = {s1}, s2 = {s2}"));
    }
    if s1 == 0.0 && beta < 0.0 {
        return domain("s1 = 0 only allowed for beta > 0 (the integral diverges otherwise)");
    }
    Ok((x_power(s2, beta)? - x_power(s1, beta)?) / beta)
}

/// A length scale `D` turning distances into arguments of `X`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogWeightScale {
    d: f64,
}

impl LogWeightScale {
    pub fn new(d: f64) -> Result<Self> {
        if !(d > 0.0 && d.is_finite()) {
            return domain(format!(
                "length scale D must be positive and finite, got {d}"
            ));
        }
        Ok(Self { d })
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    /// `X(r/D)`.
    pub fn x(&self, r: f64) -> Result<f64> {
        x_eval(r / self.d)
    }

    /// `X(r/D)^beta`.
    pub fn x_pow(&self, r: f64, beta: f64) -> Result<f64> {
        x_power(r / self.d, beta)
    }

    /// The log variable `t = ln(D/r)`, so that `X(r/D) = 1/t`.
    pub fn log_distance(&self, r: f64) -> f64 {
        (self.d / r).ln()
    }
}
