use serde::{Deserialize, Serialize};

use crate::error::{parameter, Result};

/// The exponent `p`, codimension `k` of `K`, ambient dimension `N` and the
/// length scale `D` of the logarithmic weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HardyParams {
    pub p: f64,
    pub k: usize,
    pub n: usize,
    pub d: f64,
}

impl HardyParams {
    pub fn new(p: f64, k: usize, n: usize, d: f64) -> Result<Self> {
        let params = Self { p, k, n, d };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 1.0 && self.p.is_finite()) {
            return parameter(format!("p must satisfy 1 < p < ∞, got {}", self.p));
        }
        if self.n == 0 || self.k == 0 || self.k > self.n {
            return parameter(format!(
                "codimension must satisfy 1 <= k <= N, got k = {}, N = {}",
                self.k, self.n
            ));
        }
        if !(self.d > 0.0 && self.d.is_finite()) {
            return parameter(format!("D must be positive and finite, got {}", self.d));
        }
        Ok(())
    }

    pub fn kf(&self) -> f64 {
        self.k as f64
    }

    /// `H = (k - p)/p`.
    pub fn h(&self) -> f64 {
        (self.kf() - self.p) / self.p
    }

    pub fn is_degenerate(&self) -> bool {
        self.kf() == self.p
    }

    /// The sharp Hardy constant `|H|^p`.
    pub fn sharp_constant(&self) -> f64 {
        self.h().abs().powf(self.p)
    }

    /// The sharp remainder constant `(p-1)/(2p) |H|^{p-2}` (`p != k`).
    pub fn remainder_constant(&self) -> f64 {
        (self.p - 1.0) / (2.0 * self.p) * self.h().abs().powf(self.p - 2.0)
    }

    /// `((p-1)/p)^p`, the constant of the `p = k` inequality.
    pub fn degenerate_constant(&self) -> f64 {
        ((self.p - 1.0) / self.p).powf(self.p)
    }

    pub fn with_d(mut self, d: f64) -> Self {
        self.d = d;
        self
    }
}
