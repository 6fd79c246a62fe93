//! The vector-field argument as an executable certificate.
//!
//! For `p != k` the field `T = H|H|^{p-2} d^{1-p} ∇d · b(X)` with
//! `b(t) = 1 + (p-1)/(pH) t + a t²` yields the improved inequality as soon as
//! `f(t) >= 1 + (p-1)/(2pH²) t²` on the range `[0, M]` of `X(d/D)`. This
//! module evaluates `f`, locates a certified `M0`, and spot-checks the
//! auxiliary pointwise and one-dimensional inequalities.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, parameter, HardyError, Result};
use crate::functionals::{weighted_gradient_integral, weighted_integral};
use crate::geometry::KGeometry;
use crate::params::HardyParams;
use crate::profile::RadialFunction;
use crate::quadrature::{QuadOptions, RadialMeasure};

/// Which branch of the case analysis a parameter pair falls in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseTag {
    /// `1 < p < 2 <= k`.
    #[serde(rename = "a")]
    A,
    /// `2 <= p < k`.
    #[serde(rename = "b")]
    B,
    /// `k = 1 < p < 2`.
    #[serde(rename = "c")]
    C,
    /// `p >= 2`, `p > k`.
    #[serde(rename = "d")]
    D,
    #[serde(rename = "degenerate")]
    Degenerate,
}

impl CaseTag {
    /// Every admissible `(p, k)` lands in exactly one case; with integer `k`,
    /// `1 < p < 2` and `p > k` force `k = 1`.
    pub fn classify(params: &HardyParams) -> Result<Self> {
        params.validate()?;
        let (p, k) = (params.p, params.kf());
        Ok(if p == k {
            CaseTag::Degenerate
        } else if p < k {
            if p < 2.0 {
                CaseTag::A
            } else {
                CaseTag::B
            }
        } else if p < 2.0 {
            CaseTag::C
        } else {
            CaseTag::D
        })
    }
}

/// `(2-p)(p-1)/(6p²H²)`: the sign of `f'''(0)` changes at `a` equal to this.
pub fn third_derivative_threshold(params: &HardyParams) -> f64 {
    let (p, h) = (params.p, params.h());
    (2.0 - p) * (p - 1.0) / (6.0 * p * p * h * h)
}

/// The lower bound `(2-p)/(6(p-1))` imposed on `a` in case (a).
pub fn case_a_stated_bound(p: f64) -> f64 {
    (2.0 - p) / (6.0 * (p - 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VectorFieldSpec {
    pub params: HardyParams,
    pub a: f64,
    pub case_tag: CaseTag,
}

impl VectorFieldSpec {
    pub fn new(params: HardyParams, a: f64) -> Result<Self> {
        let spec = Self {
            params,
            a,
            case_tag: CaseTag::classify(&params)?,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// The default `a` of each case: clear of the case-(a) bounds, zero in
    /// case (b), the midpoint of the case-(c) window, and a step below the
    /// case-(d) threshold.
    pub fn default_a(params: &HardyParams) -> Result<f64> {
        Ok(match CaseTag::classify(params)? {
            CaseTag::A => {
                case_a_stated_bound(params.p).max(third_derivative_threshold(params)) + 0.1
            }
            CaseTag::B | CaseTag::Degenerate => 0.0,
            CaseTag::C => 0.5 * third_derivative_threshold(params),
            CaseTag::D => {
                let bound = third_derivative_threshold(params);
                bound - bound.abs().max(0.05)
            }
        })
    }

    pub fn with_default_a(params: HardyParams) -> Result<Self> {
        Self::new(params, Self::default_a(&params)?)
    }

    pub fn validate(&self) -> Result<()> {
        let tag = CaseTag::classify(&self.params)?;
        if tag != self.case_tag {
            return parameter(format!(
                "case tag {:?} does not match p = {}, k = {} (expected {:?})",
                self.case_tag, self.params.p, self.params.k, tag
            ));
        }
        let a = self.a;
        if !a.is_finite() {
            return parameter(format!("a must be finite, got {a}"));
        }
        let p = self.params.p;
        match tag {
            CaseTag::A => {
                let bound = case_a_stated_bound(p);
                if !(a > bound) {
                    return parameter(format!(
                        "case (a) needs a > (2-p)/(6(p-1)) = {bound}, got {a}"
                    ));
                }
            }
            CaseTag::B => {
                if a != 0.0 {
                    return parameter(format!("case (b) needs a = 0, got {a}"));
                }
            }
            CaseTag::C => {
                let bound = third_derivative_threshold(&self.params);
                if !(a > 0.0 && a < bound) {
                    return parameter(format!(
                        "case (c) needs 0 < a < (2-p)(p-1)/(6p²H²) = {bound}, got {a}"
                    ));
                }
            }
            CaseTag::D => {
                let bound = third_derivative_threshold(&self.params);
                if !(a < bound) {
                    return parameter(format!(
                        "case (d) needs a < (2-p)(p-1)/(6p²H²) = {bound}, got {a}"
                    ));
                }
            }
            CaseTag::Degenerate => {}
        }
        Ok(())
    }

    fn require_nondegenerate(&self) -> Result<()> {
        if self.case_tag == CaseTag::Degenerate {
            return parameter("p = k uses the logarithmic field; f is not defined");
        }
        Ok(())
    }

    /// `b(t) = 1 + (p-1)/(pH) t + a t²`.
    pub fn b(&self, t: f64) -> f64 {
        let (p, h) = (self.params.p, self.params.h());
        1.0 + (p - 1.0) / (p * h) * t + self.a * t * t
    }

    /// The target coefficient `(p-1)/(2pH²)`.
    pub fn margin_coefficient(&self) -> f64 {
        let (p, h) = (self.params.p, self.params.h());
        (p - 1.0) / (2.0 * p * h * h)
    }
}

/// `f` and its first three derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FValue {
    pub f: f64,
    pub df: f64,
    pub d2f: f64,
    pub d3f: f64,
}

/// `f(t) = p b + (1/H)((p-1)/(pH) t² + 2a t³) - (p-1) b^{p/(p-1)}`.
pub fn f_eval(spec: &VectorFieldSpec, t: f64) -> Result<FValue> {
    spec.require_nondegenerate()?;
    if !(t >= 0.0) {
        return domain(format!("f is evaluated on t >= 0, got {t}"));
    }
    let (p, h, a) = (spec.params.p, spec.params.h(), spec.a);
    let c1 = (p - 1.0) / (p * h);
    let b = spec.b(t);
    if !(b > 0.0) {
        return domain(format!("1 + (p-1)/(pH) t + a t² = {b} <= 0 at t = {t}"));
    }
    let m = p / (p - 1.0);
    let db = c1 + 2.0 * a * t;
    let bm = b.powf(m);
    let bm1 = bm / b;
    let bm2 = bm1 / b;
    let bm3 = bm2 / b;
    let f = p * b + (c1 * t * t + 2.0 * a * t * t * t) / h - (p - 1.0) * bm;
    let df = p * db + (2.0 * c1 * t + 6.0 * a * t * t) / h - p * bm1 * db;
    let d2f = 2.0 * p * a + (2.0 * c1 + 12.0 * a * t) / h
        - p * ((m - 1.0) * bm2 * db * db + 2.0 * a * bm1);
    let d3f = 12.0 * a / h
        - p * ((m - 1.0) * (m - 2.0) * bm3 * db * db * db + 6.0 * a * (m - 1.0) * bm2 * db);
    Ok(FValue { f, df, d2f, d3f })
}

/// `f(t) - 1 - (p-1)/(2pH²) t²`.
pub fn margin(spec: &VectorFieldSpec, t: f64) -> Result<f64> {
    let v = f_eval(spec, t)?;
    Ok(v.f - 1.0 - spec.margin_coefficient() * t * t)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertifyOptions {
    /// Grid nodes for both the `M0` search and the margin scan.
    pub nodes: usize,
    /// Search horizon; `M0` is capped here.
    pub horizon: f64,
    /// The working `M`; the margin is scanned on `[0, min(M0, M)]`.
    pub working_m: Option<f64>,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self {
            nodes: 10_000,
            horizon: 50.0,
            working_m: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateReport {
    pub spec: VectorFieldSpec,
    #[serde(rename = "M0")]
    pub m0: f64,
    #[serde(rename = "D0")]
    pub d0: f64,
    pub min_margin: f64,
    pub verified: bool,
    pub sup_d: f64,
    pub scanned_to: f64,
    pub nodes: usize,
    pub notes: Vec<String>,
}

/// Tolerance on `min_margin` for rounding.
pub const MARGIN_TOLERANCE: f64 = 1e-10;

pub fn certify(
    spec: &VectorFieldSpec,
    sup_d: f64,
    options: &CertifyOptions,
) -> Result<CertificateReport> {
    spec.validate()?;
    spec.require_nondegenerate()?;
    if !(sup_d > 0.0 && sup_d.is_finite()) {
        return parameter(format!("sup d must be positive, got {sup_d}"));
    }
    if options.nodes < 2 || !(options.horizon > 0.0) {
        return parameter("certification needs at least 2 nodes and a positive horizon");
    }
    let mut notes = Vec::new();
    let step = options.horizon / (options.nodes - 1) as f64;
    // Failure of either monotonicity of f'' or positivity of b ends the range.
    let bad = |t: f64| -> bool {
        if !(spec.b(t) > 0.0) {
            return true;
        }
        spec.case_tag != CaseTag::B && f_eval(spec, t).map(|v| !(v.d3f > 0.0)).unwrap_or(true)
    };
    let m0 = if spec.case_tag == CaseTag::B {
        if (1..options.nodes).any(|i| !(spec.b(i as f64 * step) > 0.0)) {
            return Err(HardyError::Precondition("b(t) vanishes in case (b)".into()));
        }
        notes.push(format!(
            "case (b): f''' > 0 for all t > 0; M0 capped at {}",
            options.horizon
        ));
        options.horizon
    } else if bad(0.0) {
        notes.push("f'''(0) <= 0: no interval on which f'' increases".into());
        0.0
    } else {
        match (1..options.nodes).find(|&i| bad(i as f64 * step)) {
            None => options.horizon,
            Some(i) => {
                let (mut lo, mut hi) = ((i - 1) as f64 * step, i as f64 * step);
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    if bad(mid) {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                lo
            }
        }
    };
    let d0 = if spec.case_tag == CaseTag::B {
        sup_d
    } else if m0 > 0.0 {
        (1.0 / m0).exp() * sup_d
    } else {
        f64::INFINITY
    };
    let scanned_to = options.working_m.map_or(m0, |m| m.min(m0));
    let min_margin = if scanned_to > 0.0 {
        let h = scanned_to / (options.nodes - 1) as f64;
        let margins: Result<Vec<f64>> = (0..options.nodes)
            .map(|i| margin(spec, i as f64 * h))
            .collect();
        margins?.into_iter().fold(f64::INFINITY, f64::min)
    } else {
        margin(spec, 0.0)?
    };
    let verified = m0 > 0.0 && min_margin >= -MARGIN_TOLERANCE;
    Ok(CertificateReport {
        spec: *spec,
        m0,
        d0,
        min_margin,
        verified,
        sup_d,
        scanned_to,
        nodes: options.nodes,
        notes,
    })
}

/// `T(x)` and the pointwise inequality it is meant to satisfy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivergenceCheck {
    pub d: f64,
    pub weight: f64,
    /// `div T - (p-1)|T|^{p/(p-1)}`.
    pub lhs: f64,
    pub rhs: f64,
}

impl DivergenceCheck {
    pub fn relative_defect(&self) -> f64 {
        (self.lhs - self.rhs) / self.rhs.abs()
    }
}

fn field_at(spec: &VectorFieldSpec, geom: &KGeometry, x: &[f64], big_d: f64) -> Result<Vec<f64>> {
    let s = geom.distance_eval(x)?;
    let p = spec.params.p;
    let t = -1.0 / (s.d / big_d).ln();
    let amp = match spec.case_tag {
        CaseTag::Degenerate => ((p - 1.0) / p).powf(p - 1.0) * t.powf(p - 1.0),
        _ => {
            let h = spec.params.h();
            h * h.abs().powf(p - 2.0) * spec.b(t)
        }
    } * s.d.powf(1.0 - p);
    Ok(s.grad_d.iter().map(|g| amp * g).collect())
}

/// Differences-based check of the field inequality at `x` for `D = big_d`.
pub fn divergence_check(
    spec: &VectorFieldSpec,
    geom: &KGeometry,
    x: &[f64],
    big_d: f64,
) -> Result<DivergenceCheck> {
    let s = geom.distance_eval(x)?;
    if !(s.d < big_d) {
        return domain(format!("d = {} must lie below D = {big_d}", s.d));
    }
    let p = spec.params.p;
    let weight = -1.0 / (s.d / big_d).ln();
    // X varies on the scale d/X, which is much shorter than d near D.
    let h = 1e-3 * s.d * (1.0 / weight).min(1.0);
    let mut div = 0.0;
    let mut probe = x.to_vec();
    for i in 0..x.len() {
        let mut comp = |offset: f64| -> Result<f64> {
            probe[i] = x[i] + offset;
            let t = field_at(spec, geom, &probe, big_d)?;
            probe[i] = x[i];
            Ok(t[i])
        };
        let (f2, f1, fm1, fm2) = (comp(2.0 * h)?, comp(h)?, comp(-h)?, comp(-2.0 * h)?);
        div += (-f2 + 8.0 * f1 - 8.0 * fm1 + fm2) / (12.0 * h);
    }
    let t = field_at(spec, geom, x, big_d)?;
    let norm = t.iter().map(|c| c * c).sum::<f64>().sqrt();
    let lhs = div - (p - 1.0) * norm.powf(p / (p - 1.0));
    let rhs = match spec.case_tag {
        CaseTag::Degenerate => spec.params.degenerate_constant() * s.d.powf(-p) * weight.powf(p),
        _ => {
            spec.params.sharp_constant()
                * s.d.powf(-p)
                * (1.0 + spec.margin_coefficient() * weight * weight)
        }
    };
    Ok(DivergenceCheck {
        d: s.d,
        weight,
        lhs,
        rhs,
    })
}

/// The three pointwise inequalities behind the linearisation of `|a - b|^p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LemmaBranch {
    /// `1 < p < 2`, majorant `|b|²/(|a|+|b|)^{2-p}`.
    #[serde(rename = "i")]
    Subquadratic,
    /// `p >= 2`, majorant `|a|^{p-2}|b|²`.
    #[serde(rename = "ii_a")]
    Quadratic,
    /// `p >= 2`, majorant `|b|^p`.
    #[serde(rename = "ii_b")]
    Power,
}

/// `|b|/|a|` strata; the proof splits at `1/2`.
pub const RATIO_STRATA: [f64; 7] = [0.01, 0.1, 0.49, 0.51, 1.0, 2.0, 10.0];
pub const SAMPLER_DIMENSIONS: [usize; 4] = [1, 2, 3, 8];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchMargin {
    pub branch: LemmaBranch,
    pub infimum: f64,
    /// Infimum over the strata with `|b| <= |a|/2` (quadratic branch only).
    pub restricted_infimum: Option<f64>,
    /// `p/2^{p-2}`, the constant the Taylor step asserts on that range.
    pub stated_bound: Option<f64>,
    /// `p/2^{p-1}`, what the Taylor step gives with the factor `1/2` kept.
    pub corrected_bound: Option<f64>,
    pub positive: bool,
    pub stated_bound_holds: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointwiseReport {
    pub p: f64,
    pub samples: usize,
    pub seed: u64,
    pub branches: Vec<BranchMargin>,
}

impl PointwiseReport {
    pub fn passed(&self) -> bool {
        self.branches
            .iter()
            .all(|b| b.positive && b.stated_bound_holds.unwrap_or(true))
    }
}

fn gaussian<R: Rng>(rng: &mut R, dim: usize) -> Vec<f64> {
    (0..dim)
        .map(|_| {
            let u1: f64 = 1.0 - rng.gen::<f64>();
            let u2: f64 = rng.gen();
            (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
        })
        .collect()
}

fn linearisation_margin(p: f64, a: &[f64], b: &[f64]) -> f64 {
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let amb = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt();
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    amb.powf(p) - na.powf(p) + p * na.powf(p - 2.0) * dot
}

/// Empirical infima of `(|a-b|^p - |a|^p + p|a|^{p-2} a·b) / majorant` over
/// random pairs stratified by dimension and `|b|/|a|`.
pub fn pointwise_margin_sampler(p: f64, samples: usize, seed: u64) -> Result<PointwiseReport> {
    if !(p > 1.0 && p.is_finite()) {
        return parameter(format!("p must exceed 1, got {p}"));
    }
    if samples == 0 {
        return parameter("at least one sample is needed");
    }
    let branches: Vec<LemmaBranch> = if p < 2.0 {
        vec![LemmaBranch::Subquadratic]
    } else {
        vec![LemmaBranch::Quadratic, LemmaBranch::Power]
    };
    let strata: Vec<(usize, usize, f64)> = SAMPLER_DIMENSIONS
        .iter()
        .enumerate()
        .flat_map(|(i, &dim)| {
            RATIO_STRATA
                .iter()
                .enumerate()
                .map(move |(j, &r)| (i * RATIO_STRATA.len() + j, dim, r))
        })
        .collect();
    let per = samples.div_ceil(strata.len());
    // One infimum per (stratum, branch); each stratum owns its seed stream.
    let table: Vec<(f64, Vec<f64>)> = strata
        .par_iter()
        .map(|&(index, dim, ratio)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(index as u64);
            let mut inf = vec![f64::INFINITY; branches.len()];
            for _ in 0..per {
                let a = gaussian(&mut rng, dim);
                let dir = gaussian(&mut rng, dim);
                let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
                let nd = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
                if !(na > 0.0 && nd > 0.0) {
                    continue;
                }
                let b: Vec<f64> = dir.iter().map(|x| x * ratio * na / nd).collect();
                let nb = ratio * na;
                let lhs = linearisation_margin(p, &a, &b);
                for (slot, branch) in inf.iter_mut().zip(&branches) {
                    let major = match branch {
                        LemmaBranch::Subquadratic => nb * nb / (na + nb).powf(2.0 - p),
                        LemmaBranch::Quadratic => na.powf(p - 2.0) * nb * nb,
                        LemmaBranch::Power => nb.powf(p),
                    };
                    *slot = slot.min(lhs / major);
                }
            }
            (ratio, inf)
        })
        .collect();
    let out = branches
        .iter()
        .enumerate()
        .map(|(i, &branch)| {
            let infimum = table
                .iter()
                .map(|(_, v)| v[i])
                .fold(f64::INFINITY, f64::min);
            let quadratic = branch == LemmaBranch::Quadratic;
            let restricted_infimum = quadratic.then(|| {
                table
                    .iter()
                    .filter(|(r, _)| *r <= 0.5)
                    .map(|(_, v)| v[i])
                    .fold(f64::INFINITY, f64::min)
            });
            let stated_bound = quadratic.then(|| p / 2f64.powf(p - 2.0));
            BranchMargin {
                branch,
                infimum,
                restricted_infimum,
                stated_bound,
                corrected_bound: quadratic.then(|| p / 2f64.powf(p - 1.0)),
                positive: infimum > 0.0,
                stated_bound_holds: restricted_infimum
                    .zip(stated_bound)
                    .map(|(v, s)| v >= s - 1e-9),
            }
        })
        .collect();
    Ok(PointwiseReport {
        p,
        samples: per * strata.len(),
        seed,
        branches: out,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AppendixLemma {
    /// `∫|v'|^p r^{p-1} X^α dr >= c (∫|v|^q r^{-1} X^{1+(α+p-1)q/p} dr)^{p/q}` on `(0, 1)`.
    OneDimensionalHardy,
    /// `∫|v|^q d^{-N+(N-k)q/p} X^{αq/p} <= c (∫|∇v|^p d^{p-k} X^α + ∫|v|^p d^{-k} X^α)^{q/p}`.
    WeightedSobolev,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpotCheckRow {
    pub profile: usize,
    pub lhs: f64,
    pub rhs: f64,
    /// The empirical constant: smaller side over larger side, normalised so
    /// that the inequality holds with this `c` for this profile.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpotCheckTable {
    pub lemma: AppendixLemma,
    pub p: f64,
    pub q: f64,
    pub alpha: f64,
    pub rows: Vec<SpotCheckRow>,
    /// Profiles with both sides zero, left out of the infimum.
    pub skipped: usize,
    pub infimum: f64,
    pub passed: bool,
}

impl SpotCheckTable {
    fn finish(
        lemma: AppendixLemma,
        p: f64,
        q: f64,
        alpha: f64,
        rows: Vec<SpotCheckRow>,
        skipped: usize,
    ) -> Self {
        let infimum = rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
        let passed = !rows.is_empty() && infimum > 0.0 && infimum.is_finite();
        Self {
            lemma,
            p,
            q,
            alpha,
            rows,
            skipped,
            infimum,
            passed,
        }
    }

    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["lemma", "profile", "lhs", "rhs", "ratio"])?;
        let lemma = match self.lemma {
            AppendixLemma::OneDimensionalHardy => "one_dimensional_hardy",
            AppendixLemma::WeightedSobolev => "weighted_sobolev",
        };
        for r in &self.rows {
            w.write_record([
                lemma.to_string(),
                r.profile.to_string(),
                format!("{:e}", r.lhs),
                format!("{:e}", r.rhs),
                format!("{:e}", r.ratio),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// The one-dimensional weighted Hardy inequality on `(0, 1)` with `X = X(r)`.
pub fn one_dimensional_hardy_check(
    p: f64,
    q: f64,
    alpha: f64,
    profiles: &[&dyn RadialFunction],
    opts: &QuadOptions,
) -> Result<SpotCheckTable> {
    if !(q >= p) || !(alpha > -(p - 1.0)) {
        return parameter(format!(
            "needs q >= p and α > -(p-1), got p = {p}, q = {q}, α = {alpha}"
        ));
    }
    let params = HardyParams::new(p, 1, 1, 1.0)?;
    let measure = RadialMeasure::Boundary;
    let mut rows = Vec::new();
    let mut skipped = 0;
    for (i, v) in profiles.iter().enumerate() {
        if v.support().1 > 1.0 {
            return domain(format!("profile {i} reaches beyond r = 1"));
        }
        let lhs = weighted_gradient_integral(&params, *v, &measure, p, p - 1.0, alpha, opts)?.value;
        let inner = weighted_integral(
            &params,
            *v,
            &measure,
            q,
            -1.0,
            1.0 + (alpha + p - 1.0) * q / p,
            opts,
        )?
        .value;
        if lhs == 0.0 && inner == 0.0 {
            skipped += 1;
            continue;
        }
        let rhs = inner.powf(p / q);
        rows.push(SpotCheckRow {
            profile: i,
            lhs,
            rhs,
            ratio: lhs / rhs,
        });
    }
    Ok(SpotCheckTable::finish(
        AppendixLemma::OneDimensionalHardy,
        p,
        q,
        alpha,
        rows,
        skipped,
    ))
}

/// The weighted Sobolev inequality for radial profiles about `K`.
pub fn weighted_sobolev_check(
    params: &HardyParams,
    measure: &RadialMeasure,
    q: f64,
    alpha: f64,
    profiles: &[&dyn RadialFunction],
    opts: &QuadOptions,
) -> Result<SpotCheckTable> {
    params.validate()?;
    let (p, n, k) = (params.p, params.n as f64, params.kf());
    if !(p < n) || !(q > p && q <= n * p / (n - p)) {
        return parameter(format!(
            "needs 1 < p < N and p < q <= Np/(N-p), got p = {p}, q = {q}, N = {n}"
        ));
    }
    let mut rows = Vec::new();
    let mut skipped = 0;
    for (i, v) in profiles.iter().enumerate() {
        if v.support().1 >= params.d {
            return domain(format!("profile {i} reaches D = {}", params.d));
        }
        let lhs = weighted_integral(
            params,
            *v,
            measure,
            q,
            -n + (n - k) * q / p,
            alpha * q / p,
            opts,
        )?
        .value;
        let grad = weighted_gradient_integral(params, *v, measure, p, p - k, alpha, opts)?.value;
        let zero = weighted_integral(params, *v, measure, p, -k, alpha, opts)?.value;
        let rhs = (grad + zero).powf(q / p);
        if lhs == 0.0 && rhs == 0.0 {
            skipped += 1;
            continue;
        }
        rows.push(SpotCheckRow {
            profile: i,
            lhs,
            rhs,
            ratio: rhs / lhs,
        });
    }
    Ok(SpotCheckTable::finish(
        AppendixLemma::WeightedSobolev,
        p,
        q,
        alpha,
        rows,
        skipped,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AppendixSettings {
    pub alpha: f64,
    pub q_hardy: f64,
    pub q_sobolev: f64,
}

/// Both appendix inequalities on one family of profiles. The one-dimensional
/// check runs on `(0, 1)`; the Sobolev check needs `p < N`.
pub fn appendix_spot_checks(
    params: &HardyParams,
    measure: &RadialMeasure,
    settings: &AppendixSettings,
    profiles: &[&dyn RadialFunction],
    opts: &QuadOptions,
) -> Result<Vec<SpotCheckTable>> {
    let mut out = vec![one_dimensional_hardy_check(
        params.p,
        settings.q_hardy,
        settings.alpha,
        profiles,
        opts,
    )?];
    if params.p < params.n as f64 {
        out.push(weighted_sobolev_check(
            params,
            measure,
            settings.q_sobolev,
            settings.alpha,
            profiles,
            opts,
        )?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(p: f64, k: usize) -> VectorFieldSpec {
        VectorFieldSpec::with_default_a(HardyParams::new(p, k, k.max(2), 1.0).unwrap()).unwrap()
    }

    #[test]
    fn classification_covers_the_four_cases() {
        let tag = |p, k| CaseTag::classify(&HardyParams::new(p, k, 5, 1.0).unwrap()).unwrap();
        assert_eq!(tag(1.5, 3), CaseTag::A);
        assert_eq!(tag(3.0, 5), CaseTag::B);
        assert_eq!(tag(1.5, 1), CaseTag::C);
        assert_eq!(tag(3.0, 1), CaseTag::D);
        assert_eq!(tag(2.0, 2), CaseTag::Degenerate);
    }

    #[test]
    fn values_at_the_origin() {
        for (p, k) in [(1.5, 3), (3.0, 5), (1.5, 1), (3.0, 1), (2.5, 2)] {
            let s = spec(p, k);
            let h = s.params.h();
            let v = f_eval(&s, 0.0).unwrap();
            assert!((v.f - 1.0).abs() < 1e-14);
            assert!(v.df.abs() < 1e-14);
            assert!((v.d2f - (p - 1.0) / (p * h * h)).abs() < 1e-12);
            let d3 = 6.0 * s.a / h - (2.0 - p) * (p - 1.0) / (p * p * h * h * h);
            assert!((v.d3f - d3).abs() < 1e-12 * d3.abs().max(1.0));
        }
    }

    #[test]
    fn window_violations_are_named() {
        let params = HardyParams::new(1.5, 1, 2, 1.0).unwrap();
        let err = VectorFieldSpec::new(params, -0.1).unwrap_err();
        assert!(err.to_string().contains("case (c)"));
        let params = HardyParams::new(3.0, 5, 5, 1.0).unwrap();
        assert!(VectorFieldSpec::new(params, 0.2).is_err());
    }

    #[test]
    fn quadratic_case_is_an_identity() {
        let s = VectorFieldSpec::new(HardyParams::new(2.0, 3, 3, 1.0).unwrap(), 0.0).unwrap();
        for t in [0.0, 0.3, 2.0, 17.0] {
            let h = s.params.h();
            let f = f_eval(&s, t).unwrap().f;
            assert!((f - 1.0 - t * t / (4.0 * h * h)).abs() < 1e-12 * (1.0 + t * t));
        }
    }

    #[test]
    fn degenerate_spec_has_no_f() {
        let s = VectorFieldSpec::with_default_a(HardyParams::new(2.0, 2, 2, 1.0).unwrap()).unwrap();
        assert!(f_eval(&s, 0.1).is_err());
    }

    #[test]
    fn pointwise_identity_at_two() {
        let r = pointwise_margin_sampler(2.0, 2000, 3).unwrap();
        for b in &r.branches {
            assert!((b.infimum - 1.0).abs() < 1e-9, "{b:?}");
        }
    }
}
