//! Run configuration: a TOML file, overridden by `--set section.key=value`
//! and the common flags.

use std::path::{Path, PathBuf};

use hardy_core::minimizing_sequences::{SweepSettings, WeakNormWindow};
use hardy_core::quadrature::RadialMeasure;
use hardy_core::solver::QuotientKind;
use hardy_core::{HardyParams, KGeometry};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Parse(String),
    #[error("invalid override `{0}`: expected section.key=value")]
    Override(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub out_dir: PathBuf,
    pub params: ParamsBlock,
    /// Defaults to the point (`k = N`) or the coordinate plane (`k < N`).
    pub geometry: Option<KGeometry>,
    pub sweep: SweepBlock,
    pub thresholds: Thresholds,
    pub sampler: SamplerBlock,
    pub certificate: CertificateBlock,
    pub solver: SolverBlock,
    pub sobolev: SobolevBlock,
    pub quad: QuadBlock,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            out_dir: PathBuf::from("out"),
            params: ParamsBlock::default(),
            geometry: None,
            sweep: SweepBlock::default(),
            thresholds: Thresholds::default(),
            sampler: SamplerBlock::default(),
            certificate: CertificateBlock::default(),
            solver: SolverBlock::default(),
            sobolev: SobolevBlock::default(),
            quad: QuadBlock::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamsBlock {
    pub p: f64,
    pub k: usize,
    pub n: usize,
    pub d: f64,
}

impl Default for ParamsBlock {
    fn default() -> Self {
        Self {
            p: 2.0,
            k: 3,
            n: 3,
            d: std::f64::consts::E,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepBlock {
    /// Defaults depend on the experiment; see `resolve`.
    pub eps_list: Option<Vec<f64>>,
    pub theta: Option<f64>,
    /// `θ` values of the remainder experiment.
    pub thetas: Option<Vec<f64>>,
    pub gamma: Vec<f64>,
    pub q: f64,
    pub beta: f64,
    pub delta: f64,
    pub rel_tol: f64,
    pub window: WeakNormWindow,
    /// Power of `X` in the decaying probe of the `p = k` experiment.
    pub x_power_probe: Option<f64>,
}

impl Default for SweepBlock {
    fn default() -> Self {
        Self {
            eps_list: None,
            theta: None,
            thetas: None,
            gamma: vec![1.0, 1.5],
            q: 1.0,
            beta: 1.2,
            delta: 1.0,
            rel_tol: 1e-10,
            window: WeakNormWindow::Swapped,
            x_power_probe: None,
        }
    }
}

/// Verdict thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    pub quad_rel_error: f64,
    /// Relative distance of the fitted sharp constant from `|H|^p`.
    pub constant_rel: f64,
    pub exponent_abs: f64,
    /// Relative slack above `θ(p-1)/2 |H|^{p-2}`.
    pub remainder_rel: f64,
    /// Relative band above `((p-1)/p)^p`.
    pub degenerate_rel: f64,
    pub hp_margin: f64,
    pub slope_abs: f64,
    pub condition_defect: f64,
    /// Relative band above the plain / degenerate infimum.
    pub solver_plain_rel: f64,
    pub solver_improved_rel: f64,
    pub solver_improved_floor: f64,
    pub solver_floor: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            quad_rel_error: 1e-8,
            constant_rel: 0.03,
            exponent_abs: 0.1,
            remainder_rel: 0.02,
            degenerate_rel: 0.08,
            hp_margin: 0.1,
            slope_abs: 0.05,
            condition_defect: 1e-4,
            solver_plain_rel: 0.08,
            solver_improved_rel: 0.15,
            solver_improved_floor: 1e-3,
            solver_floor: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerBlock {
    pub count: usize,
    pub d_min: f64,
    pub d_max: f64,
    pub extent: f64,
}

impl Default for SamplerBlock {
    fn default() -> Self {
        Self {
            count: 200,
            d_min: 0.01,
            d_max: 10.0,
            extent: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CertificateBlock {
    /// Defaults to the case default.
    pub a: Option<f64>,
    pub sup_d: f64,
    pub nodes: usize,
    pub horizon: f64,
    pub working_m: Option<f64>,
}

impl Default for CertificateBlock {
    fn default() -> Self {
        Self {
            a: None,
            sup_d: 1.0,
            nodes: 10_000,
            horizon: 50.0,
            working_m: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverBlock {
    /// Defaults to `degenerate` for `p = k` and `plain` otherwise.
    pub kind: Option<QuotientKind>,
    /// Inner cut-off of the plain quotient.
    pub r_min: f64,
    /// `t = ln(D/r)` range of the logarithmic quotients.
    pub t_lo: f64,
    pub t_hi: f64,
    pub nodes: usize,
    /// Also solve on a grid with twice the nodes and report that value.
    pub refine: bool,
    pub iterations: usize,
    pub tolerance: f64,
}

impl Default for SolverBlock {
    fn default() -> Self {
        Self {
            kind: None,
            r_min: 1e-16,
            t_lo: 1.0,
            t_hi: 20f64.exp(),
            nodes: 400,
            refine: true,
            iterations: 2000,
            tolerance: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SobolevBlock {
    /// Exponent of the Hardy-Sobolev norms; defaults to the midpoint of
    /// `(p, Np/(N-p))`.
    pub q: Option<f64>,
    pub alpha: f64,
    pub q_hardy: Option<f64>,
    pub profiles: usize,
    /// Support radius of the random profiles.
    pub support: f64,
}

impl Default for SobolevBlock {
    fn default() -> Self {
        Self {
            q: None,
            alpha: 2.0,
            q_hardy: None,
            profiles: 50,
            support: 0.9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadBlock {
    pub cases: usize,
    pub rel_tol: f64,
}

impl Default for QuadBlock {
    fn default() -> Self {
        Self {
            cases: 50,
            rel_tol: 1e-8,
        }
    }
}

/// Reads `path` (if any), applies `--set` overrides and returns the config.
pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<RunConfig, ConfigError> {
    let mut table = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|source| ConfigError::Read {
                path: p.to_path_buf(),
                source,
            })?;
            text.parse::<toml::Table>()
                .map_err(|e| ConfigError::Parse(e.to_string()))?
        }
        None => toml::Table::new(),
    };
    for item in overrides {
        apply_override(&mut table, item)?;
    }
    toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))
}

fn apply_override(table: &mut toml::Table, item: &str) -> Result<(), ConfigError> {
    let (key, raw) = item
        .split_once('=')
        .ok_or_else(|| ConfigError::Override(item.into()))?;
    let path: Vec<&str> = key.trim().split('.').collect();
    if path.iter().any(|s| s.is_empty()) {
        return Err(ConfigError::Override(item.into()));
    }
    // A bare word that is not a TOML literal is taken as a string.
    let value = format!("v = {}", raw.trim())
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.trim().to_string()));
    let (last, parents) = path.split_last().unwrap();
    let mut cur = table;
    for part in parents {
        cur = cur
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| ConfigError::Override(item.into()))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

impl RunConfig {
    pub fn hardy_params(&self) -> hardy_core::Result<HardyParams> {
        let b = self.params;
        HardyParams::new(b.p, b.k, b.n, b.d)
    }

    pub fn geometry(&self) -> KGeometry {
        let b = self.params;
        self.geometry.clone().unwrap_or(if b.k == b.n {
            KGeometry::Point {
                dim: b.n,
                center: None,
            }
        } else {
            KGeometry::AffinePlane {
                dim: b.n,
                codim: b.k,
            }
        })
    }

    /// The radial reduction matching the parameters.
    pub fn measure(&self) -> RadialMeasure {
        let b = self.params;
        if b.k == b.n {
            RadialMeasure::Sphere { dim: b.n }
        } else if b.k == 1 {
            RadialMeasure::Boundary
        } else {
            RadialMeasure::Affine {
                codim: b.k,
                section: 1.0,
            }
        }
    }

    pub fn sweep_settings(&self) -> SweepSettings {
        SweepSettings {
            eps_list: self.sweep.eps_list.clone().unwrap_or_else(deep_eps_list),
            delta: self.sweep.delta,
            rel_tol: self.sweep.rel_tol,
        }
    }

    /// Fills the experiment-dependent defaults so that the echoed config is
    /// complete.
    pub fn resolve(&mut self, command: &str) {
        let p = self.params.p;
        let s = &mut self.sweep;
        match command {
            "verify-constant" | "verify-exponent" | "hp-optimality" => {
                s.theta.get_or_insert(1.1 / p);
            }
            "verify-remainder" => {
                s.thetas
                    .get_or_insert_with(|| vec![1.02 / p, 1.1 / p, 1.2 / p]);
            }
            "verify-pk" => {
                s.theta.get_or_insert((p - 1.0) / p + 0.01);
                s.x_power_probe.get_or_insert(p - 0.5);
            }
            "weak-norm-failure" => {
                let (lo, hi) = s.window.bounds(p);
                s.theta.get_or_insert(lo + 0.875 * (hi - lo));
                s.eps_list
                    .get_or_insert_with(|| SweepSettings::log_spaced(-2.0, -6.0, 9));
            }
            "sobolev-check" => {
                let n = self.params.n as f64;
                let critical = n * p / (n - p);
                self.sobolev.q.get_or_insert(0.5 * (p + critical));
                self.sobolev.q_hardy.get_or_insert(p);
            }
            "rayleigh-min" => {
                self.solver
                    .kind
                    .get_or_insert(if self.params.k as f64 == p {
                        QuotientKind::Degenerate
                    } else {
                        QuotientKind::Plain
                    });
            }
            _ => {}
        }
        if matches!(
            command,
            "verify-constant"
                | "verify-exponent"
                | "verify-remainder"
                | "verify-pk"
                | "hp-optimality"
        ) {
            self.sweep.eps_list.get_or_insert_with(deep_eps_list);
        }
    }
}

/// `ε = 10^{-10}, ..., 10^{-100}`: deep enough that the logarithmic
/// corrections of the sweep ratios are below the fit tolerances.
pub fn deep_eps_list() -> Vec<f64> {
    SweepSettings::log_spaced(-10.0, -100.0, 10)
}
