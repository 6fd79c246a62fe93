//! Command-line driver: every experiment is a subcommand that writes CSV
//! tables and a JSON summary and prints a one-line verdict.

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "hardy",
    version,
    about = "Numerical checks of sharp Hardy inequalities"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `out_dir`).
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Random seed (overrides `seed`).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Override a config key, e.g. `--set params.p=1.5`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub overrides: Vec<String>,
    /// Print the resolved configuration as TOML and exit.
    #[arg(long, global = true)]
    pub print_config: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Singular quadrature against closed forms.
    QuadSelftest,
    /// Sample the sign condition on dΔd + 1 - k for a geometry.
    CheckConditionC,
    /// Fitted limit of ∫|∇U_ε|^p / ∫|U_ε|^p d^{-p} against |H|^p.
    VerifyConstant,
    /// Remainder limits for several θ plus the vector-field certificate.
    VerifyRemainder,
    /// Decay exponents of I/R_γ for γ < 2.
    VerifyExponent,
    /// The p = k inequality: sweep limit and decaying probe.
    VerifyPk,
    /// Weak-norm ratio along the minimizing family.
    WeakNormFailure,
    /// Optimality probe of the X^β power in the gradient inequality.
    HpOptimality,
    /// Empirical constants of the Sobolev-type inequalities.
    SobolevCheck,
    /// Direct minimisation of a discretised Rayleigh quotient.
    RayleighMin,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::QuadSelftest => "quad-selftest",
            Command::CheckConditionC => "check-condition-c",
            Command::VerifyConstant => "verify-constant",
            Command::VerifyRemainder => "verify-remainder",
            Command::VerifyExponent => "verify-exponent",
            Command::VerifyPk => "verify-pk",
            Command::WeakNormFailure => "weak-norm-failure",
            Command::HpOptimality => "hp-optimality",
            Command::SobolevCheck => "sobolev-check",
            Command::RayleighMin => "rayleigh-min",
        }
    }
}

/// Exit codes: 0 all verdicts pass, 1 a verdict fails, 2 configuration or
/// regime error.
pub fn run(cli: Cli) -> ExitCode {
    let name = cli.command.name();
    let mut cfg = match config::load(cli.config.as_deref(), &cli.overrides) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{name}: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(dir) = cli.out_dir {
        cfg.out_dir = dir;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    cfg.resolve(name);
    if cli.print_config {
        match toml::to_string(&cfg) {
            Ok(text) => {
                print!("{text}");
                return ExitCode::SUCCESS;
            }
            Err(e) => {
                eprintln!("{name}: {e}");
                return ExitCode::from(2);
            }
        }
    }
    if let Err(e) = cfg.hardy_params() {
        eprintln!("{name}: {e}");
        return ExitCode::from(2);
    }
    let outcome = match commands::run(name, &cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("{name}: {e}");
            return ExitCode::from(if commands::is_configuration_error(&e) {
                2
            } else {
                1
            });
        }
    };
    if let Err(e) = output::write_artifacts(name, &cfg, &outcome) {
        eprintln!("{name}: cannot write artifacts: {e}");
        return ExitCode::from(2);
    }
    println!("{name}: {} ({})", outcome.label, outcome.detail);
    if outcome.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
