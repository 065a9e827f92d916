//! Command-line front end.
//!
//! Exit codes: 0 success, 1 configuration or validation error, 2 a numerical
//! check failed, 3 trajectory integration failed. Diagnostics go to stderr;
//! data goes only to files under the output directory.

pub mod commands;
pub mod config;
pub mod output;
pub mod verify;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64 as C64;

use crate::error::Error;
use crate::states::StateKind;
use crate::tomograms::{CatShift, VarianceCrossTerm};
pub use config::{Format, RunConfig};

/// Why a command stopped; each maps to one exit code.
#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    Config(String),
    Check(String),
    Integration(String),
}

impl Failure {
    pub fn config(msg: impl Into<String>) -> Self {
        Failure::Config(msg.into())
    }

    pub fn check(msg: impl Into<String>) -> Self {
        Failure::Check(msg.into())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Check(_) => 2,
            Failure::Integration(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Check(m) | Failure::Integration(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Integration { .. } | Error::OutOfRange { .. } => Failure::Integration(e.to_string()),
            Error::Wronskian { .. } | Error::NonPositiveVariance(_) | Error::Convention(_) => {
                Failure::Check(e.to_string())
            }
            _ => Failure::Config(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "symtomo", version, about = "Symplectic tomograms of a trapped ion in a modulated trap")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// JSON run configuration; flags below override its fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Format of tabular outputs.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    #[arg(long, global = true)]
    pub kappa: Option<f64>,
    #[arg(long, global = true)]
    pub omega_mod: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub state: Option<StateArg>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub alpha_re: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub alpha_im: Option<f64>,
    /// Evaluation times, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    pub time: Option<Vec<f64>>,

    /// Diagnostic: Gaussian variance cross term `μν sqrt(|εε̇|² + 1)`.
    #[arg(long = "use-printed-eq7", global = true)]
    pub legacy_cross_term: bool,
    /// Diagnostic: cat marginal shift coefficient `2√2`.
    #[arg(long = "use-printed-eq10-shift", global = true)]
    pub legacy_cat_shift: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Solve for ε(t) and write the time series.
    Trajectory,
    /// Marginals by closed form, Wigner line integral and wavefunction quadrature.
    Tomogram,
    /// Analytic and numerically transformed Wigner maps.
    Wigner,
    /// Rebuild the Wigner map from a (μ, ν) tomogram family.
    Reconstruct,
    /// Run the invariant suite and write a pass/fail report.
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StateArg {
    Coherent,
    EvenCat,
    OddCat,
}

impl From<StateArg> for StateKind {
    fn from(s: StateArg) -> Self {
        match s {
            StateArg::Coherent => StateKind::Coherent,
            StateArg::EvenCat => StateKind::EvenCat,
            StateArg::OddCat => StateKind::OddCat,
        }
    }
}

impl Cli {
    /// Loads the config (or defaults) and applies flag overrides.
    pub fn effective_config(&self) -> Result<RunConfig, Failure> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        if let Some(dir) = &self.out {
            cfg.output.dir = dir.clone();
        }
        if let Some(format) = self.format {
            cfg.output.format = format;
        }
        if let Some(k) = self.kappa {
            cfg.trap.kappa = k;
        }
        if let Some(w) = self.omega_mod {
            cfg.trap.omega_mod = w;
        }
        if let Some(s) = self.state {
            cfg.state.kind = s.into();
        }
        if self.alpha_re.is_some() || self.alpha_im.is_some() {
            cfg.state.alpha = C64::new(
                self.alpha_re.unwrap_or(cfg.state.alpha.re),
                self.alpha_im.unwrap_or(cfg.state.alpha.im),
            );
        }
        if let Some(ts) = &self.time {
            cfg.time = config::TimeSpec::List(ts.clone());
        }
        if self.legacy_cross_term {
            cfg.formula.cross_term = VarianceCrossTerm::LegacySqrt;
        }
        if self.legacy_cat_shift {
            cfg.formula.cat_shift = CatShift::LegacyTwoSqrt2;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Parse arguments, run one command, report failures on stderr.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}

pub fn execute(cli: &Cli) -> Result<(), Failure> {
    let cfg = cli.effective_config()?;
    match cli.command {
        Command::Trajectory => commands::trajectory(&cfg),
        Command::Tomogram => commands::tomogram(&cfg),
        Command::Wigner => commands::wigner(&cfg),
        Command::Reconstruct => commands::reconstruct(&cfg),
        Command::Verify => verify::verify(&cfg),
    }
}
