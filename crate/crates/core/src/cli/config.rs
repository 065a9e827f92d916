//! Run configuration: one JSON document, every field optional.

use std::path::{Path, PathBuf};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::Failure;
use crate::grid::UniformGrid;
use crate::states::StateSpec;
use crate::tomograms::{FormulaVariant, ReferenceFrame};
use crate::trajectory::TrapParams;

/// Smallest node count accepted for any grid in a config.
pub const MIN_GRID_POINTS: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_trap")]
    pub trap: TrapParams,
    #[serde(default = "default_state")]
    pub state: StateSpec,
    #[serde(default = "default_time")]
    pub time: TimeSpec,
    /// Absent in a config file means "no frames"; commands that need them fail.
    #[serde(default)]
    pub frames: Option<FrameSet>,
    #[serde(default)]
    pub grids: GridConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub formula: FormulaVariant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TimeSpec {
    Single(f64),
    List(Vec<f64>),
}

impl TimeSpec {
    pub fn values(&self) -> Vec<f64> {
        match self {
            TimeSpec::Single(t) => vec![*t],
            TimeSpec::List(ts) => ts.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameSet {
    #[serde(default)]
    pub list: Option<Vec<ReferenceFrame>>,
    #[serde(default)]
    pub grid: Option<FrameGrid>,
}

/// Square `(μ, ν)` grid `[-half_width, half_width]²` at a fixed `δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameGrid {
    pub half_width: f64,
    pub spacing: f64,
    #[serde(default)]
    pub delta: f64,
}

impl FrameGrid {
    pub fn axis(&self) -> Result<UniformGrid, Failure> {
        if !(self.half_width > 0.0 && self.spacing > 0.0) {
            return Err(Failure::config("frame grid needs half_width > 0 and spacing > 0"));
        }
        let cells = 2.0 * self.half_width / self.spacing;
        if (cells - cells.round()).abs() > 1e-9 * cells.max(1.0) {
            return Err(Failure::config(format!(
                "frame grid spacing {} does not divide 2*half_width = {}",
                self.spacing,
                2.0 * self.half_width
            )));
        }
        UniformGrid::symmetric(self.half_width, cells.round() as usize + 1).map_err(Failure::from)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Tomogram `X` grid.
    #[serde(default = "default_x")]
    pub x: UniformGrid,
    /// Position grid for wavefunctions.
    #[serde(default = "default_psi")]
    pub psi: UniformGrid,
    #[serde(default = "default_qp")]
    pub q: UniformGrid,
    #[serde(default = "default_qp")]
    pub p: UniformGrid,
    /// Square box of the Wigner map that feeds the forward transform.
    #[serde(default = "default_transform")]
    pub transform: UniformGrid,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { x: default_x(), psi: default_psi(), q: default_qp(), p: default_qp(), transform: default_transform() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_ode_tol")]
    pub ode: f64,
    /// Pointwise agreement demanded between independent quadratures.
    #[serde(default = "default_quadrature_tol")]
    pub quadrature: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { ode: default_ode_tol(), quadrature: default_quadrature_tol() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum, Default)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default)]
    pub format: Format,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: default_dir(), format: Format::Csv }
    }
}

fn default_trap() -> TrapParams {
    TrapParams { kappa: 0.2, omega_mod: 2.0 }
}
fn default_state() -> StateSpec {
    StateSpec::coherent(C64::new(1.0, 0.0))
}
fn default_time() -> TimeSpec {
    TimeSpec::List(vec![0.0, 1.5, 5.0])
}
fn default_x() -> UniformGrid {
    UniformGrid { min: -10.0, max: 10.0, n: 801 }
}
fn default_psi() -> UniformGrid {
    UniformGrid { min: -12.0, max: 12.0, n: 2401 }
}
fn default_qp() -> UniformGrid {
    UniformGrid { min: -5.0, max: 5.0, n: 101 }
}
fn default_transform() -> UniformGrid {
    UniformGrid { min: -8.0, max: 8.0, n: 3201 }
}
fn default_ode_tol() -> f64 {
    1e-9
}
fn default_quadrature_tol() -> f64 {
    1e-4
}
fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            trap: default_trap(),
            state: default_state(),
            time: default_time(),
            frames: Some(FrameSet {
                list: Some(vec![
                    ReferenceFrame { mu: 1.0, nu: 0.0, delta: 0.0 },
                    ReferenceFrame { mu: 0.0, nu: 1.0, delta: 0.0 },
                    ReferenceFrame { mu: 0.7, nu: -0.4, delta: 1.2 },
                    ReferenceFrame { mu: -0.6, nu: 0.8, delta: -0.5 },
                ]),
                grid: Some(FrameGrid { half_width: 6.0, spacing: 0.1, delta: 0.0 }),
            }),
            grids: GridConfig::default(),
            tolerances: Tolerances::default(),
            output: OutputConfig::default(),
            formula: FormulaVariant::default(),
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::config(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Failure::config(format!("invalid config {}: {e}", path.display())))
    }

    pub fn times(&self) -> Vec<f64> {
        self.time.values()
    }

    pub fn validate(&self) -> Result<(), Failure> {
        self.trap.validate()?;
        self.state.validate()?;
        let times = self.times();
        if times.is_empty() {
            return Err(Failure::config("time list is empty"));
        }
        if let Some(t) = times.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
            return Err(Failure::config(format!("times must be finite and >= 0, got {t}")));
        }
        let g = &self.grids;
        for (name, grid) in [("x", g.x), ("psi", g.psi), ("q", g.q), ("p", g.p), ("transform", g.transform)] {
            if !(grid.min.is_finite() && grid.max.is_finite() && grid.max > grid.min) || grid.n < MIN_GRID_POINTS {
                return Err(Failure::config(format!(
                    "grid {name} needs max > min and n >= {MIN_GRID_POINTS}, got [{}, {}] n={}",
                    grid.min, grid.max, grid.n
                )));
            }
        }
        let tol = &self.tolerances;
        if !(tol.ode > 0.0 && tol.ode.is_finite() && tol.quadrature > 0.0 && tol.quadrature.is_finite()) {
            return Err(Failure::config("tolerances must be positive"));
        }
        if let Some(frames) = &self.frames {
            for f in frames.list.iter().flatten() {
                f.validate()?;
            }
            if let Some(grid) = &frames.grid {
                grid.axis()?;
            }
        }
        Ok(())
    }

    /// SHA-256 of the effective configuration, serialized canonically. The
    /// output directory is left out so relocated runs stay byte-identical.
    pub fn digest(&self) -> String {
        let mut canonical = self.clone();
        canonical.output.dir = PathBuf::new();
        let bytes = serde_json::to_vec(&canonical).expect("config serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn frame_list(&self) -> Result<&[ReferenceFrame], Failure> {
        match self.frames.as_ref().and_then(|f| f.list.as_deref()) {
            Some(list) if !list.is_empty() => Ok(list),
            _ => Err(Failure::config("config has no frames.list")),
        }
    }

    pub fn frame_grid(&self) -> Result<FrameGrid, Failure> {
        self.frames
            .as_ref()
            .and_then(|f| f.grid)
            .ok_or_else(|| Failure::config("config has no frames.grid"))
    }
}
