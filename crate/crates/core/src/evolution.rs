//! Time evolution of tomograms in the modulated trap.
//!
//! Tomograms obey the first-order equation
//! `∂w/∂t - μ ∂w/∂ν + ω²(t) ν ∂w/∂μ = 0`, with `X` and `δ` inert. Its
//! characteristics are `dμ/dt = ω²ν`, `dν/dt = -μ`, along which `w` is
//! constant, so a tomogram at `t0` fixes the tomogram at any later time.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::UniformGrid;
use crate::ode::{self, StepperConfig, Tolerance};
use crate::states::StateSpec;
use crate::tomograms::{AnalyticMarginal, MarginalModel, ReferenceFrame, Tomogram};
use crate::trajectory::{frequency_squared, ComplexTrajectory, TrapParams, DEFAULT_TOL};

/// Frames closer than this to `(0, 0)` are rejected in a field.
pub const DEGENERATE_RADIUS: f64 = 0.05;

/// Tomograms sampled on a regular `(t, μ, ν)` grid at fixed `δ`.
///
/// Values are stored `[t][μ][ν][X]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TomogramField {
    pub params: TrapParams,
    pub t_grid: UniformGrid,
    pub mu_grid: UniformGrid,
    pub nu_grid: UniformGrid,
    pub delta: f64,
    pub x_grid: UniformGrid,
    values: Vec<f64>,
}

impl TomogramField {
    /// Build a field by calling `f(t, frame)` at every `(t, μ, ν)` node.
    pub fn from_fn<F>(
        params: TrapParams,
        t_grid: UniformGrid,
        mu_grid: UniformGrid,
        nu_grid: UniformGrid,
        delta: f64,
        x_grid: UniformGrid,
        f: F,
    ) -> Result<Self>
    where
        F: Fn(f64, &ReferenceFrame) -> Result<Tomogram> + Sync,
    {
        for mu in mu_grid.points() {
            for nu in nu_grid.points() {
                if mu.hypot(nu) < DEGENERATE_RADIUS {
                    return Err(Error::Field(format!(
                        "node (μ, ν) = ({mu}, {nu}) lies within {DEGENERATE_RADIUS} of the degenerate frame"
                    )));
                }
            }
        }
        let nodes: Vec<(f64, f64, f64)> = t_grid
            .points()
            .into_iter()
            .flat_map(|t| {
                let nus = nu_grid.points();
                mu_grid.points().into_iter().flat_map(move |mu| nus.clone().into_iter().map(move |nu| (t, mu, nu)))
            })
            .collect();
        let tomograms: Vec<Tomogram> = nodes
            .par_iter()
            .map(|&(t, mu, nu)| f(t, &ReferenceFrame::new(mu, nu, delta)?))
            .collect::<Result<_>>()?;
        let mut values = Vec::with_capacity(tomograms.len() * x_grid.n);
        for tomo in &tomograms {
            if !tomo.x_grid.matches(&x_grid, 1e-9) {
                return Err(Error::GridMismatch("field member returned a different X grid".into()));
            }
            values.extend_from_slice(&tomo.values);
        }
        Ok(Self { params, t_grid, mu_grid, nu_grid, delta, x_grid, values })
    }

    /// Closed-form field of `spec` along a solved trajectory.
    pub fn analytic(
        spec: StateSpec,
        trajectory: &ComplexTrajectory,
        t_grid: UniformGrid,
        mu_grid: UniformGrid,
        nu_grid: UniformGrid,
        delta: f64,
        x_grid: UniformGrid,
    ) -> Result<Self> {
        Self::from_fn(*trajectory.params(), t_grid, mu_grid, nu_grid, delta, x_grid, |t, frame| {
            let model = AnalyticMarginal::new(spec, trajectory.sample_at(t)?)?;
            Ok(model.tomogram(frame, &x_grid))
        })
    }

    fn index(&self, it: usize, im: usize, inu: usize, ix: usize) -> usize {
        ((it * self.mu_grid.n + im) * self.nu_grid.n + inu) * self.x_grid.n + ix
    }

    pub fn value(&self, it: usize, im: usize, inu: usize, ix: usize) -> f64 {
        self.values[self.index(it, im, inu, ix)]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Largest residual of the evolution equation and where it occurs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residual {
    pub value: f64,
    pub t: f64,
    pub mu: f64,
    pub nu: f64,
    pub x: f64,
}

/// `max |∂w/∂t - μ ∂w/∂ν + ω²ν ∂w/∂μ|` over interior nodes, by central differences.
pub fn evolution_residual(field: &TomogramField) -> Result<Residual> {
    for (name, g) in [("t", &field.t_grid), ("mu", &field.mu_grid), ("nu", &field.nu_grid)] {
        if g.n < 3 {
            return Err(Error::Field(format!("{name} axis has {} points; central differences need 3", g.n)));
        }
    }
    let (ht, hm, hn) = (field.t_grid.step(), field.mu_grid.step(), field.nu_grid.step());
    let interior: Vec<(usize, usize, usize)> = (1..field.t_grid.n - 1)
        .flat_map(|it| {
            (1..field.mu_grid.n - 1).flat_map(move |im| (1..field.nu_grid.n - 1).map(move |inu| (it, im, inu)))
        })
        .collect();
    let best = interior
        .par_iter()
        .map(|&(it, im, inu)| {
            let t = field.t_grid.point(it);
            let mu = field.mu_grid.point(im);
            let nu = field.nu_grid.point(inu);
            let w2 = frequency_squared(&field.params, t);
            let mut worst = Residual { value: 0.0, t, mu, nu, x: field.x_grid.min };
            for ix in 0..field.x_grid.n {
                let dt = (field.value(it + 1, im, inu, ix) - field.value(it - 1, im, inu, ix)) / (2.0 * ht);
                let dm = (field.value(it, im + 1, inu, ix) - field.value(it, im - 1, inu, ix)) / (2.0 * hm);
                let dn = (field.value(it, im, inu + 1, ix) - field.value(it, im, inu - 1, ix)) / (2.0 * hn);
                let r = (dt - mu * dn + w2 * nu * dm).abs();
                if r > worst.value {
                    worst = Residual { value: r, x: field.x_grid.point(ix), ..worst };
                }
            }
            worst
        })
        .reduce_with(|a, b| if b.value > a.value { b } else { a });
    Ok(best.expect("interior is non-empty"))
}

fn stepper(params: &TrapParams, tol: f64) -> Result<StepperConfig> {
    Ok(StepperConfig::new(Tolerance::new(tol, tol * 1e-3)?, 0.1 / params.max_frequency()))
}

/// Forward characteristic: `(μ, ν)` at `t1` reached from `(μ0, ν0)` at `t0`.
pub fn characteristic_forward(params: &TrapParams, mu0: f64, nu0: f64, t0: f64, t1: f64, tol: f64) -> Result<(f64, f64)> {
    check_interval(t0, t1)?;
    if t1 == t0 {
        return Ok((mu0, nu0));
    }
    let nodes = ode::integrate(
        |t, y: &[f64; 2]| [frequency_squared(params, t) * y[1], -y[0]],
        t0,
        [mu0, nu0],
        t1,
        &stepper(params, tol)?,
    )?;
    let y = nodes.last().expect("integrator returns nodes").y;
    Ok((y[0], y[1]))
}

/// Backward characteristic: the `(μ0, ν0)` at `t0` that flows to `(μ, ν)` at `t1`.
///
/// Integrated forward in `τ = t1 - t` on the reversed system.
pub fn characteristic_origin(params: &TrapParams, mu: f64, nu: f64, t0: f64, t1: f64, tol: f64) -> Result<(f64, f64)> {
    check_interval(t0, t1)?;
    if t1 == t0 {
        return Ok((mu, nu));
    }
    let nodes = ode::integrate(
        |tau, y: &[f64; 2]| [-frequency_squared(params, t1 - tau) * y[1], y[0]],
        0.0,
        [mu, nu],
        t1 - t0,
        &stepper(params, tol)?,
    )?;
    let y = nodes.last().expect("integrator returns nodes").y;
    Ok((y[0], y[1]))
}

fn check_interval(t0: f64, t1: f64) -> Result<()> {
    if !(t0.is_finite() && t1.is_finite()) || t1 < t0 {
        return Err(Error::invalid(format!("propagation needs finite t1 >= t0, got {t0} -> {t1}")));
    }
    Ok(())
}

/// Closed-form flow for `κ = 0`: rotation of `(μ, ν)` by `t1 - t0`.
pub fn harmonic_flow(mu0: f64, nu0: f64, dt: f64) -> (f64, f64) {
    let (s, c) = dt.sin_cos();
    (mu0 * c + nu0 * s, -mu0 * s + nu0 * c)
}

/// Jacobian `∂(μ, ν)/∂(μ0, ν0)` of the forward flow, by central differences
/// with step `h`. The flow is linear, so a large step is exact up to the
/// solver error.
pub fn flow_jacobian(
    params: &TrapParams,
    mu0: f64,
    nu0: f64,
    t0: f64,
    t1: f64,
    tol: f64,
    h: f64,
) -> Result<[[f64; 2]; 2]> {
    let f = |m: f64, n: f64| characteristic_forward(params, m, n, t0, t1, tol);
    let (a1, b1) = f(mu0 + h, nu0)?;
    let (a0, b0) = f(mu0 - h, nu0)?;
    let (c1, d1) = f(mu0, nu0 + h)?;
    let (c0, d0) = f(mu0, nu0 - h)?;
    Ok([
        [(a1 - a0) / (2.0 * h), (c1 - c0) / (2.0 * h)],
        [(b1 - b0) / (2.0 * h), (d1 - d0) / (2.0 * h)],
    ])
}

pub fn determinant(j: &[[f64; 2]; 2]) -> f64 {
    j[0][0] * j[1][1] - j[0][1] * j[1][0]
}

/// A tomogram known at `t0`, transported to `t1` along characteristics.
#[derive(Debug, Clone, Copy)]
pub struct PropagatedMarginal<M> {
    pub base: M,
    pub t0: f64,
    pub t1: f64,
    pub params: TrapParams,
    pub tol: f64,
}

impl<M: MarginalModel> PropagatedMarginal<M> {
    pub fn new(base: M, t1: f64, params: TrapParams) -> Result<Self> {
        Self::with_tol(base, t1, params, DEFAULT_TOL)
    }

    pub fn with_tol(base: M, t1: f64, params: TrapParams, tol: f64) -> Result<Self> {
        params.validate()?;
        let t0 = base.time();
        check_interval(t0, t1)?;
        Ok(Self { base, t0, t1, params, tol })
    }

    /// Frame at `t0` whose tomogram equals the tomogram of `frame` at `t1`.
    pub fn source_frame(&self, frame: &ReferenceFrame) -> Result<ReferenceFrame> {
        frame.validate()?;
        let (mu0, nu0) = characteristic_origin(&self.params, frame.mu, frame.nu, self.t0, self.t1, self.tol)?;
        ReferenceFrame::new(mu0, nu0, frame.delta)
    }
}

impl<M: MarginalModel> MarginalModel for PropagatedMarginal<M> {
    /// NaN when the characteristic cannot be integrated; use [`propagate`]
    /// for error reporting.
    fn density(&self, x: f64, frame: &ReferenceFrame) -> f64 {
        match self.source_frame(frame) {
            Ok(source) => self.base.density(x, &source),
            Err(_) => f64::NAN,
        }
    }

    fn spec(&self) -> StateSpec {
        self.base.spec()
    }

    fn time(&self) -> f64 {
        self.t1
    }

    fn tomogram(&self, frame: &ReferenceFrame, x_grid: &UniformGrid) -> Tomogram {
        match self.source_frame(frame) {
            Ok(source) => Tomogram { frame: *frame, time: self.t1, ..self.base.tomogram(&source, x_grid) },
            Err(_) => Tomogram {
                frame: *frame,
                x_grid: *x_grid,
                values: vec![f64::NAN; x_grid.n],
                time: self.t1,
                spec: self.base.spec(),
            },
        }
    }
}

/// Result of transporting one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Propagation {
    pub source: ReferenceFrame,
    pub tomogram: Tomogram,
}

/// Tomogram at `t1` in `frame`, from `w0` known at `w0.time()`.
pub fn propagate<M: MarginalModel>(
    w0: &M,
    frame: &ReferenceFrame,
    t1: f64,
    params: &TrapParams,
    x_grid: &UniformGrid,
    tol: f64,
) -> Result<Propagation> {
    let transport = PropagatedMarginal::with_tol(w0, t1, *params, tol)?;
    let source = transport.source_frame(frame)?;
    let base = w0.tomogram(&source, x_grid);
    Ok(Propagation { source, tomogram: Tomogram { frame: *frame, time: t1, ..base } })
}

impl<M: MarginalModel> MarginalModel for &M {
    fn density(&self, x: f64, frame: &ReferenceFrame) -> f64 {
        (**self).density(x, frame)
    }

    fn spec(&self) -> StateSpec {
        (**self).spec()
    }

    fn time(&self) -> f64 {
        (**self).time()
    }

    fn tomogram(&self, frame: &ReferenceFrame, x_grid: &UniformGrid) -> Tomogram {
        (**self).tomogram(frame, x_grid)
    }
}
