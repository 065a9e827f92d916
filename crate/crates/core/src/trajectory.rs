//! Complex classical trajectory of the Paul-trap oscillator.
//!
//! The trap frequency is `ω²(t) = 1 + κ² sin²(Ωt)` and the trajectory solves
//! `ε̈ + ω²(t) ε = 0` with `ε(0) = 1`, `ε̇(0) = i`. Because the equation is real
//! and second order, `Im(ε ε̇*) = -1` for all time. Inside the unstable
//! (parametric resonance) zones `|ε|` grows exponentially; that is physics, not
//! a solver failure.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{self, StepperConfig, Tolerance};

/// Modulation depth `kappa` and modulation frequency `omega_mod` of the trap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrapParams {
    pub kappa: f64,
    pub omega_mod: f64,
}

impl TrapParams {
    pub fn new(kappa: f64, omega_mod: f64) -> Result<Self> {
        let p = Self { kappa, omega_mod };
        p.validate()?;
        Ok(p)
    }

    /// The unmodulated oscillator (`κ = 0`).
    pub fn harmonic() -> Self {
        Self { kappa: 0.0, omega_mod: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa >= 0.0 && self.kappa.is_finite()) {
            return Err(Error::invalid(format!("kappa must be >= 0, got {}", self.kappa)));
        }
        if !(self.omega_mod > 0.0 && self.omega_mod.is_finite()) {
            return Err(Error::invalid(format!("omega_mod must be > 0, got {}", self.omega_mod)));
        }
        Ok(())
    }

    /// Largest value of `ω(t)`.
    pub fn max_frequency(&self) -> f64 {
        (1.0 + self.kappa * self.kappa).sqrt()
    }
}

/// `ω²(t) = 1 + κ² sin²(Ωt)`.
pub fn frequency_squared(params: &TrapParams, t: f64) -> f64 {
    let s = (params.omega_mod * t).sin();
    1.0 + params.kappa * params.kappa * s * s
}

/// `d/dt ω²(t) = κ² Ω sin(2Ωt)`.
pub fn frequency_squared_rate(params: &TrapParams, t: f64) -> f64 {
    params.kappa * params.kappa * params.omega_mod * (2.0 * params.omega_mod * t).sin()
}

/// `(ε, ε̇)` at one instant plus the continuously tracked phase of `ε`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySample {
    pub t: f64,
    pub eps: C64,
    pub eps_dot: C64,
    /// `arg ε` unwrapped from `0` at `t = 0`.
    pub arg_eps: f64,
}

impl TrajectorySample {
    /// Sample with the principal branch of `arg ε`.
    pub fn new(t: f64, eps: C64, eps_dot: C64) -> Self {
        Self { t, eps, eps_dot, arg_eps: eps.arg() }
    }

    pub fn initial() -> Self {
        Self::new(0.0, C64::new(1.0, 0.0), C64::new(0.0, 1.0))
    }

    /// Closed form for `κ = 0`: `ε = e^{it}`.
    pub fn harmonic(t: f64) -> Self {
        let e = C64::from_polar(1.0, t);
        Self { t, eps: e, eps_dot: C64::i() * e, arg_eps: t }
    }

    /// `|Im(ε ε̇*) + 1|`.
    pub fn wronskian_residual(&self) -> f64 {
        ((self.eps * self.eps_dot.conj()).im + 1.0).abs()
    }

    /// Fails when the Wronskian residual exceeds `tol`.
    pub fn check_wronskian(&self, tol: f64) -> Result<()> {
        let residual = self.wronskian_residual();
        if residual <= tol {
            Ok(())
        } else {
            Err(Error::Wronskian { residual })
        }
    }

    /// `ε^{-1/2}` on the branch fixed by `arg_eps`.
    pub fn eps_inv_sqrt(&self) -> C64 {
        C64::from_polar(self.eps.norm().powf(-0.5), -0.5 * self.arg_eps)
    }
}

/// Sampled solution of the trajectory equation.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexTrajectory {
    times: Vec<f64>,
    eps: Vec<C64>,
    eps_dot: Vec<C64>,
    arg_eps: Vec<f64>,
    params: TrapParams,
}

/// Default relative tolerance; the absolute tolerance is `1e-3` of it.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Integrate the trajectory on `[0, t_end]` with relative tolerance `tol`
/// (absolute tolerance `tol * 1e-3`).
pub fn solve_epsilon(params: &TrapParams, t_end: f64, tol: f64) -> Result<ComplexTrajectory> {
    params.validate()?;
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::invalid(format!("t_end must be > 0, got {t_end}")));
    }
    let tol = Tolerance::new(tol, tol * 1e-3)?;
    // keeps the quintic Hermite interpolant well below the tolerance
    let max_step = 0.1 / params.max_frequency().max(params.omega_mod);
    let cfg = StepperConfig::new(tol, max_step);

    let p = *params;
    let rhs = move |t: f64, y: &[f64; 4]| {
        let w2 = frequency_squared(&p, t);
        [y[2], y[3], -w2 * y[0], -w2 * y[1]]
    };
    let nodes = ode::integrate(rhs, 0.0, [1.0, 0.0, 0.0, 1.0], t_end, &cfg)?;

    let mut times = Vec::with_capacity(nodes.len());
    let mut eps = Vec::with_capacity(nodes.len());
    let mut eps_dot = Vec::with_capacity(nodes.len());
    let mut arg_eps = Vec::with_capacity(nodes.len());
    let mut prev: Option<(C64, f64)> = None;
    for node in &nodes {
        let e = C64::new(node.y[0], node.y[1]);
        if e.norm() == 0.0 {
            return Err(Error::Integration { t: node.t, reason: "eps vanished".into() });
        }
        let arg = match prev {
            None => e.arg(),
            Some((pe, pa)) => pa + (e / pe).arg(),
        };
        prev = Some((e, arg));
        times.push(node.t);
        eps.push(e);
        eps_dot.push(C64::new(node.y[2], node.y[3]));
        arg_eps.push(arg);
    }
    Ok(ComplexTrajectory { times, eps, eps_dot, arg_eps, params: *params })
}

/// Stability of the trajectory equation over one period `π/Ω` of `ω²(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Floquet {
    pub period: f64,
    /// Trace of the monodromy matrix; `|trace| > 2` means parametric resonance.
    pub trace: f64,
    /// Largest modulus of the Floquet multipliers.
    pub multiplier: f64,
    /// `ln(multiplier) / period`, the exponential growth rate of `|ε|`.
    pub growth_rate: f64,
}

impl Floquet {
    pub fn is_unstable(&self) -> bool {
        self.trace.abs() > 2.0 + 1e-6
    }
}

/// Monodromy analysis: real and imaginary parts of `ε` are the two
/// fundamental solutions, so one period of the trajectory gives the matrix.
pub fn floquet(params: &TrapParams, tol: f64) -> Result<Floquet> {
    let period = std::f64::consts::PI / params.omega_mod;
    let traj = solve_epsilon(params, period, tol)?;
    let end = traj.node(traj.len() - 1);
    let trace = end.eps.re + end.eps_dot.im;
    let multiplier = if trace.abs() > 2.0 {
        0.5 * (trace.abs() + (trace * trace - 4.0).sqrt())
    } else {
        1.0
    };
    Ok(Floquet { period, trace, multiplier, growth_rate: multiplier.ln() / period })
}

impl ComplexTrajectory {
    pub fn params(&self) -> &TrapParams {
        &self.params
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn eps(&self) -> &[C64] {
        &self.eps
    }

    pub fn eps_dot(&self) -> &[C64] {
        &self.eps_dot
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().expect("trajectory has at least one sample")
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Stored sample `i`.
    pub fn node(&self, i: usize) -> TrajectorySample {
        TrajectorySample {
            t: self.times[i],
            eps: self.eps[i],
            eps_dot: self.eps_dot[i],
            arg_eps: self.arg_eps[i],
        }
    }

    /// Largest `|Im(ε ε̇*) + 1|` over the stored samples.
    pub fn max_wronskian_residual(&self) -> f64 {
        (0..self.len()).map(|i| self.node(i).wronskian_residual()).fold(0.0, f64::max)
    }

    /// `(ε(t), ε̇(t))` by dense interpolation.
    pub fn epsilon_at(&self, t: f64) -> Result<(C64, C64)> {
        let s = self.sample_at(t)?;
        Ok((s.eps, s.eps_dot))
    }

    /// Interpolated sample at `t`, exact at the stored nodes.
    ///
    /// Uses quintic Hermite interpolation per step: the ODE supplies `ε̈ = -ω²ε`
    /// and `ε⃛ = -(ω²)'ε - ω²ε̇` at both ends for free.
    pub fn sample_at(&self, t: f64) -> Result<TrajectorySample> {
        let t_end = self.t_end();
        if !(t >= 0.0 && t <= t_end) {
            return Err(Error::OutOfRange { t, t_end });
        }
        let j = self.times.partition_point(|&ti| ti <= t);
        // j is the first node strictly after t
        if j == 0 {
            return Ok(self.node(0));
        }
        let i = j - 1;
        if self.times[i] == t || i + 1 == self.len() {
            return Ok(self.node(i));
        }
        let (t0, t1) = (self.times[i], self.times[i + 1]);
        let h = t1 - t0;
        let s = (t - t0) / h;

        let p = &self.params;
        let (e0, d0) = (self.eps[i], self.eps_dot[i]);
        let (e1, d1) = (self.eps[i + 1], self.eps_dot[i + 1]);
        let (w0, w1) = (frequency_squared(p, t0), frequency_squared(p, t1));
        let (r0, r1) = (frequency_squared_rate(p, t0), frequency_squared_rate(p, t1));
        let dd0 = -w0 * e0;
        let dd1 = -w1 * e1;
        let ddd0 = -r0 * e0 - w0 * d0;
        let ddd1 = -r1 * e1 - w1 * d1;

        let b = quintic_hermite_basis(s);
        let eps = e0 * b[0] + d0 * (h * b[1]) + dd0 * (h * h * b[2])
            + e1 * b[3] + d1 * (h * b[4]) + dd1 * (h * h * b[5]);
        let eps_dot = d0 * b[0] + dd0 * (h * b[1]) + ddd0 * (h * h * b[2])
            + d1 * b[3] + dd1 * (h * b[4]) + ddd1 * (h * h * b[5]);
        let arg_eps = self.arg_eps[i] + (eps / e0).arg();
        Ok(TrajectorySample { t, eps, eps_dot, arg_eps })
    }
}

fn quintic_hermite_basis(s: f64) -> [f64; 6] {
    let s2 = s * s;
    let s3 = s2 * s;
    let s4 = s3 * s;
    let s5 = s4 * s;
    [
        1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5,
        s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5,
        0.5 * s2 - 1.5 * s3 + 1.5 * s4 - 0.5 * s5,
        10.0 * s3 - 15.0 * s4 + 6.0 * s5,
        -4.0 * s3 + 7.0 * s4 - 3.0 * s5,
        0.5 * s3 - s4 + 0.5 * s5,
    ]
}
