//! Marginal distributions `w(X, μ, ν, δ)` of the quadrature `X = μq + νp + δ`.
//!
//! Three independent routes are provided: closed forms (Gaussian packets and
//! even/odd cats), a line integral of a [`WignerMap`], and direct quadrature of
//! a [`WaveFunction`] in the requested frame. The inverse map rebuilds a Wigner
//! map from a family of tomograms on a regular `(μ, ν)` grid.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::UniformGrid;
use crate::states::{self, Parity, StateSpec, WaveFunction, WignerMap};
use crate::trajectory::TrajectorySample;

/// Reference frame `(μ, ν, δ)` for the observable `X = μq + νp + δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceFrame {
    pub mu: f64,
    pub nu: f64,
    pub delta: f64,
}

impl ReferenceFrame {
    pub fn new(mu: f64, nu: f64, delta: f64) -> Result<Self> {
        let f = Self { mu, nu, delta };
        f.validate()?;
        Ok(f)
    }

    /// Homodyne frame `(cos φ, sin φ, 0)`.
    pub fn optical(phi: f64) -> Self {
        Self { mu: phi.cos(), nu: phi.sin(), delta: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu.is_finite() && self.nu.is_finite() && self.delta.is_finite()) {
            return Err(Error::invalid("frame parameters must be finite"));
        }
        if self.mu == 0.0 && self.nu == 0.0 {
            return Err(Error::DegenerateFrame);
        }
        Ok(())
    }

    /// `sqrt(μ² + ν²)`.
    pub fn scale(&self) -> f64 {
        self.mu.hypot(self.nu)
    }

    /// `(λμ, λν, λδ)`.
    pub fn scaled(&self, lambda: f64) -> Self {
        Self { mu: lambda * self.mu, nu: lambda * self.nu, delta: lambda * self.delta }
    }

    pub fn with_delta(&self, delta: f64) -> Self {
        Self { delta, ..*self }
    }
}

/// A marginal distribution sampled on an `X` grid for one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Tomogram {
    pub frame: ReferenceFrame,
    pub x_grid: UniformGrid,
    pub values: Vec<f64>,
    pub time: f64,
    pub spec: StateSpec,
}

impl Tomogram {
    /// `Σ w ΔX` (trapezoidal).
    pub fn normalization(&self) -> f64 {
        self.x_grid.integrate(&self.values)
    }

    pub fn max_abs_diff(&self, other: &Tomogram) -> Result<f64> {
        if !self.x_grid.matches(&other.x_grid, 1e-9) {
            return Err(Error::GridMismatch("tomograms live on different X grids".into()));
        }
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
    }

    /// Smallest sample; negative values can only come from quadrature noise.
    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Cross term used in the quadrature variance of Gaussian packets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceCrossTerm {
    /// `μν Re(ε ε̇*)`, the covariance of the packet.
    #[default]
    Correlation,
    /// `μν sqrt(|ε ε̇|² + 1)`; kept only to reproduce the discrepancy it causes.
    LegacySqrt,
}

/// Coefficient multiplying `Re/Im(α[με* + νε̇*])` in the cat marginal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CatShift {
    /// `√2`, the position of the two packet components.
    #[default]
    Sqrt2,
    /// `2√2`; diagnostic only, contradicts the direct density.
    LegacyTwoSqrt2,
}

impl CatShift {
    fn coefficient(self) -> f64 {
        match self {
            CatShift::Sqrt2 => SQRT_2,
            CatShift::LegacyTwoSqrt2 => 2.0 * SQRT_2,
        }
    }
}

/// Selects the closed-form variants. The default is the validated pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FormulaVariant {
    pub cross_term: VarianceCrossTerm,
    pub cat_shift: CatShift,
}

/// Mean and variance of `X` for the coherent packet `Ψ_α`.
pub fn gaussian_moments(alpha: C64, s: &TrajectorySample, frame: &ReferenceFrame) -> (f64, f64) {
    gaussian_moments_with(alpha, s, frame, VarianceCrossTerm::Correlation)
}

pub fn gaussian_moments_with(
    alpha: C64,
    s: &TrajectorySample,
    frame: &ReferenceFrame,
    cross_term: VarianceCrossTerm,
) -> (f64, f64) {
    let (mu, nu) = (frame.mu, frame.nu);
    let mean = SQRT_2 * (alpha * (mu * s.eps.conj() + nu * s.eps_dot.conj())).re + frame.delta;
    let cross = match cross_term {
        VarianceCrossTerm::Correlation => (s.eps * s.eps_dot.conj()).re,
        VarianceCrossTerm::LegacySqrt => ((s.eps * s.eps_dot).norm_sqr() + 1.0).sqrt(),
    };
    let variance =
        0.5 * (mu * mu * s.eps.norm_sqr() + nu * nu * s.eps_dot.norm_sqr()) + mu * nu * cross;
    (mean, variance)
}

/// Pointwise evaluation of a marginal distribution at time `time()`.
pub trait MarginalModel: Sync {
    fn density(&self, x: f64, frame: &ReferenceFrame) -> f64;
    fn spec(&self) -> StateSpec;
    fn time(&self) -> f64;

    /// Samples on `x_grid` without coverage checks.
    fn tomogram(&self, frame: &ReferenceFrame, x_grid: &UniformGrid) -> Tomogram {
        Tomogram {
            frame: *frame,
            x_grid: *x_grid,
            values: x_grid.points().iter().map(|&x| self.density(x, frame)).collect(),
            time: self.time(),
            spec: self.spec(),
        }
    }
}

/// Closed-form marginals of coherent and cat packets at one trajectory sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticMarginal {
    pub spec: StateSpec,
    pub sample: TrajectorySample,
    pub variant: FormulaVariant,
}

impl AnalyticMarginal {
    pub fn new(spec: StateSpec, sample: TrajectorySample) -> Result<Self> {
        Self::with_variant(spec, sample, FormulaVariant::default())
    }

    pub fn with_variant(spec: StateSpec, sample: TrajectorySample, variant: FormulaVariant) -> Result<Self> {
        spec.validate()?;
        sample.check_wronskian(states::WRONSKIAN_TOL)?;
        Ok(Self { spec, sample, variant })
    }

    /// `(centre, half-extent)` of the region the marginal occupies, for
    /// coverage checks: `6` standard deviations past each peak.
    pub fn support(&self, frame: &ReferenceFrame) -> Result<(f64, f64)> {
        frame.validate()?;
        let (mean, variance) =
            gaussian_moments_with(self.spec.alpha, &self.sample, frame, self.variant.cross_term);
        if !(variance > 0.0) {
            return Err(Error::NonPositiveVariance(variance));
        }
        let sd = variance.sqrt();
        Ok(match self.spec.parity() {
            None => (mean, 6.0 * sd),
            Some(_) => {
                let shift = self.variant.cat_shift.coefficient() / SQRT_2 * (mean - frame.delta);
                (frame.delta, shift.abs() + 6.0 * sd)
            }
        })
    }

    fn cat_density(&self, parity: Parity, x: f64, frame: &ReferenceFrame) -> f64 {
        let s = &self.sample;
        let alpha = self.spec.alpha;
        let (mu, nu) = (frame.mu, frame.nu);
        // 2σ_X, with the covariance cross term
        let two_var = mu * mu * s.eps.norm_sqr()
            + nu * nu * s.eps_dot.norm_sqr()
            + 2.0 * mu * nu * (s.eps_dot * s.eps.conj()).re;
        let c = alpha * (mu * s.eps.conj() + nu * s.eps_dot.conj());
        let k = self.variant.cat_shift.coefficient();
        let (m, b) = (k * c.re, k * c.im);
        let y = x - frame.delta;
        let log_pref = 2.0 * states::log_cat_normalization(parity, alpha) - 0.5 * (PI * two_var).ln();
        let w1 = (log_pref - (y - m) * (y - m) / two_var).exp();
        let w2 = (log_pref - (y + m) * (y + m) / two_var).exp();
        // w3 + w4: the imaginary-shift pair folded into envelope × cosine
        let fringe = 2.0
            * (log_pref - 2.0 * alpha.norm_sqr() + (b * b - y * y) / two_var).exp()
            * (2.0 * b * y / two_var).cos();
        let sign = match parity {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        };
        w1 + w2 + sign * fringe
    }
}

impl MarginalModel for AnalyticMarginal {
    fn density(&self, x: f64, frame: &ReferenceFrame) -> f64 {
        match self.spec.parity() {
            None => {
                let (mean, var) = gaussian_moments_with(
                    self.spec.alpha,
                    &self.sample,
                    frame,
                    self.variant.cross_term,
                );
                if !(var > 0.0) {
                    return f64::NAN;
                }
                (-(x - mean) * (x - mean) / (2.0 * var)).exp() / (2.0 * PI * var).sqrt()
            }
            Some(parity) => self.cat_density(parity, x, frame),
        }
    }

    fn spec(&self) -> StateSpec {
        self.spec
    }

    fn time(&self) -> f64 {
        self.sample.t
    }
}

fn checked_marginal(model: &AnalyticMarginal, frame: &ReferenceFrame, x_grid: &UniformGrid) -> Result<Tomogram> {
    let (centre, reach) = model.support(frame)?;
    if x_grid.min > centre - reach || x_grid.max < centre + reach {
        return Err(Error::Coverage(format!(
            "X grid [{}, {}] must include [{:.4}, {:.4}]",
            x_grid.min,
            x_grid.max,
            centre - reach,
            centre + reach
        )));
    }
    Ok(model.tomogram(frame, x_grid))
}

/// Closed-form marginal of any supported state, with coverage check.
pub fn marginal(
    spec: &StateSpec,
    s: &TrajectorySample,
    frame: &ReferenceFrame,
    x_grid: &UniformGrid,
    variant: FormulaVariant,
) -> Result<Tomogram> {
    checked_marginal(&AnalyticMarginal::with_variant(*spec, *s, variant)?, frame, x_grid)
}

/// Normal density with the coherent-packet moments.
pub fn marginal_gaussian(
    alpha: C64,
    s: &TrajectorySample,
    frame: &ReferenceFrame,
    x_grid: &UniformGrid,
) -> Result<Tomogram> {
    marginal(&StateSpec::coherent(alpha), s, frame, x_grid, FormulaVariant::default())
}

/// Even/odd cat marginal: two shifted Gaussians plus the interference term.
pub fn marginal_cat(
    parity: Parity,
    alpha: C64,
    s: &TrajectorySample,
    frame: &ReferenceFrame,
    x_grid: &UniformGrid,
) -> Result<Tomogram> {
    marginal(&StateSpec::cat(parity, alpha), s, frame, x_grid, FormulaVariant::default())
}

/// Homodyne specialization `μ = cos φ`, `ν = sin φ`, `δ = 0`.
pub fn optical_slice(
    spec: &StateSpec,
    s: &TrajectorySample,
    phi: f64,
    x_grid: &UniformGrid,
    variant: FormulaVariant,
) -> Result<Tomogram> {
    marginal(spec, s, &ReferenceFrame::optical(phi), x_grid, variant)
}

/// Largest `|W|` tolerated where a projection line leaves the map.
pub const LINE_EXIT_TOL: f64 = 1e-10;

/// `w(X) = (1/2π) ∫∫ W(q,p) δ(X - μq - νp - δ) dq dp`, evaluated as a line
/// integral of the bilinearly interpolated map at half the grid spacing.
pub fn forward_transform(wigner: &WignerMap, frame: &ReferenceFrame, x_grid: &UniformGrid) -> Result<Tomogram> {
    frame.validate()?;
    let lambda = frame.scale();
    let (nq, np) = (frame.mu / lambda, frame.nu / lambda);
    let (tq, tp) = (-np, nq);
    let h = 0.5 * wigner.q_grid.step().min(wigner.p_grid.step());
    let (qg, pg) = (wigner.q_grid, wigner.p_grid);

    let values: Vec<Result<f64>> = x_grid
        .points()
        .par_iter()
        .map(|&x| {
            let r = (x - frame.delta) / lambda;
            let (bq, bp) = (r * nq, r * np);
            // slab intersection of the line b + s t with the box
            let mut s0 = f64::NEG_INFINITY;
            let mut s1 = f64::INFINITY;
            for (b, t, lo, hi) in [(bq, tq, qg.min, qg.max), (bp, tp, pg.min, pg.max)] {
                if t.abs() < 1e-300 {
                    if b < lo || b > hi {
                        return Ok(0.0);
                    }
                } else {
                    let (a, c) = ((lo - b) / t, (hi - b) / t);
                    s0 = s0.max(a.min(c));
                    s1 = s1.min(a.max(c));
                }
            }
            if !(s1 > s0) {
                return Ok(0.0);
            }
            let at = |s: f64| {
                let q = (bq + s * tq).clamp(qg.min, qg.max);
                let p = (bp + s * tp).clamp(pg.min, pg.max);
                wigner.interpolate(q, p).unwrap_or(0.0)
            };
            let (w_in, w_out) = (at(s0), at(s1));
            if w_in.abs() > LINE_EXIT_TOL || w_out.abs() > LINE_EXIT_TOL {
                return Err(Error::Coverage(format!(
                    "line X = {x} leaves the Wigner box where |W| = {:.3e}",
                    w_in.abs().max(w_out.abs())
                )));
            }
            // nodes s = k h measured from the foot of the perpendicular, so the
            // sampling of a line does not depend on where it meets the box
            let k0 = (s0 / h).ceil();
            let k1 = (s1 / h).floor();
            let acc = if k0 > k1 {
                0.5 * (w_in + w_out) * (s1 - s0)
            } else {
                let (first, last) = (k0 * h, k1 * h);
                let (w_first, w_last) = (at(first), at(last));
                let mut inner = 0.5 * (w_first + w_last);
                let mut k = k0 + 1.0;
                while k < k1 {
                    inner += at(k * h);
                    k += 1.0;
                }
                let inner = if k1 > k0 { inner * h } else { 0.0 };
                0.5 * (w_in + w_first) * (first - s0) + inner + 0.5 * (w_last + w_out) * (s1 - last)
            };
            Ok(acc / (2.0 * PI * lambda))
        })
        .collect();
    let values = values.into_iter().collect::<Result<Vec<f64>>>()?;
    Ok(Tomogram { frame: *frame, x_grid: *x_grid, values, time: wigner.time, spec: wigner.spec })
}

/// Marginal in an arbitrary frame directly from a sampled wavefunction.
///
/// For `|ν| ≤ |μ|`, `X - δ = μ(q + τp)` with `τ = ν/μ`, whose distribution is
/// the position density of the freely evolved state `e^{-iτp²/2}ψ`; it is
/// evaluated spectrally. For `|ν| > |μ|`, `X - δ = ν(p + σq)` with `σ = μ/ν`,
/// whose distribution is the momentum density of `e^{iσq²/2}ψ`. Both chirps are
/// bounded by one, so the trapezoidal sums stay well resolved.
pub fn frame_quadrature(psi: &WaveFunction, frame: &ReferenceFrame, x_grid: &UniformGrid) -> Result<Tomogram> {
    frame.validate()?;
    let xs = psi.x_grid.points();
    let weights: Vec<f64> = (0..xs.len()).map(|i| psi.x_grid.weight(i)).collect();
    let targets = x_grid.points();

    let values: Vec<f64> = if frame.nu.abs() > frame.mu.abs() {
        let sigma = frame.mu / frame.nu;
        let chirped: Vec<C64> = xs
            .iter()
            .zip(&psi.values)
            .zip(&weights)
            .map(|((&y, &v), &w)| v * C64::from_polar(w, 0.5 * sigma * y * y))
            .collect();
        targets
            .par_iter()
            .map(|&x| {
                let k = (x - frame.delta) / frame.nu;
                let amp: C64 =
                    xs.iter().zip(&chirped).map(|(&y, &g)| g * C64::from_polar(1.0, -k * y)).sum();
                amp.norm_sqr() / (2.0 * PI * frame.nu.abs())
            })
            .collect()
    } else {
        let tau = frame.nu / frame.mu;
        let ys: Vec<f64> = targets.iter().map(|&x| (x - frame.delta) / frame.mu).collect();
        let spectrum = MomentumSpectrum::new(psi, &ys);
        let rows: Vec<C64> = spectrum
            .amplitudes
            .iter()
            .zip(&spectrum.k)
            .map(|(&a, &k)| a * C64::from_polar(spectrum.dk, -0.5 * tau * k * k))
            .collect();
        ys.par_iter()
            .map(|&y| {
                let amp: C64 =
                    spectrum.k.iter().zip(&rows).map(|(&k, &a)| a * C64::from_polar(1.0, k * y)).sum();
                (amp / (2.0 * PI)).norm_sqr() / frame.mu.abs()
            })
            .collect()
    };
    Ok(Tomogram { frame: *frame, x_grid: *x_grid, values, time: psi.time, spec: psi.spec })
}

/// `φ(k) = Σ ψ(x) e^{-ikx} Δx` on a k grid wide enough for the packet's
/// momentum content and fine enough that the inverse sum does not alias
/// inside the region where the output is requested.
struct MomentumSpectrum {
    k: Vec<f64>,
    dk: f64,
    amplitudes: Vec<C64>,
}

impl MomentumSpectrum {
    fn new(psi: &WaveFunction, outputs: &[f64]) -> Self {
        let g = psi.x_grid;
        let dx = g.step();
        let n = g.n;
        // momentum mean and spread from finite differences of ψ
        let mut p1 = 0.0;
        let mut p2 = 0.0;
        for i in 1..n - 1 {
            let d = (psi.values[i + 1] - psi.values[i - 1]) / (2.0 * dx);
            p1 += (psi.values[i].conj() * d).im * dx;
            p2 += d.norm_sqr() * dx;
        }
        let spread = (p2 - p1 * p1).max(0.0).sqrt();
        let k_max = (p1.abs() + 14.0 * spread + 4.0).min(PI / dx);

        let centre = 0.5 * (g.min + g.max);
        let range = g.max - g.min;
        let far = outputs.iter().map(|y| (y - centre).abs()).fold(0.0, f64::max);
        let half_period = (2.0 * range + 20.0).max(far + range);
        let dk = PI / half_period;
        let nk = (2.0 * k_max / dk).ceil() as usize + 1;
        let k: Vec<f64> = (0..nk).map(|j| -k_max + j as f64 * dk).collect();
        let xs = g.points();
        let amplitudes = k
            .par_iter()
            .map(|&kj| {
                (0..n)
                    .map(|i| psi.values[i] * C64::from_polar(g.weight(i), -kj * xs[i]))
                    .sum::<C64>()
            })
            .collect();
        Self { k, dk, amplitudes }
    }
}

/// Settings for [`inverse_transform`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InversionOptions {
    /// A member counts as covered by the X grid when `|Σ w ΔX - 1|` is below this.
    pub coverage_tol: f64,
    /// Rebuild truncated members from covered ones by homogeneity.
    pub homogeneity_proxy: bool,
}

impl Default for InversionOptions {
    fn default() -> Self {
        Self { coverage_tol: 1e-6, homogeneity_proxy: true }
    }
}

fn axis_from_values(mut vals: Vec<f64>, name: &str) -> Result<UniformGrid> {
    vals.sort_by(f64::total_cmp);
    let span = vals.last().unwrap() - vals[0];
    let tol = 1e-9 * span.max(1.0);
    vals.dedup_by(|a, b| (*a - *b).abs() <= tol);
    if vals.len() < 2 {
        return Err(Error::Family(format!("{name} takes a single value; a 2-D (μ, ν) grid is required")));
    }
    let grid = UniformGrid::new(vals[0], *vals.last().unwrap(), vals.len())?;
    let h = grid.step();
    for (i, v) in vals.iter().enumerate() {
        if (v - grid.point(i)).abs() > 1e-6 * h {
            return Err(Error::Family(format!("{name} values are not on a regular grid")));
        }
    }
    Ok(grid)
}

/// Rebuild the Wigner map from tomograms at `δ = 0` on a regular `(μ, ν)` grid:
///
/// `W(q, p) = (1/2π) ∫∫ dμ dν e^{-i(μq + νp)} ∫ dX w(X, μ, ν) e^{iX}`,
///
/// with trapezoidal weights in every variable. The grid node at the origin may
/// be absent (the frame is degenerate); there the inner integral is exactly 1.
///
/// Members whose tomogram is truncated by the shared X grid are replaced, when
/// `homogeneity_proxy` is set, using `w(X, μ, ν) = w(X/s, μ/s, ν/s) / s`: the
/// member is pulled back to the largest radius where every member is covered,
/// interpolating bilinearly between neighbouring members there.
///
/// The result is divided by its own `ΣΣ W ΔqΔp / 2π`; the applied factor is
/// recorded as the map's `norm_constant`.
pub fn inverse_transform(
    family: &[Tomogram],
    q_grid: &UniformGrid,
    p_grid: &UniformGrid,
    opts: &InversionOptions,
) -> Result<WignerMap> {
    if family.len() < 2 {
        return Err(Error::Family(format!("need a (μ, ν) family, got {} tomogram(s)", family.len())));
    }
    let x_grid = family[0].x_grid;
    for t in family {
        if t.frame.delta != 0.0 {
            return Err(Error::Family(format!("member at (μ, ν) = ({}, {}) has δ = {}", t.frame.mu, t.frame.nu, t.frame.delta)));
        }
        if !t.x_grid.matches(&x_grid, 1e-9) {
            return Err(Error::Family("members use inconsistent X grids".into()));
        }
    }
    let mu_axis = axis_from_values(family.iter().map(|t| t.frame.mu).collect(), "mu")?;
    let nu_axis = axis_from_values(family.iter().map(|t| t.frame.nu).collect(), "nu")?;
    let (nm, nn) = (mu_axis.n, nu_axis.n);

    let mut slots: Vec<Option<&Tomogram>> = vec![None; nm * nn];
    for t in family {
        let i = mu_axis.fractional_index(t.frame.mu).round() as usize;
        let j = nu_axis.fractional_index(t.frame.nu).round() as usize;
        if slots[i * nn + j].replace(t).is_some() {
            return Err(Error::Family(format!("duplicate member at ({}, {})", t.frame.mu, t.frame.nu)));
        }
    }
    let is_origin = |i: usize, j: usize| {
        mu_axis.point(i).abs() < 1e-9 * mu_axis.step() && nu_axis.point(j).abs() < 1e-9 * nu_axis.step()
    };
    for i in 0..nm {
        for j in 0..nn {
            if slots[i * nn + j].is_none() && !is_origin(i, j) {
                return Err(Error::Family(format!(
                    "no member at (μ, ν) = ({}, {})",
                    mu_axis.point(i),
                    nu_axis.point(j)
                )));
            }
        }
    }

    let xs = x_grid.points();
    let covered: Vec<bool> = slots
        .iter()
        .map(|s| s.is_none_or(|t| (t.normalization() - 1.0).abs() <= opts.coverage_tol))
        .collect();
    let h = mu_axis.step().max(nu_axis.step());
    let first_uncovered = slots
        .iter()
        .zip(&covered)
        .filter(|(_, c)| !**c)
        .filter_map(|(s, _)| s.map(|t| t.frame.scale()))
        .fold(f64::INFINITY, f64::min);
    let proxy_radius = first_uncovered - 1.5 * h;
    if opts.homogeneity_proxy && first_uncovered.is_finite() && proxy_radius < 3.0 * h {
        return Err(Error::Family(format!(
            "X grid [{}, {}] truncates members already at |(μ, ν)| = {first_uncovered:.3}",
            x_grid.min, x_grid.max
        )));
    }

    let characteristic = |values: &[f64], k: f64| -> C64 {
        values
            .iter()
            .zip(&xs)
            .enumerate()
            .map(|(i, (&w, &x))| C64::from_polar(w * x_grid.weight(i), k * x))
            .sum()
    };
    let interpolate_member = |mu: f64, nu: f64| -> Vec<f64> {
        let fm = mu_axis.fractional_index(mu);
        let fn_ = nu_axis.fractional_index(nu);
        let i = (fm.floor() as usize).min(nm - 2);
        let j = (fn_.floor() as usize).min(nn - 2);
        let (a, b) = (fm - i as f64, fn_ - j as f64);
        let corner = |ii: usize, jj: usize| slots[ii * nn + jj].expect("proxy neighbours are members");
        let (c00, c10, c01, c11) = (corner(i, j), corner(i + 1, j), corner(i, j + 1), corner(i + 1, j + 1));
        (0..xs.len())
            .map(|k| {
                (1.0 - a) * (1.0 - b) * c00.values[k]
                    + a * (1.0 - b) * c10.values[k]
                    + (1.0 - a) * b * c01.values[k]
                    + a * b * c11.values[k]
            })
            .collect()
    };

    let char_fn: Vec<C64> = (0..nm * nn)
        .into_par_iter()
        .map(|idx| match slots[idx] {
            None => C64::new(1.0, 0.0),
            Some(t) => {
                if covered[idx] || !opts.homogeneity_proxy {
                    characteristic(&t.values, 1.0)
                } else {
                    let s = t.frame.scale() / proxy_radius;
                    let proxy = interpolate_member(t.frame.mu / s, t.frame.nu / s);
                    characteristic(&proxy, s)
                }
            }
        })
        .collect();

    let mus = mu_axis.points();
    let nus = nu_axis.points();
    let qs = q_grid.points();
    let ps = p_grid.points();
    // A[j][q] = Σ_μ wμ F(μ, ν_j) e^{-iμq}
    let partial: Vec<Vec<C64>> = (0..nn)
        .into_par_iter()
        .map(|j| {
            qs.iter()
                .map(|&q| {
                    (0..nm)
                        .map(|i| char_fn[i * nn + j] * C64::from_polar(mu_axis.weight(i), -mus[i] * q))
                        .sum()
                })
                .collect()
        })
        .collect();
    let values: Vec<f64> = (0..qs.len())
        .into_par_iter()
        .flat_map_iter(|iq| {
            let partial = &partial;
            let nus = &nus;
            ps.iter()
                .map(move |&p| {
                    let acc: C64 = (0..nn)
                        .map(|j| partial[j][iq] * C64::from_polar(nu_axis.weight(j), -nus[j] * p))
                        .sum();
                    acc.re / (2.0 * PI)
                })
                .collect::<Vec<f64>>()
        })
        .collect();

    let raw = WignerMap::from_values(*q_grid, *p_grid, values, family[0].time, family[0].spec, 1.0, 0.0);
    let raw_norm = raw.diagnostics.box_normalization;
    if !(raw_norm.is_finite() && raw_norm.abs() > 1e-12) {
        return Err(Error::Convention(format!("reconstructed map has normalization {raw_norm:e}")));
    }
    let scaled: Vec<f64> = raw.values.iter().map(|v| v / raw_norm).collect();
    Ok(WignerMap::from_values(*q_grid, *p_grid, scaled, raw.time, raw.spec, 1.0 / raw_norm, 0.0))
}

/// Tomograms of `model` at `δ = 0` on the square `(μ, ν)` grid `axis × axis`,
/// skipping the degenerate origin.
pub fn tomogram_family<M: MarginalModel>(model: &M, axis: &UniformGrid, x_grid: &UniformGrid) -> Vec<Tomogram> {
    let pts = axis.points();
    let frames: Vec<ReferenceFrame> = pts
        .iter()
        .flat_map(|&mu| pts.iter().map(move |&nu| ReferenceFrame { mu, nu, delta: 0.0 }))
        .filter(|f| f.scale() > 1e-9 * axis.step())
        .collect();
    frames.par_iter().map(|f| model.tomogram(f, x_grid)).collect()
}
