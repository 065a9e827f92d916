//! Adaptive Dormand–Prince 5(4) integrator for small real systems.
//!
//! The stepper returns every accepted node `(t, y, y')` so that callers can
//! build their own dense output. The final node lands exactly on `t_end`.

use crate::error::{Error, Result};

/// Mixed relative/absolute error control, `|e_i| <= abs + rel * |y_i|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
}

impl Tolerance {
    pub fn new(rel: f64, abs: f64) -> Result<Self> {
        if !(rel > 0.0 && rel.is_finite()) || !(abs > 0.0 && abs.is_finite()) {
            return Err(Error::invalid(format!(
                "tolerances must be positive and finite, got rel={rel}, abs={abs}"
            )));
        }
        Ok(Self { rel, abs })
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { rel: 1e-9, abs: 1e-12 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepperConfig {
    pub tol: Tolerance,
    pub max_step: f64,
    pub max_steps: usize,
}

impl StepperConfig {
    pub fn new(tol: Tolerance, max_step: f64) -> Self {
        Self { tol, max_step, max_steps: 10_000_000 }
    }
}

/// One accepted node of an integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    pub dy: [f64; N],
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;

// 5th-order weights (also row 7 of the tableau, FSAL)
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;

// difference between 5th- and 4th-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const MAX_GROWTH: f64 = 5.0;
const MIN_SHRINK: f64 = 0.2;

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        *o += h * acc;
    }
    out
}

/// Integrate `y' = f(t, y)` from `t0` to `t_end > t0`.
pub fn integrate<const N: usize, F>(
    f: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    cfg: &StepperConfig,
) -> Result<Vec<Node<N>>>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    if !(t_end > t0) {
        return Err(Error::invalid(format!("integration needs t_end > t0, got {t0} -> {t_end}")));
    }
    if !(cfg.max_step > 0.0) {
        return Err(Error::invalid("max_step must be positive"));
    }
    let tol = cfg.tol;
    let span = t_end - t0;

    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    check_finite(t, &y, &k1)?;
    let mut nodes = vec![Node { t, y, dy: k1 }];

    let mut h = (1e-2 * span).min(cfg.max_step);
    let mut last_rejected = false;

    for _ in 0..cfg.max_steps {
        if t >= t_end {
            return Ok(nodes);
        }
        let h_min = 16.0 * f64::EPSILON * t.abs().max(span);
        if h < h_min {
            return Err(Error::Integration {
                t,
                reason: format!("step size underflow (h = {h:e})"),
            });
        }
        let last = t + h >= t_end;
        let h_step = if last { t_end - t } else { h };

        let k2 = f(t + C2 * h_step, &axpy(&y, h_step, &[(A21, &k1)]));
        let k3 = f(t + C3 * h_step, &axpy(&y, h_step, &[(A31, &k1), (A32, &k2)]));
        let k4 = f(t + C4 * h_step, &axpy(&y, h_step, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = f(
            t + C5 * h_step,
            &axpy(&y, h_step, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = f(
            t + h_step,
            &axpy(&y, h_step, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        );
        let y_new = axpy(&y, h_step, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
        let t_new = if last { t_end } else { t + h_step };
        let k7 = f(t_new, &y_new);
        check_finite(t_new, &y_new, &k7)?;

        let mut err_sq = 0.0;
        for i in 0..N {
            let e = h_step
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let scale = tol.abs + tol.rel * y[i].abs().max(y_new[i].abs());
            err_sq += (e / scale).powi(2);
        }
        let err = (err_sq / N as f64).sqrt();

        if err <= 1.0 {
            t = t_new;
            y = y_new;
            k1 = k7;
            nodes.push(Node { t, y, dy: k1 });
            let mut factor = if err == 0.0 { MAX_GROWTH } else { SAFETY * err.powf(-0.2) };
            factor = factor.clamp(MIN_SHRINK, MAX_GROWTH);
            if last_rejected {
                factor = factor.min(1.0);
            }
            h = (h_step * factor).min(cfg.max_step);
            last_rejected = false;
        } else {
            let factor = (SAFETY * err.powf(-0.2)).clamp(MIN_SHRINK, 1.0);
            h = h_step * factor;
            last_rejected = true;
        }
    }
    Err(Error::Integration { t, reason: format!("exceeded {} steps", cfg.max_steps) })
}

fn check_finite<const N: usize>(t: f64, y: &[f64; N], dy: &[f64; N]) -> Result<()> {
    if y.iter().chain(dy.iter()).all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Integration { t, reason: "non-finite state".into() })
    }
}
