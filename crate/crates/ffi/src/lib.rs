//! C ABI over the `symtomo` engine.
//!
//! Every fallible function returns a [`SymtomoStatus`]; on failure the message
//! is kept per thread and can be copied out with [`symtomo_last_error_message`].
//! Trajectories are opaque handles owned by the caller and released with
//! [`symtomo_trajectory_free`]. Output arrays are caller-allocated.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_complex::Complex64 as C64;
use symtomo::states::wigner_analytic;
use symtomo::tomograms::{gaussian_moments, marginal, FormulaVariant};
use symtomo::{solve_epsilon, ComplexTrajectory, Error, ReferenceFrame, StateKind, StateSpec, TrapParams, UniformGrid};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymtomoStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Integration = 3,
    OutOfRange = 4,
    Coverage = 5,
    Numerical = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymtomoStateKind {
    Coherent = 0,
    EvenCat = 1,
    OddCat = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymtomoState {
    pub kind: SymtomoStateKind,
    pub alpha_re: f64,
    pub alpha_im: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymtomoFrame {
    pub mu: f64,
    pub nu: f64,
    pub delta: f64,
}

/// `n` equally spaced points from `min` to `max` inclusive.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymtomoGrid {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SymtomoSample {
    pub eps_re: f64,
    pub eps_im: f64,
    pub eps_dot_re: f64,
    pub eps_dot_im: f64,
}

/// Opaque solved trajectory.
pub struct SymtomoTrajectory {
    inner: ComplexTrajectory,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> SymtomoStatus {
    match e {
        Error::Integration { .. } => SymtomoStatus::Integration,
        Error::OutOfRange { .. } => SymtomoStatus::OutOfRange,
        Error::Coverage(_) => SymtomoStatus::Coverage,
        Error::Wronskian { .. } | Error::NonPositiveVariance(_) | Error::Convention(_) => SymtomoStatus::Numerical,
        _ => SymtomoStatus::InvalidArgument,
    }
}

/// Runs `f`, translating errors and panics into a status and a stored message.
fn guarded(f: impl FnOnce() -> Result<(), (SymtomoStatus, String)>) -> SymtomoStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SymtomoStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            SymtomoStatus::Panic
        }
    }
}

fn engine<T>(r: symtomo::Result<T>) -> Result<T, (SymtomoStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (SymtomoStatus, String) {
    (SymtomoStatus::NullPointer, format!("{what} is NULL"))
}

fn to_grid(g: &SymtomoGrid) -> Result<UniformGrid, (SymtomoStatus, String)> {
    engine(UniformGrid::new(g.min, g.max, g.n))
}

fn to_state(s: &SymtomoState) -> StateSpec {
    let kind = match s.kind {
        SymtomoStateKind::Coherent => StateKind::Coherent,
        SymtomoStateKind::EvenCat => StateKind::EvenCat,
        SymtomoStateKind::OddCat => StateKind::OddCat,
    };
    StateSpec { kind, alpha: C64::new(s.alpha_re, s.alpha_im) }
}

fn to_frame(f: &SymtomoFrame) -> Result<ReferenceFrame, (SymtomoStatus, String)> {
    engine(ReferenceFrame::new(f.mu, f.nu, f.delta))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn symtomo_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the calling thread's last error message into `buf` (truncated and
/// always NUL-terminated when `len > 0`). Returns the full message length
/// without the terminator, or 0 when there is no error.
///
/// # Safety
/// `buf` must be NULL or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn symtomo_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| match e.borrow().as_ref() {
        None => {
            if !buf.is_null() && len > 0 {
                *buf = 0;
            }
            0
        }
        Some(msg) => {
            let bytes = msg.as_bytes();
            if !buf.is_null() && len > 0 {
                let n = bytes.len().min(len - 1);
                ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
                *buf.add(n) = 0;
            }
            bytes.len()
        }
    })
}

/// Solves the trajectory on `[0, t_end]` and stores a new handle in `*out`.
///
/// # Safety
/// `out` must be NULL or a valid pointer to writable storage for a pointer.
#[no_mangle]
pub unsafe extern "C" fn symtomo_trajectory_solve(
    kappa: f64,
    omega_mod: f64,
    t_end: f64,
    tol: f64,
    out: *mut *mut SymtomoTrajectory,
) -> SymtomoStatus {
    guarded(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let params = engine(TrapParams::new(kappa, omega_mod))?;
        let inner = engine(solve_epsilon(&params, t_end, tol))?;
        *out = Box::into_raw(Box::new(SymtomoTrajectory { inner }));
        Ok(())
    })
}

/// Releases a handle; NULL is ignored.
///
/// # Safety
/// `traj` must be NULL or a handle from [`symtomo_trajectory_solve`] that has
/// not been freed.
#[no_mangle]
pub unsafe extern "C" fn symtomo_trajectory_free(traj: *mut SymtomoTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// Number of stored integrator nodes.
///
/// # Safety
/// `traj` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn symtomo_trajectory_len(traj: *const SymtomoTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.inner.len())
}

/// `ε(t)` and `ε̇(t)` by dense interpolation.
///
/// # Safety
/// `traj` must be NULL or a live handle; `out` NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn symtomo_trajectory_eval(
    traj: *const SymtomoTrajectory,
    t: f64,
    out: *mut SymtomoSample,
) -> SymtomoStatus {
    guarded(|| {
        let traj = traj.as_ref().ok_or_else(|| null("trajectory"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let (e, d) = engine(traj.inner.epsilon_at(t))?;
        *out = SymtomoSample { eps_re: e.re, eps_im: e.im, eps_dot_re: d.re, eps_dot_im: d.im };
        Ok(())
    })
}

/// Largest `|Im(ε ε̇*) + 1|` over the stored nodes.
///
/// # Safety
/// `traj` must be NULL or a live handle; `out` NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn symtomo_trajectory_max_wronskian_residual(
    traj: *const SymtomoTrajectory,
    out: *mut f64,
) -> SymtomoStatus {
    guarded(|| {
        let traj = traj.as_ref().ok_or_else(|| null("trajectory"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = traj.inner.max_wronskian_residual();
        Ok(())
    })
}

/// Mean and variance of `X = μq + νp + δ` for the coherent packet at time `t`.
///
/// # Safety
/// `traj` must be NULL or a live handle; `mean`, `variance` NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn symtomo_gaussian_moments(
    traj: *const SymtomoTrajectory,
    t: f64,
    alpha_re: f64,
    alpha_im: f64,
    frame: SymtomoFrame,
    mean: *mut f64,
    variance: *mut f64,
) -> SymtomoStatus {
    guarded(|| {
        let traj = traj.as_ref().ok_or_else(|| null("trajectory"))?;
        let mean = mean.as_mut().ok_or_else(|| null("mean"))?;
        let variance = variance.as_mut().ok_or_else(|| null("variance"))?;
        let f = to_frame(&frame)?;
        let s = engine(traj.inner.sample_at(t))?;
        let (m, v) = gaussian_moments(C64::new(alpha_re, alpha_im), &s, &f);
        *mean = m;
        *variance = v;
        Ok(())
    })
}

/// Closed-form tomogram of `state` at time `t` on `x_grid`, written to
/// `out[0..x_grid.n]`.
///
/// # Safety
/// `traj` must be NULL or a live handle; `out` NULL or `out_len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn symtomo_marginal(
    traj: *const SymtomoTrajectory,
    t: f64,
    state: SymtomoState,
    frame: SymtomoFrame,
    x_grid: SymtomoGrid,
    out: *mut f64,
    out_len: usize,
) -> SymtomoStatus {
    guarded(|| {
        let traj = traj.as_ref().ok_or_else(|| null("trajectory"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let xg = to_grid(&x_grid)?;
        if out_len < xg.n {
            return Err((SymtomoStatus::InvalidArgument, format!("out holds {out_len} values, need {}", xg.n)));
        }
        let s = engine(traj.inner.sample_at(t))?;
        let tomo = engine(marginal(&to_state(&state), &s, &to_frame(&frame)?, &xg, FormulaVariant::default()))?;
        ptr::copy_nonoverlapping(tomo.values.as_ptr(), out, xg.n);
        Ok(())
    })
}

/// Analytic Wigner map (`∫W dq dp = 2π`) at time `t`, q-major, written to
/// `out[0..q_grid.n * p_grid.n]`.
///
/// # Safety
/// `traj` must be NULL or a live handle; `out` NULL or `out_len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn symtomo_wigner(
    traj: *const SymtomoTrajectory,
    t: f64,
    state: SymtomoState,
    q_grid: SymtomoGrid,
    p_grid: SymtomoGrid,
    out: *mut f64,
    out_len: usize,
) -> SymtomoStatus {
    guarded(|| {
        let traj = traj.as_ref().ok_or_else(|| null("trajectory"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let (qg, pg) = (to_grid(&q_grid)?, to_grid(&p_grid)?);
        let need = qg.n.checked_mul(pg.n).ok_or((SymtomoStatus::InvalidArgument, "grid too large".to_string()))?;
        if out_len < need {
            return Err((SymtomoStatus::InvalidArgument, format!("out holds {out_len} values, need {need}")));
        }
        let s = engine(traj.inner.sample_at(t))?;
        let map = engine(wigner_analytic(&to_state(&state), &s, &qg, &pg))?;
        ptr::copy_nonoverlapping(map.values.as_ptr(), out, need);
        Ok(())
    })
}
