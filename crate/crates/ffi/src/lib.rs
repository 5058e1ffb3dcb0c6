//! C ABI over the `liqshock` solvers.
//!
//! Every fallible call returns an [`LqsStatus`]; on failure the message is
//! available from [`lqs_last_error_message`] on the same thread. Handles are
//! opaque and must be released with their matching `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use liqshock::analysis::{convergence_study, richardson, Probe, Regime, StudySetup};
use liqshock::mesh::{time_grid_from_space, GridKind, SpatialGrid, TimeStepRule};
use liqshock::model::{derive_constants, to_prices, ModelParams};
use liqshock::schemes::{solve_forward, SchemeConfig, SchemeKind};
use liqshock::{Error, ErrorKind};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LqsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Numerical = 3,
    Io = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LqsScheme {
    Linear = 0,
    Linearized = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LqsGrid {
    Uniform = 0,
    TavellaRandall = 1,
}

/// Per-node series held by a solution.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LqsField {
    Nodes = 0,
    /// `p` at issue time.
    PriceLiquid = 1,
    /// `q` at issue time.
    PriceIlliquid = 2,
    /// `R⁰ = U/γ` at issue time.
    ValueLiquid = 3,
    /// `R¹ = V/γ` at issue time.
    ValueIlliquid = 4,
}

/// Opaque market/utility parameter set.
pub struct LqsParams {
    inner: ModelParams,
}

/// Opaque solved grid at issue time.
pub struct LqsSolution {
    gamma: f64,
    grid: SpatialGrid,
    p: Vec<f64>,
    q: Vec<f64>,
    u: Vec<f64>,
    v: Vec<f64>,
    restriction_violations: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

fn status_of(err: &Error) -> LqsStatus {
    match err.kind() {
        ErrorKind::Validation => LqsStatus::InvalidArgument,
        ErrorKind::Numerical => LqsStatus::Numerical,
        ErrorKind::Io => LqsStatus::Io,
    }
}

/// Run `f`, translating errors and panics into a status and the last-error slot.
fn guard(f: impl FnOnce() -> Result<(), (LqsStatus, String)>) -> LqsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            LqsStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(format!("internal panic: {msg}"));
            LqsStatus::Panic
        }
    }
}

fn lift<T>(r: liqshock::Result<T>) -> Result<T, (LqsStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (LqsStatus, String) {
    (LqsStatus::NullPointer, format!("`{what}` is null"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (LqsStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

fn scheme_kind(s: LqsScheme) -> SchemeKind {
    match s {
        LqsScheme::Linear => SchemeKind::ImexLinear,
        LqsScheme::Linearized => SchemeKind::ImexLinearized,
    }
}

fn grid_kind(g: LqsGrid, alpha: f64) -> GridKind {
    match g {
        LqsGrid::Uniform => GridKind::Uniform,
        LqsGrid::TavellaRandall => GridKind::TavellaRandall { alpha },
    }
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next `lqs_*` call on this thread.
#[no_mangle]
pub extern "C" fn lqs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Reference market: μ=0.06, σ=0.3, ν₀₁=1, ν₁₀=12, K=2, T=1, S ∈ [0, 5], γ=1.
#[no_mangle]
pub extern "C" fn lqs_params_reference() -> *mut LqsParams {
    Box::into_raw(Box::new(LqsParams {
        inner: ModelParams::reference_market(),
    }))
}

/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn lqs_params_new(
    sigma: f64,
    mu: f64,
    gamma: f64,
    nu01: f64,
    nu10: f64,
    strike: f64,
    horizon: f64,
    s_min: f64,
    s_max: f64,
    out: *mut *mut LqsParams,
) -> LqsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = ModelParams {
            sigma,
            mu,
            gamma,
            nu01,
            nu10,
            strike,
            horizon,
            s_min,
            s_max,
        };
        lift(inner.validate())?;
        *out = Box::into_raw(Box::new(LqsParams { inner }));
        Ok(())
    })
}

/// # Safety
/// `params` must come from this library and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn lqs_params_free(params: *mut LqsParams) {
    if !params.is_null() {
        drop(Box::from_raw(params));
    }
}

/// `(F₀(t), F₁(t))` of the no-option value functions.
///
/// # Safety
/// `params` must be a live handle; `f0`, `f1` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lqs_f_values(params: *const LqsParams, t: f64, f0: *mut f64, f1: *mut f64) -> LqsStatus {
    guard(|| {
        let p = deref(params, "params")?;
        if f0.is_null() || f1.is_null() {
            return Err(null("f0/f1"));
        }
        if !(t >= 0.0 && t <= p.inner.horizon) {
            return Err((LqsStatus::InvalidArgument, format!("t = {t} outside [0, horizon]")));
        }
        let dc = lift(derive_constants(&p.inner))?;
        let (a, b) = dc.evaluate_f(t);
        *f0 = a;
        *f1 = b;
        Ok(())
    })
}

/// `(2^p·w − z)/(2^p − 1)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lqs_richardson(z: f64, w: f64, p: u32, out: *mut f64) -> LqsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = lift(richardson(z, w, p))?;
        Ok(())
    })
}

/// Solve with the natural left boundary and `Δτ = min ΔS / 2`.
///
/// # Safety
/// `params` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lqs_solve(
    params: *const LqsParams,
    scheme: LqsScheme,
    grid: LqsGrid,
    alpha: f64,
    intervals: usize,
    out: *mut *mut LqsSolution,
) -> LqsStatus {
    guard(|| {
        let p = deref(params, "params")?.inner;
        if out.is_null() {
            return Err(null("out"));
        }
        let g = lift(SpatialGrid::build(grid_kind(grid, alpha), p.s_min, p.s_max, p.strike, intervals))?;
        let tg = lift(time_grid_from_space(&g, p.horizon, TimeStepRule::HalfMinSpacing))?;
        let run = lift(solve_forward(&p, &g, &tg, &SchemeConfig::new(scheme_kind(scheme))))?;
        let dc = lift(derive_constants(&p))?;
        let s = run.final_state;
        let (pp, qq) = to_prices(&s.u, &s.v, 0.0, &p, &dc);
        *out = Box::into_raw(Box::new(LqsSolution {
            gamma: p.gamma,
            grid: g,
            p: pp,
            q: qq,
            u: s.u,
            v: s.v,
            restriction_violations: run.diagnostics.restriction_violations,
        }));
        Ok(())
    })
}

/// Number of grid nodes, 0 for a null handle.
///
/// # Safety
/// `sol` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn lqs_solution_len(sol: *const LqsSolution) -> usize {
    sol.as_ref().map_or(0, |s| s.grid.len())
}

/// Steps whose time-step restriction was exceeded, 0 for a null handle.
///
/// # Safety
/// `sol` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn lqs_solution_restriction_violations(sol: *const LqsSolution) -> usize {
    sol.as_ref().map_or(0, |s| s.restriction_violations)
}

/// Copy one series into `buf`, which must hold `len >= lqs_solution_len` values.
///
/// # Safety
/// `sol` must be a live handle; `buf` must be writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn lqs_solution_copy(
    sol: *const LqsSolution,
    field: LqsField,
    buf: *mut f64,
    len: usize,
) -> LqsStatus {
    guard(|| {
        let s = deref(sol, "sol")?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        let n = s.grid.len();
        if len < n {
            return Err((LqsStatus::InvalidArgument, format!("buffer holds {len} values, need {n}")));
        }
        let dst = std::slice::from_raw_parts_mut(buf, n);
        match field {
            LqsField::Nodes => dst.copy_from_slice(s.grid.nodes()),
            LqsField::PriceLiquid => dst.copy_from_slice(&s.p),
            LqsField::PriceIlliquid => dst.copy_from_slice(&s.q),
            LqsField::ValueLiquid => {
                for (d, u) in dst.iter_mut().zip(&s.u) {
                    *d = u / s.gamma;
                }
            }
            LqsField::ValueIlliquid => {
                for (d, v) in dst.iter_mut().zip(&s.v) {
                    *d = v / s.gamma;
                }
            }
        }
        Ok(())
    })
}

/// `R⁰` (`illiquid == false`) or `R¹` at `s`, by linear interpolation.
///
/// # Safety
/// `sol` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lqs_solution_value_at(sol: *const LqsSolution, illiquid: bool, s: f64, out: *mut f64) -> LqsStatus {
    guard(|| {
        let sol = deref(sol, "sol")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let nodes = sol.grid.nodes();
        if !(s >= nodes[0] && s <= nodes[nodes.len() - 1]) {
            return Err((LqsStatus::InvalidArgument, format!("S = {s} outside the grid")));
        }
        let values = if illiquid { &sol.v } else { &sol.u };
        *out = sol.grid.interpolate(values, s) / sol.gamma;
        Ok(())
    })
}

/// # Safety
/// `sol` must come from [`lqs_solve`] and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn lqs_solution_free(sol: *mut LqsSolution) {
    if !sol.is_null() {
        drop(Box::from_raw(sol));
    }
}

/// `R⁰` and `R¹` at the strike for each of `n_levels` doubling levels.
///
/// # Safety
/// `params` must be a live handle; `levels` readable and `out_r0`, `out_r1`
/// writable for `n_levels` entries.
#[no_mangle]
pub unsafe extern "C" fn lqs_convergence_values(
    params: *const LqsParams,
    scheme: LqsScheme,
    grid: LqsGrid,
    alpha: f64,
    levels: *const usize,
    n_levels: usize,
    out_r0: *mut f64,
    out_r1: *mut f64,
) -> LqsStatus {
    guard(|| {
        let p = deref(params, "params")?.inner;
        if levels.is_null() || out_r0.is_null() || out_r1.is_null() {
            return Err(null("levels/out_r0/out_r1"));
        }
        if n_levels == 0 {
            return Err((LqsStatus::InvalidArgument, "no levels".into()));
        }
        let levels = std::slice::from_raw_parts(levels, n_levels);
        let setup = StudySetup::new(p, SchemeConfig::new(scheme_kind(scheme)), grid_kind(grid, alpha));
        let probes = [Probe::AtStrike(Regime::Liquid), Probe::AtStrike(Regime::Illiquid)];
        let study = lift(convergence_study(&setup, levels, &probes))?;
        let r0 = std::slice::from_raw_parts_mut(out_r0, n_levels);
        let r1 = std::slice::from_raw_parts_mut(out_r1, n_levels);
        for k in 0..n_levels {
            r0[k] = study.tables[0][k].value;
            r1[k] = study.tables[1][k].value;
        }
        Ok(())
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn lqs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ptr;

    #[test]
    fn panics_become_status() {
        let st = guard(|| panic!("boom"));
        assert_eq!(st, LqsStatus::Panic);
        let msg = unsafe { std::ffi::CStr::from_ptr(lqs_last_error_message()) };
        assert!(msg.to_str().unwrap().contains("boom"));
    }

    #[test]
    fn interior_nul_in_message_is_tolerated() {
        set_last_error("a\0b");
        let msg = unsafe { std::ffi::CStr::from_ptr(lqs_last_error_message()) };
        assert_eq!(msg.to_str().unwrap(), "a b");
    }

    #[test]
    fn null_out_is_rejected() {
        let st = unsafe { lqs_richardson(1.0, 1.5, 1, ptr::null_mut()) };
        assert_eq!(st, LqsStatus::NullPointer);
    }
}
