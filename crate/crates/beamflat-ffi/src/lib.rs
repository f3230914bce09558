//! C ABI for the beamflat library: opaque handles, integer status codes and
//! a thread-local last-error message. The header is generated by cbindgen
//! into `include/beamflat.h` at build time.
//!
//! Conventions:
//! - every function returns a `BfStatus`; outputs go through pointers
//! - handles are created by `*_new`/`*_compute` style calls and must be
//!   released with the matching `*_free` (freeing NULL is a no-op)
//! - on any non-OK status, `bf_last_error_message()` describes the failure
//!   for the calling thread until the next failing call

use beamflat::gevrey::TrajectoryGen;
use beamflat::model::{h2_norm, l2_norm};
use beamflat::planner::{plan_with_table, Plan, DEFAULT_TABLE_GRID};
use beamflat::sim::{simulate, SimConfig, SimResult};
use beamflat::spectral::{find_eigenvalues, required_truncation, Spectrum};
use beamflat::{compute_gen_tables, BeamError, BeamParams, GenTable};
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

/// Status codes returned by every API call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BfStatus {
    BfOk = 0,
    /// a pointer argument was NULL or an index was out of bounds
    BfNullArgument = 1,
    /// a string argument was not valid UTF-8 / JSON, or a parameter was
    /// outside its documented range
    BfInvalidArgument = 2,
    /// the computation failed (truncation, divergence, rank deficiency, ...)
    BfNumeric = 3,
    /// a panic crossed the boundary; the library state is still consistent
    BfPanic = 4,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let sanitized = msg.replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(sanitized).unwrap());
}

fn classify(err: &BeamError) -> BfStatus {
    match err {
        BeamError::InvalidParameter(_)
        | BeamError::GridMismatch(_)
        | BeamError::OutOfRange(_)
        | BeamError::JetOrderTooSmall { .. }
        | BeamError::TruncationTooDeep { .. }
        | BeamError::Parse(_)
        | BeamError::Json(_)
        | BeamError::Io(_) => BfStatus::BfInvalidArgument,
        _ => BfStatus::BfNumeric,
    }
}

fn fail(err: BeamError) -> BfStatus {
    let code = classify(&err);
    set_error(&err.to_string());
    code
}

/// Run a fallible body with panic containment.
fn guarded<F: FnOnce() -> BfStatus>(body: F) -> BfStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(code) => code,
        Err(_) => {
            set_error("internal panic");
            BfStatus::BfPanic
        }
    }
}

/// Message for the last failing call on this thread (empty string if none).
/// The pointer is valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn bf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

macro_rules! check_null {
    ($($p:expr),+) => {
        $(if $p.is_null() {
            set_error(concat!("NULL argument: ", stringify!($p)));
            return BfStatus::BfNullArgument;
        })+
    };
}

unsafe fn parse_cstr<'a>(p: *const c_char, what: &str) -> Result<&'a str, BfStatus> {
    match CStr::from_ptr(p).to_str() {
        Ok(s) => Ok(s),
        Err(_) => {
            set_error(&format!("{what} is not valid UTF-8"));
            Err(BfStatus::BfInvalidArgument)
        }
    }
}

// ---------------------------------------------------------------------------
// parameters

/// Opaque beam parameter set.
pub struct BfParams(BeamParams);

/// Parse beam parameters from their JSON form.
///
/// # Safety
/// `json` must be a NUL-terminated string, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bf_params_from_json(
    json: *const c_char,
    out: *mut *mut BfParams,
) -> BfStatus {
    check_null!(json, out);
    guarded(|| {
        let text = match parse_cstr(json, "params json") {
            Ok(s) => s,
            Err(c) => return c,
        };
        match BeamParams::from_json(text) {
            Ok(p) => {
                *out = Box::into_raw(Box::new(BfParams(p)));
                BfStatus::BfOk
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `p` must come from `bf_params_from_json` (or be NULL) and not be reused.
#[no_mangle]
pub unsafe extern "C" fn bf_params_free(p: *mut BfParams) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

// ---------------------------------------------------------------------------
// generating-function tables

/// Opaque generating-function table (levels 0..=K on a uniform grid).
pub struct BfGenTable(GenTable);

/// Compute the generating-function cascade up to level `k_max` on a grid of
/// `grid_n` intervals.
///
/// # Safety
/// `params` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn bf_gentable_compute(
    params: *const BfParams,
    k_max: usize,
    grid_n: usize,
    out: *mut *mut BfGenTable,
) -> BfStatus {
    check_null!(params, out);
    guarded(|| {
        let p = &(*params).0;
        match compute_gen_tables(p, k_max, grid_n) {
            Ok(t) => {
                *out = Box::into_raw(Box::new(BfGenTable(t)));
                BfStatus::BfOk
            }
            Err(e) => fail(e),
        }
    })
}

/// Copy the boundary values g_k(L), g_{k,x}(L), h_k(L), h_{k,x}(L) for
/// k = 0..len-1 into the caller's buffers; `len` must be at most K + 1.
///
/// # Safety
/// The four buffers must hold at least `len` doubles each.
#[no_mangle]
pub unsafe extern "C" fn bf_gentable_boundary_values(
    table: *const BfGenTable,
    gl: *mut f64,
    gxl: *mut f64,
    hl: *mut f64,
    hxl: *mut f64,
    len: usize,
) -> BfStatus {
    check_null!(table, gl, gxl, hl, hxl);
    let t = &(*table).0;
    if len > t.k_max + 1 {
        set_error("len exceeds K + 1");
        return BfStatus::BfNullArgument;
    }
    std::ptr::copy_nonoverlapping(t.g_l.as_ptr(), gl, len);
    std::ptr::copy_nonoverlapping(t.gx_l.as_ptr(), gxl, len);
    std::ptr::copy_nonoverlapping(t.h_l.as_ptr(), hl, len);
    std::ptr::copy_nonoverlapping(t.hx_l.as_ptr(), hxl, len);
    BfStatus::BfOk
}

/// # Safety
/// `t` must come from `bf_gentable_compute` (or be NULL) and not be reused.
#[no_mangle]
pub unsafe extern "C" fn bf_gentable_free(t: *mut BfGenTable) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

// ---------------------------------------------------------------------------
// plans

/// Opaque open-loop transfer plan.
pub struct BfPlan(Plan);

/// Build a transfer plan between the states generated by the two trajectory
/// generators (JSON grammar: constant / poly_exp / sinusoid / sum).
///
/// # Safety
/// `params`, `y0_json`, `yt_json` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn bf_plan_build(
    params: *const BfParams,
    y0_json: *const c_char,
    yt_json: *const c_char,
    t_horizon: f64,
    s: f64,
    n: usize,
    out: *mut *mut BfPlan,
) -> BfStatus {
    check_null!(params, y0_json, yt_json, out);
    guarded(|| {
        let p = &(*params).0;
        let y0_text = match parse_cstr(y0_json, "y0 json") {
            Ok(s) => s,
            Err(c) => return c,
        };
        let yt_text = match parse_cstr(yt_json, "yT json") {
            Ok(s) => s,
            Err(c) => return c,
        };
        let y0: TrajectoryGen = match serde_json::from_str(y0_text) {
            Ok(g) => g,
            Err(e) => return fail(e.into()),
        };
        let yt: TrajectoryGen = match serde_json::from_str(yt_text) {
            Ok(g) => g,
            Err(e) => return fail(e.into()),
        };
        let k_max = (n + 2).max(12);
        let table = match compute_gen_tables(p, k_max, DEFAULT_TABLE_GRID) {
            Ok(t) => t,
            Err(e) => return fail(e),
        };
        match plan_with_table(p, table, y0, yt, t_horizon, s, n) {
            Ok(plan) => {
                *out = Box::into_raw(Box::new(BfPlan(plan)));
                BfStatus::BfOk
            }
            Err(e) => fail(e),
        }
    })
}

/// f^N(t).
///
/// # Safety
/// `plan` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn bf_plan_eval_control(
    plan: *const BfPlan,
    t: f64,
    out: *mut f64,
) -> BfStatus {
    check_null!(plan, out);
    guarded(|| match (*plan).0.eval_control(t) {
        Ok(v) => {
            *out = v;
            BfStatus::BfOk
        }
        Err(e) => fail(e),
    })
}

/// partial_x^a partial_t^b of the planned field at (x, t); a <= 4, b <= 2.
///
/// # Safety
/// `plan` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn bf_plan_eval_w(
    plan: *const BfPlan,
    x: f64,
    t: f64,
    x_order: usize,
    t_order: usize,
    out: *mut f64,
) -> BfStatus {
    check_null!(plan, out);
    guarded(|| match (*plan).0.eval_w(x, t, x_order, t_order) {
        Ok(v) => {
            *out = v;
            BfStatus::BfOk
        }
        Err(e) => fail(e),
    })
}

/// L2(0, T) distance between the controls truncated at two levels.
///
/// # Safety
/// `plan` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn bf_plan_control_l2_gap(
    plan: *const BfPlan,
    n_lo: usize,
    n_hi: usize,
    out: *mut f64,
) -> BfStatus {
    check_null!(plan, out);
    guarded(|| match (*plan).0.control_l2_gap(n_lo, n_hi) {
        Ok(v) => {
            *out = v;
            BfStatus::BfOk
        }
        Err(e) => fail(e),
    })
}

/// # Safety
/// `p` must come from `bf_plan_build` (or be NULL) and not be reused.
#[no_mangle]
pub unsafe extern "C" fn bf_plan_free(p: *mut BfPlan) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

// ---------------------------------------------------------------------------
// simulation

/// Opaque finite-difference run result.
pub struct BfSimResult(SimResult);

/// Integrate the beam under the plan's control from the plan's own induced
/// initial state. `nx` is the number of spatial intervals, `dt` the step.
///
/// # Safety
/// `params`, `plan` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn bf_simulate_plan(
    params: *const BfParams,
    plan: *const BfPlan,
    nx: usize,
    dt: f64,
    out: *mut *mut BfSimResult,
) -> BfStatus {
    check_null!(params, plan, out);
    guarded(|| {
        let p = &(*params).0;
        let pl = &(*plan).0;
        let z0 = match pl.induced_state(0.0, nx) {
            Ok(z) => z,
            Err(e) => return fail(e),
        };
        let cfg = SimConfig {
            nx,
            dt,
            t_end: pl.horizon(),
            snapshot_every: 0.01,
        };
        match simulate(p, &z0, pl, &cfg) {
            Ok(r) => {
                *out = Box::into_raw(Box::new(BfSimResult(r)));
                BfStatus::BfOk
            }
            Err(e) => fail(e),
        }
    })
}

/// Full H2 norm of the terminal deflection and L2 norm of the terminal
/// velocity. Either output pointer may be NULL to skip it.
///
/// # Safety
/// `result` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bf_sim_terminal_norms(
    result: *const BfSimResult,
    h2_w: *mut f64,
    l2_wt: *mut f64,
) -> BfStatus {
    check_null!(result);
    let r = &(*result).0;
    if !h2_w.is_null() {
        *h2_w = h2_norm(&r.terminal.u);
    }
    if !l2_wt.is_null() {
        *l2_wt = l2_norm(&r.terminal.v);
    }
    BfStatus::BfOk
}

/// Number of recorded snapshots.
///
/// # Safety
/// `result` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn bf_sim_snapshot_count(
    result: *const BfSimResult,
    out: *mut usize,
) -> BfStatus {
    check_null!(result, out);
    *out = (*result).0.times.len();
    BfStatus::BfOk
}

/// Tip trace at snapshot `i`: time, w(0,t), w_x(0,t).
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn bf_sim_tip_at(
    result: *const BfSimResult,
    i: usize,
    t: *mut f64,
    w0: *mut f64,
    wx0: *mut f64,
) -> BfStatus {
    check_null!(result, t, w0, wx0);
    let r = &(*result).0;
    if i >= r.tip.len() {
        set_error("snapshot index out of bounds");
        return BfStatus::BfNullArgument;
    }
    let (a, b, c) = r.tip[i];
    *t = a;
    *w0 = b;
    *wx0 = c;
    BfStatus::BfOk
}

/// # Safety
/// `r` must come from `bf_simulate_plan` (or be NULL) and not be reused.
#[no_mangle]
pub unsafe extern "C" fn bf_sim_free(r: *mut BfSimResult) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

// ---------------------------------------------------------------------------
// spectrum

/// Opaque eigenvalue set.
pub struct BfSpectrum(Spectrum);

/// Locate up to `n_max` imaginary-axis eigenvalues with |omega| <= omega_max.
///
/// # Safety
/// `params` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn bf_eigenvalues(
    params: *const BfParams,
    omega_max: f64,
    n_max: usize,
    out: *mut *mut BfSpectrum,
) -> BfStatus {
    check_null!(params, out);
    guarded(|| {
        let p = &(*params).0;
        let k = required_truncation(p, omega_max).max(12);
        let table = match compute_gen_tables(p, k, 1024) {
            Ok(t) => t,
            Err(e) => return fail(e),
        };
        match find_eigenvalues(&table, p, omega_max, n_max) {
            Ok(s) => {
                *out = Box::into_raw(Box::new(BfSpectrum(s)));
                BfStatus::BfOk
            }
            Err(e) => fail(e),
        }
    })
}

/// Number of located modes.
///
/// # Safety
/// `spectrum` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn bf_spectrum_len(
    spectrum: *const BfSpectrum,
    out: *mut usize,
) -> BfStatus {
    check_null!(spectrum, out);
    *out = (*spectrum).0.pairs.len();
    BfStatus::BfOk
}

/// Mode `i`: eigenfrequency, u(0) under u_x(0) = 1, and the two clamped-end
/// residuals. Any output pointer may be NULL to skip that field.
///
/// # Safety
/// `spectrum` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bf_spectrum_mode(
    spectrum: *const BfSpectrum,
    i: usize,
    omega: *mut f64,
    u0: *mut f64,
    residual_u: *mut f64,
    residual_ux: *mut f64,
) -> BfStatus {
    check_null!(spectrum);
    let s = &(*spectrum).0;
    if i >= s.pairs.len() {
        set_error("mode index out of bounds");
        return BfStatus::BfNullArgument;
    }
    let p = &s.pairs[i];
    if !omega.is_null() {
        *omega = p.omega;
    }
    if !u0.is_null() {
        *u0 = p.u0;
    }
    if !residual_u.is_null() {
        *residual_u = p.residual_u_l;
    }
    if !residual_ux.is_null() {
        *residual_ux = p.residual_ux_l;
    }
    BfStatus::BfOk
}

/// # Safety
/// `s` must come from `bf_eigenvalues` (or be NULL) and not be reused.
#[no_mangle]
pub unsafe extern "C" fn bf_spectrum_free(s: *mut BfSpectrum) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}
