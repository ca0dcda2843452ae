//! C ABI for the robsched solvers.
//!
//! Instances and reports are opaque handles created by `rs_*` constructors
//! and released with the matching `*_free`. Every fallible call returns an
//! [`RsCode`]; on failure `rs_last_error_message` describes the cause for the
//! calling thread. Activity indices are 0-based.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use robsched::bench::{evaluate_ordering, solve_method, Method, MethodOptions};
use robsched::instgen::{generate, GenParams};
use robsched::io::{instance_from_json, read_instance, report_to_json};
use robsched::mip::SolverSettings;
use robsched::{CostMatrix, Error, Instance, Ordering, SolveReport, SolveStatus};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RsCode {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidInstance = 3,
    Infeasible = 4,
    Io = 5,
    Format = 6,
    Backend = 7,
    CapExceeded = 8,
    NoIncumbent = 9,
    Panic = 10,
}

/// Solution methods.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RsMethod {
    NominalLb = 0,
    NominalUb = 1,
    Compact = 2,
    CompactStr = 3,
    Iterative = 4,
    IterativeStr = 5,
}

/// Termination status of a report.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RsStatus {
    Optimal = 0,
    TimeLimit = 1,
    Infeasible = 2,
    Error = 3,
}

/// Solver controls. A non-positive `time_limit` or `rel_gap` selects the default.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct RsSolveParams {
    pub time_limit: f64,
    pub rel_gap: f64,
    pub warm_start: bool,
    pub enrich_k: u32,
    pub threads: u32,
}

/// Opaque instance handle.
pub struct RsInstance(Instance);

/// Opaque solve report handle.
pub struct RsReport {
    method: Method,
    report: SolveReport,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn code_of(e: &Error) -> RsCode {
    match e {
        Error::InvalidInstance(_) | Error::Shape(_) => RsCode::InvalidInstance,
        Error::InvalidOrdering(_) | Error::InvalidSchedule(_) | Error::InvalidArgument(_) => RsCode::InvalidArgument,
        Error::Infeasible(_) => RsCode::Infeasible,
        Error::CapExceeded { .. } => RsCode::CapExceeded,
        Error::NoIncumbent => RsCode::NoIncumbent,
        Error::Backend(_) => RsCode::Backend,
        Error::Format(_) | Error::Csv(_) => RsCode::Format,
        Error::Io(_) => RsCode::Io,
    }
}

/// Runs `f`, recording errors and panics.
fn guard(f: impl FnOnce() -> Result<(), (RsCode, String)>) -> RsCode {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            RsCode::Ok
        }
        Ok(Err((code, msg))) => {
            set_error(&msg);
            code
        }
        Err(_) => {
            set_error("internal panic");
            RsCode::Panic
        }
    }
}

fn lift(e: Error) -> (RsCode, String) {
    (code_of(&e), e.to_string())
}

fn null(what: &str) -> (RsCode, String) {
    (RsCode::NullPointer, format!("{what} is null"))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, (RsCode, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| (RsCode::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn store<T>(out: *mut *mut T, value: T) {
    *out = Box::into_raw(Box::new(value));
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next `rs_*` call on the same thread.
#[no_mangle]
pub extern "C" fn rs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Reads an instance file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rs_instance_load(path: *const c_char, out: *mut *mut RsInstance) -> RsCode {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let inst = read_instance(read_str(path, "path")?).map_err(lift)?;
        store(out, RsInstance(inst));
        Ok(())
    })
}

/// Parses an instance document.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rs_instance_from_json(json: *const c_char, out: *mut *mut RsInstance) -> RsCode {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let inst = instance_from_json(read_str(json, "json")?).map_err(lift)?;
        store(out, RsInstance(inst));
        Ok(())
    })
}

/// Builds an instance from row-major `n x horizon` cost arrays.
///
/// # Safety
/// `durations` must hold `n` values, `c_lower` and `c_hat` `n * horizon`
/// values each, and `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rs_instance_new(
    n: usize,
    horizon: usize,
    durations: *const u32,
    c_lower: *const f64,
    c_hat: *const f64,
    out: *mut *mut RsInstance,
) -> RsCode {
    guard(|| {
        if out.is_null() || durations.is_null() || c_lower.is_null() || c_hat.is_null() {
            return Err(null("argument"));
        }
        let cells = n.checked_mul(horizon).ok_or((RsCode::InvalidArgument, "n * horizon overflows".to_string()))?;
        let matrix = |p: *const f64| {
            let s = std::slice::from_raw_parts(p, cells);
            CostMatrix::from_rows(s.chunks(horizon.max(1)).map(<[f64]>::to_vec).collect())
        };
        let d = std::slice::from_raw_parts(durations, n).to_vec();
        let inst = Instance::checked(d, horizon, matrix(c_lower).map_err(lift)?, matrix(c_hat).map_err(lift)?)
            .map_err(lift)?;
        store(out, RsInstance(inst));
        Ok(())
    })
}

/// Generates a random instance with the default parameters.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rs_instance_generate(n: usize, seed: u64, out: *mut *mut RsInstance) -> RsCode {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        store(out, RsInstance(generate(n, seed, &GenParams::default()).map_err(lift)?));
        Ok(())
    })
}

/// Releases an instance; null is ignored.
///
/// # Safety
/// `inst` must come from an `rs_instance_*` constructor and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rs_instance_free(inst: *mut RsInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Number of activities, or 0 for null.
///
/// # Safety
/// `inst` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rs_instance_n(inst: *const RsInstance) -> usize {
    inst.as_ref().map_or(0, |i| i.0.n())
}

/// Horizon length, or 0 for null.
///
/// # Safety
/// `inst` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rs_instance_horizon(inst: *const RsInstance) -> usize {
    inst.as_ref().map_or(0, |i| i.0.horizon)
}

/// Default controls: solver defaults, no warm start, no enrichment, one thread.
#[no_mangle]
pub extern "C" fn rs_solve_params_default() -> RsSolveParams {
    RsSolveParams { time_limit: 0.0, rel_gap: 0.0, warm_start: false, enrich_k: 0, threads: 1 }
}

fn settings_of(p: &RsSolveParams, n: usize) -> SolverSettings {
    let mut s = SolverSettings::default().with_time_limit(robsched::bench::default_time_limit(n));
    if p.time_limit > 0.0 {
        s.time_limit = p.time_limit;
    }
    if p.rel_gap > 0.0 {
        s.rel_gap = p.rel_gap;
    }
    s.threads = p.threads.max(1);
    s
}

fn method_of(m: i32) -> Option<Method> {
    Some(match m {
        x if x == RsMethod::NominalLb as i32 => Method::NominalLb,
        x if x == RsMethod::NominalUb as i32 => Method::NominalUb,
        x if x == RsMethod::Compact as i32 => Method::Compact,
        x if x == RsMethod::CompactStr as i32 => Method::CompactStr,
        x if x == RsMethod::Iterative as i32 => Method::Iterative,
        x if x == RsMethod::IterativeStr as i32 => Method::IterativeStr,
        _ => return None,
    })
}

/// Solves `inst` with `method` (an `RsMethod` value) at budget `gamma`.
/// `params` may be null.
///
/// # Safety
/// `inst` must be a live handle, `params` null or valid, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rs_solve(
    inst: *const RsInstance,
    method: i32,
    gamma: f64,
    params: *const RsSolveParams,
    out: *mut *mut RsReport,
) -> RsCode {
    guard(|| {
        let inst = &inst.as_ref().ok_or_else(|| null("inst"))?.0;
        if out.is_null() {
            return Err(null("out"));
        }
        let p = params.as_ref().copied().unwrap_or_else(|| rs_solve_params_default());
        let opts = MethodOptions { warm_start: p.warm_start, enrich_k: p.enrich_k as usize, settings: settings_of(&p, inst.n()) };
        let method = method_of(method).ok_or((RsCode::InvalidArgument, format!("unknown method {method}")))?;
        let report = solve_method(inst, method, gamma, &opts).map_err(lift)?;
        store(out, RsReport { method, report });
        Ok(())
    })
}

/// Releases a report; null is ignored.
///
/// # Safety
/// `report` must come from `rs_solve` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rs_report_free(report: *mut RsReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Objective value, or NaN for null.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rs_report_objective(report: *const RsReport) -> f64 {
    report.as_ref().map_or(f64::NAN, |r| r.report.objective)
}

/// Proven bound, or NaN for null.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rs_report_bound(report: *const RsReport) -> f64 {
    report.as_ref().map_or(f64::NAN, |r| r.report.bound)
}

/// Termination status; `Error` for null.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rs_report_status(report: *const RsReport) -> RsStatus {
    match report.as_ref().map(|r| r.report.status) {
        Some(SolveStatus::Optimal) => RsStatus::Optimal,
        Some(SolveStatus::TimeLimit) => RsStatus::TimeLimit,
        Some(SolveStatus::Infeasible) => RsStatus::Infeasible,
        _ => RsStatus::Error,
    }
}

/// Copies the processing order into `perm` (capacity `len`, at least `n`).
///
/// # Safety
/// `report` must be a live handle and `perm` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn rs_report_ordering(report: *const RsReport, perm: *mut usize, len: usize) -> RsCode {
    guard(|| {
        let r = report.as_ref().ok_or_else(|| null("report"))?;
        if perm.is_null() {
            return Err(null("perm"));
        }
        let src = r.report.ordering.perm();
        if len < src.len() {
            return Err((RsCode::InvalidArgument, format!("buffer holds {len}, need {}", src.len())));
        }
        ptr::copy_nonoverlapping(src.as_ptr(), perm, src.len());
        Ok(())
    })
}

/// JSON rendering of the report (1-based labels); free with `rs_string_free`.
/// Returns null on failure.
///
/// # Safety
/// `report` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn rs_report_to_json(report: *const RsReport) -> *mut c_char {
    let mut out = ptr::null_mut();
    guard(|| {
        let r = report.as_ref().ok_or_else(|| null("report"))?;
        let text = report_to_json(r.method.name(), &r.report).map_err(lift)?;
        out = CString::new(text).map_err(|e| (RsCode::Format, e.to_string()))?.into_raw();
        Ok(())
    });
    out
}

/// Releases a string returned by this library; null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rs_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Cost of the order `perm` (length `len`, 0-based) under the nominal,
/// continuous and discrete models. `out_disc` receives NaN when `gamma` is
/// not an integer.
///
/// # Safety
/// `inst` must be a live handle, `perm` valid for `len` reads, and the
/// output pointers valid.
#[no_mangle]
pub unsafe extern "C" fn rs_evaluate(
    inst: *const RsInstance,
    perm: *const usize,
    len: usize,
    gamma: f64,
    params: *const RsSolveParams,
    out_lb: *mut f64,
    out_cont: *mut f64,
    out_disc: *mut f64,
) -> RsCode {
    guard(|| {
        let inst = &inst.as_ref().ok_or_else(|| null("inst"))?.0;
        if perm.is_null() || out_lb.is_null() || out_cont.is_null() || out_disc.is_null() {
            return Err(null("argument"));
        }
        let ord = Ordering::new(std::slice::from_raw_parts(perm, len).to_vec()).map_err(lift)?;
        let p = params.as_ref().copied().unwrap_or_else(|| rs_solve_params_default());
        let e = evaluate_ordering(inst, &ord, gamma, &settings_of(&p, inst.n())).map_err(lift)?;
        *out_lb = e.lb;
        *out_cont = e.cont;
        *out_disc = e.disc.unwrap_or(f64::NAN);
        Ok(())
    })
}
