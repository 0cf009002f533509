//! C ABI for the coopex solvers.
//!
//! Instances and schedules cross the boundary as opaque handles created and
//! destroyed by this library. Every fallible call returns a
//! [`CoopexStatus`]; on failure a message is available from
//! [`coopex_last_error`] until the next call on the same thread. Client
//! indices are 1-based, as in the JSON documents.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use coopex::{
    bounds_report, optimal_tau, random_average_exact, random_schedule, random_tau, run_ie,
    run_leader, verify_schedule, Error, FieldSpec, Instance, Schedule,
};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoopexStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidArgument = 2,
    ParseError = 3,
    FieldTooSmall = 4,
    Infeasible = 5,
    BudgetExceeded = 6,
    CapacityExceeded = 7,
    Internal = 99,
}

/// Opaque problem instance.
pub struct CoopexInstance(Instance);

/// Opaque broadcast schedule.
pub struct CoopexSchedule(Schedule);

/// Bounds on the optimal number of broadcasts.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CoopexBounds {
    pub lower: usize,
    pub upper_leader: usize,
    pub ie_guarantee: usize,
    pub trivial: usize,
    /// 1-based.
    pub best_leader: usize,
}

/// Outcome of replaying a schedule.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CoopexVerifyReport {
    pub all_satisfied: bool,
    pub legal: bool,
    /// Number of clients that cannot decode everything.
    pub unsatisfied_clients: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(e: &Error) -> CoopexStatus {
    match e {
        Error::Usage(_) | Error::DivisionByZero { .. } => CoopexStatus::InvalidArgument,
        Error::Parse { .. } => CoopexStatus::ParseError,
        Error::FieldTooSmall { .. } => CoopexStatus::FieldTooSmall,
        Error::Infeasible(_)
        | Error::Underdetermined { .. }
        | Error::Inconsistent
        | Error::Invariant(_) => CoopexStatus::Infeasible,
        Error::BudgetExceeded { .. } => CoopexStatus::BudgetExceeded,
        Error::Capacity(_) => CoopexStatus::CapacityExceeded,
    }
}

/// Runs `f`, translating errors and panics into status codes.
fn guard<F>(f: F) -> CoopexStatus
where
    F: FnOnce() -> Result<(), CoopexStatus>,
{
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CoopexStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => {
            set_error("internal panic".into());
            CoopexStatus::Internal
        }
    }
}

fn fail(e: Error) -> CoopexStatus {
    let status = status_of(&e);
    set_error(e.to_string());
    status
}

fn null(what: &str) -> CoopexStatus {
    set_error(format!("{what} is null"));
    CoopexStatus::NullArgument
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, CoopexStatus> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error(format!("{what} is not valid UTF-8"));
        CoopexStatus::InvalidArgument
    })
}

unsafe fn inst_arg<'a>(p: *const CoopexInstance) -> Result<&'a Instance, CoopexStatus> {
    p.as_ref().map(|i| &i.0).ok_or_else(|| null("instance"))
}

unsafe fn sched_arg<'a>(p: *const CoopexSchedule) -> Result<&'a Schedule, CoopexStatus> {
    p.as_ref().map(|s| &s.0).ok_or_else(|| null("schedule"))
}

fn field_arg(inst: &Instance, q: u32) -> Result<FieldSpec, CoopexStatus> {
    if q == 0 {
        Ok(FieldSpec::at_least(inst.k()))
    } else {
        FieldSpec::new(q).map_err(fail)
    }
}

unsafe fn ordering_arg(
    inst: &Instance,
    perm: *const usize,
    len: usize,
) -> Result<Vec<usize>, CoopexStatus> {
    if perm.is_null() {
        return if len == 0 { Ok(Vec::new()) } else { Err(null("perm")) };
    }
    let slice = std::slice::from_raw_parts(perm, len);
    slice
        .iter()
        .map(|&c| {
            if c == 0 || c > inst.k() {
                set_error(format!("perm entry {c} outside 1..={}", inst.k()));
                Err(CoopexStatus::InvalidArgument)
            } else {
                Ok(c - 1)
            }
        })
        .collect()
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), CoopexStatus> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

unsafe fn write_schedule(
    out: *mut *mut CoopexSchedule,
    s: Schedule,
) -> Result<(), CoopexStatus> {
    write_out(out, Box::into_raw(Box::new(CoopexSchedule(s))))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn coopex_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message describing the last failed call on this thread, or NULL.
///
/// The pointer stays valid until the next library call on this thread.
#[no_mangle]
pub extern "C" fn coopex_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |m| m.as_ptr()))
}

/// Frees a string returned by this library.
///
/// # Safety
///
/// `s` must be NULL or a pointer returned by a `*_to_json` function that has
/// not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn coopex_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses an instance document.
///
/// # Safety
///
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn coopex_instance_from_json(
    json: *const c_char,
    out: *mut *mut CoopexInstance,
) -> CoopexStatus {
    guard(|| {
        let text = str_arg(json, "json")?;
        let inst = Instance::from_json(text).map_err(fail)?;
        write_out(out, Box::into_raw(Box::new(CoopexInstance(inst))))
    })
}

/// Draws a random instance with membership density `rho`.
///
/// # Safety
///
/// `out` must be a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn coopex_instance_random(
    n: usize,
    k: usize,
    rho: f64,
    seed: u64,
    out: *mut *mut CoopexInstance,
) -> CoopexStatus {
    guard(|| {
        let inst = Instance::random(n, k, rho, seed).map_err(fail)?;
        write_out(out, Box::into_raw(Box::new(CoopexInstance(inst))))
    })
}

/// # Safety
///
/// `inst` must be NULL or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn coopex_instance_free(inst: *mut CoopexInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Packet count, or 0 for a NULL handle.
///
/// # Safety
///
/// `inst` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn coopex_instance_n(inst: *const CoopexInstance) -> usize {
    inst.as_ref().map_or(0, |i| i.0.n())
}

/// Client count, or 0 for a NULL handle.
///
/// # Safety
///
/// `inst` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn coopex_instance_k(inst: *const CoopexInstance) -> usize {
    inst.as_ref().map_or(0, |i| i.0.k())
}

/// Canonical JSON document; free with `coopex_string_free`. NULL on a NULL handle.
///
/// # Safety
///
/// `inst` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn coopex_instance_to_json(inst: *const CoopexInstance) -> *mut c_char {
    match inst.as_ref() {
        Some(i) => CString::new(i.0.to_json()).map_or(ptr::null_mut(), CString::into_raw),
        None => ptr::null_mut(),
    }
}

/// # Safety
///
/// `inst` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn coopex_bounds(
    inst: *const CoopexInstance,
    out: *mut CoopexBounds,
) -> CoopexStatus {
    guard(|| {
        let r = bounds_report(inst_arg(inst)?);
        write_out(
            out,
            CoopexBounds {
                lower: r.lower,
                upper_leader: r.upper_leader,
                ie_guarantee: r.ie_guarantee,
                trivial: r.trivial,
                best_leader: r.best_leader,
            },
        )
    })
}

/// Runs the greedy max-dimension scheme over GF(q); `q = 0` picks the
/// smallest prime at least k.
///
/// # Safety
///
/// `inst` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn coopex_run_ie(
    inst: *const CoopexInstance,
    q: u32,
    out: *mut *mut CoopexSchedule,
) -> CoopexStatus {
    guard(|| {
        let inst = inst_arg(inst)?;
        let (s, _) = run_ie(inst, field_arg(inst, q)?).map_err(fail)?;
        write_schedule(out, s)
    })
}

/// Runs the two-phase leader scheme; `leader = 0` picks the cheapest leader,
/// otherwise it is a 1-based client index.
///
/// # Safety
///
/// `inst` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn coopex_run_leader(
    inst: *const CoopexInstance,
    q: u32,
    leader: usize,
    out: *mut *mut CoopexSchedule,
) -> CoopexStatus {
    guard(|| {
        let inst = inst_arg(inst)?;
        let leader = leader.checked_sub(1);
        let s = run_leader(inst, field_arg(inst, q)?, leader).map_err(fail)?;
        write_schedule(out, s)
    })
}

/// Coded schedule for a 1-based client ordering of length `len`.
///
/// # Safety
///
/// `perm` must point to `len` readable entries; `inst` live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn coopex_random_schedule(
    inst: *const CoopexInstance,
    perm: *const usize,
    len: usize,
    q: u32,
    out: *mut *mut CoopexSchedule,
) -> CoopexStatus {
    guard(|| {
        let inst = inst_arg(inst)?;
        let ordering = ordering_arg(inst, perm, len)?;
        let s = random_schedule(inst, &ordering, field_arg(inst, q)?).map_err(fail)?;
        write_schedule(out, s)
    })
}

/// Transmission count of the random-ordering scheme for one ordering.
///
/// # Safety
///
/// As for `coopex_random_schedule`; `total` must be writable.
#[no_mangle]
pub unsafe extern "C" fn coopex_random_tau(
    inst: *const CoopexInstance,
    perm: *const usize,
    len: usize,
    total: *mut usize,
) -> CoopexStatus {
    guard(|| {
        let inst = inst_arg(inst)?;
        let ordering = ordering_arg(inst, perm, len)?;
        let r = random_tau(inst, &ordering).map_err(fail)?;
        write_out(total, r.total)
    })
}

/// Exact average over all orderings as the fraction `numer / denom`.
///
/// # Safety
///
/// `inst` must be live; `numer` and `denom` writable.
#[no_mangle]
pub unsafe extern "C" fn coopex_random_average_exact(
    inst: *const CoopexInstance,
    numer: *mut u64,
    denom: *mut u64,
) -> CoopexStatus {
    guard(|| {
        let r = random_average_exact(inst_arg(inst)?).map_err(fail)?;
        write_out(numer, *r.numer())?;
        write_out(denom, *r.denom())
    })
}

/// Exact optimum over GF(q) (`q = 0` for the default field).
///
/// On success writes the optimum to `tau`. On `BudgetExceeded` writes the
/// known bracket to `lower` and `upper` instead. Either bracket pointer may
/// be NULL.
///
/// # Safety
///
/// `inst` must be live; `tau` writable; `lower`/`upper` NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn coopex_optimal_tau(
    inst: *const CoopexInstance,
    q: u32,
    budget: u64,
    tau: *mut usize,
    lower: *mut usize,
    upper: *mut usize,
) -> CoopexStatus {
    guard(|| {
        let inst = inst_arg(inst)?;
        match optimal_tau(inst, field_arg(inst, q)?, budget) {
            Ok(res) => write_out(tau, res.tau_star),
            Err(e @ Error::BudgetExceeded { lower: lo, upper: hi, .. }) => {
                if !lower.is_null() {
                    lower.write(lo);
                }
                if !upper.is_null() {
                    upper.write(hi);
                }
                Err(fail(e))
            }
            Err(e) => Err(fail(e)),
        }
    })
}

/// Parses a schedule document.
///
/// # Safety
///
/// `json` must be NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn coopex_schedule_from_json(
    json: *const c_char,
    out: *mut *mut CoopexSchedule,
) -> CoopexStatus {
    guard(|| {
        let s = Schedule::from_json(str_arg(json, "json")?).map_err(fail)?;
        write_schedule(out, s)
    })
}

/// Schedule JSON document; free with `coopex_string_free`.
///
/// # Safety
///
/// `sched` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn coopex_schedule_to_json(sched: *const CoopexSchedule) -> *mut c_char {
    match sched.as_ref() {
        Some(s) => CString::new(s.0.to_json()).map_or(ptr::null_mut(), CString::into_raw),
        None => ptr::null_mut(),
    }
}

/// Number of broadcasts, or 0 for a NULL handle.
///
/// # Safety
///
/// `sched` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn coopex_schedule_total(sched: *const CoopexSchedule) -> usize {
    sched.as_ref().map_or(0, |s| s.0.total())
}

/// # Safety
///
/// `sched` must be NULL or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn coopex_schedule_free(sched: *mut CoopexSchedule) {
    if !sched.is_null() {
        drop(Box::from_raw(sched));
    }
}

/// Replays `sched` against `inst`.
///
/// # Safety
///
/// Both handles must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn coopex_verify(
    inst: *const CoopexInstance,
    sched: *const CoopexSchedule,
    out: *mut CoopexVerifyReport,
) -> CoopexStatus {
    guard(|| {
        let r = verify_schedule(inst_arg(inst)?, sched_arg(sched)?).map_err(fail)?;
        write_out(
            out,
            CoopexVerifyReport {
                all_satisfied: r.all_satisfied,
                legal: r.legal,
                unsatisfied_clients: r.clients.iter().filter(|c| !c.satisfied).count(),
            },
        )
    })
}
