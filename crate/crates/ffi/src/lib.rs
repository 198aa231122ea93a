//! C ABI for plfilter.
//!
//! Objects cross the boundary as opaque handles created by `*_from_*`
//! functions and released with the matching `*_free`. Every fallible call
//! returns a [`PlStatus`]; on failure a description is available from
//! [`pl_last_error_message`] until the next call on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use plfilter::io::parse_problem;
use plfilter::model::{Objective, ProblemSpec};
use plfilter::sampler::brute_force_z;
use plfilter::transform::{lp_mode_sum, qp_mode_sum, ModeSum};
use plfilter::Error;

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidInput = 3,
    Schema = 4,
    Io = 5,
    EmptyRegion = 10,
    Unbounded = 11,
    DegenerateRegion = 12,
    StartFailure = 20,
    InsufficientSamples = 21,
    UnsupportedDimension = 22,
    InsufficientData = 30,
    NoCrossing = 31,
    Unsupported = 40,
    Panic = 99,
}

impl From<&Error> for PlStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Input(_) | Error::DimensionMismatch { .. } => PlStatus::InvalidInput,
            Error::Schema { .. } | Error::Json(_) => PlStatus::Schema,
            Error::Io(_) | Error::Csv(_) => PlStatus::Io,
            Error::EmptyRegion => PlStatus::EmptyRegion,
            Error::Unbounded => PlStatus::Unbounded,
            Error::DegenerateRegion { .. } => PlStatus::DegenerateRegion,
            Error::StartFailure { .. } => PlStatus::StartFailure,
            Error::InsufficientSamples { .. } => PlStatus::InsufficientSamples,
            Error::UnsupportedDimension(_) => PlStatus::UnsupportedDimension,
            Error::InsufficientData { .. } => PlStatus::InsufficientData,
            Error::NoCrossing { .. } => PlStatus::NoCrossing,
        }
    }
}

/// Moments of the objective at one β.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PlMoments {
    pub beta: f64,
    pub log_z: f64,
    pub mean: f64,
    pub variance: f64,
}

/// Opaque problem handle.
pub struct PlProblem(ProblemSpec);

/// Opaque mode-sum handle.
pub struct PlModeSum(ModeSum);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

struct Failure(PlStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(PlStatus::from(&e), e.to_string())
    }
}

fn guard<F>(f: F) -> PlStatus
where
    F: FnOnce() -> Result<(), Failure>,
{
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PlStatus::Ok,
        Ok(Err(Failure(code, msg))) => {
            set_error(msg);
            code
        }
        Err(_) => {
            set_error("internal panic");
            PlStatus::Panic
        }
    }
}

fn null() -> Failure {
    Failure(PlStatus::NullPointer, "null pointer argument".into())
}

unsafe fn str_arg<'a>(s: *const c_char) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(null());
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| Failure(PlStatus::InvalidUtf8, "string is not valid UTF-8".into()))
}

unsafe fn ref_arg<'a, T>(p: *const T) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(null)
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null());
    }
    out.write(value);
    Ok(())
}

/// Parse a problem JSON document into `*out`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pl_problem_from_json(json: *const c_char, out: *mut *mut PlProblem) -> PlStatus {
    guard(|| {
        let doc = str_arg(json)?;
        let p = parse_problem(doc)?;
        write_out(out, Box::into_raw(Box::new(PlProblem(p))))
    })
}

/// # Safety
/// `p` must come from [`pl_problem_from_json`] or be null.
#[no_mangle]
pub unsafe extern "C" fn pl_problem_free(p: *mut PlProblem) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Number of decision variables, 0 for a null handle.
///
/// # Safety
/// `p` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn pl_problem_dimension(p: *const PlProblem) -> usize {
    p.as_ref().map_or(0, |p| p.0.dimension())
}

/// Exact mode sum of a linear program, or of an unconstrained quadratic
/// program of even dimension.
///
/// # Safety
/// `p` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pl_mode_sum_from_problem(p: *const PlProblem, out: *mut *mut PlModeSum) -> PlStatus {
    guard(|| {
        let p = &ref_arg(p)?.0;
        let modes = match p.objective() {
            Objective::Linear(l) if p.objectives().len() == 1 => lp_mode_sum(p.constraints(), l)?,
            Objective::Quadratic(q) if p.objectives().len() == 1 && p.constraints().is_empty() => {
                qp_mode_sum(q).ok_or_else(|| {
                    Failure(PlStatus::Unsupported, "quadratic mode sum needs even dimension".into())
                })?
            }
            _ => {
                return Err(Failure(
                    PlStatus::Unsupported,
                    "no closed form for this problem; sample it instead".into(),
                ))
            }
        };
        write_out(out, Box::into_raw(Box::new(PlModeSum(modes))))
    })
}

/// Parse `{"modes":[{"gamma":..,"coeffs":[..]}]}`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pl_mode_sum_from_json(json: *const c_char, out: *mut *mut PlModeSum) -> PlStatus {
    guard(|| {
        let m: ModeSum = serde_json::from_str(str_arg(json)?).map_err(Error::from)?;
        write_out(out, Box::into_raw(Box::new(PlModeSum(m))))
    })
}

/// Serialize to JSON; release the string with [`pl_string_free`].
///
/// # Safety
/// `m` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pl_mode_sum_to_json(m: *const PlModeSum, out: *mut *mut c_char) -> PlStatus {
    guard(|| {
        let s = serde_json::to_string(&ref_arg(m)?.0).map_err(Error::from)?;
        let c = CString::new(s).map_err(|_| Failure(PlStatus::Panic, "interior NUL".into()))?;
        write_out(out, c.into_raw())
    })
}

/// # Safety
/// `m` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn pl_mode_sum_len(m: *const PlModeSum) -> usize {
    m.as_ref().map_or(0, |m| m.0.len())
}

/// `ln Z`, `⟨O⟩` and `Var O` at `beta`.
///
/// # Safety
/// `m` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pl_mode_sum_eval(m: *const PlModeSum, beta: f64, out: *mut PlMoments) -> PlStatus {
    guard(|| {
        let m = &ref_arg(m)?.0;
        let r = m.moments(beta)?;
        let value = PlMoments {
            beta,
            log_z: m.log_z(beta)?,
            mean: r.mean_o,
            variance: r.std_o * r.std_o,
        };
        write_out(out, value)
    })
}

/// # Safety
/// `m` must come from a `pl_mode_sum_*` constructor or be null.
#[no_mangle]
pub unsafe extern "C" fn pl_mode_sum_free(m: *mut PlModeSum) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Grid-quadrature `Z(beta)` with `resolution` points per axis (n ≤ 3).
///
/// # Safety
/// `p` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pl_brute_force_z(p: *const PlProblem, beta: f64, resolution: usize, out: *mut f64) -> PlStatus {
    guard(|| {
        let z = brute_force_z(&ref_arg(p)?.0, beta, resolution)?;
        write_out(out, z)
    })
}

/// Message of the last failed call on this thread, or null. Owned by the
/// library; valid until the next call.
#[no_mangle]
pub extern "C" fn pl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// # Safety
/// `s` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn pl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
