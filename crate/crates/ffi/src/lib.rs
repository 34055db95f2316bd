//! C interface. Functions return an [`StStatus`]; results go through out
//! pointers. On failure `st_last_error()` describes the error until the
//! next call on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use sharp_threshold::bounds;
use sharp_threshold::measure;
use sharp_threshold::montecarlo::{self, connectivity_oracle, FamilyOracle, Oracle, Sampler};
use sharp_threshold::threshold::{self, ExactCurve};
use sharp_threshold::{Bias, BooleanFunction, Error, FamilySpec};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ParseError = 3,
    Arity = 4,
    NotMonotone = 5,
    TrivialSet = 6,
    NoSymmetry = 7,
    BufferTooSmall = 8,
    Panic = 99,
}

/// Opaque handle to a tabulated Boolean function.
pub struct StFunction {
    inner: BooleanFunction,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct StThreshold {
    pub p_lo: f64,
    pub p_hi: f64,
    pub width: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct StBound {
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub pass: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct StEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub samples: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> StStatus {
    match e {
        Error::Parse(_) | Error::BadFamily(_) | Error::BadPermutation(_) => StStatus::ParseError,
        Error::ArityCap { .. }
        | Error::ArityTooSmall { .. }
        | Error::ArityMismatch { .. }
        | Error::LengthMismatch { .. } => StStatus::Arity,
        Error::NotMonotone => StStatus::NotMonotone,
        Error::TrivialSet => StStatus::TrivialSet,
        Error::NotInvariant | Error::NotTransitive | Error::NoSymmetry => StStatus::NoSymmetry,
        _ => StStatus::InvalidArgument,
    }
}

enum Fail {
    Null(&'static str),
    Core(Error),
    Status(StStatus, String),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Core(e)
    }
}

/// Runs `body`, converting errors and panics into a status.
fn guard(body: impl FnOnce() -> Result<(), Fail>) -> StStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => StStatus::Ok,
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("{what} is null"));
            StStatus::NullPointer
        }
        Ok(Err(Fail::Core(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Fail::Status(s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            StStatus::Panic
        }
    }
}

unsafe fn text<'a>(s: *const c_char, what: &'static str) -> Result<&'a str, Fail> {
    if s.is_null() {
        return Err(Fail::Null(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| Fail::Core(Error::Parse(format!("{what} is not UTF-8"))))
}

unsafe fn handle<'a>(f: *const StFunction) -> Result<&'a BooleanFunction, Fail> {
    f.as_ref()
        .map(|h| &h.inner)
        .ok_or(Fail::Null("function handle"))
}

unsafe fn write<T>(out: *mut T, value: T, what: &'static str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null(what));
    }
    out.write(value);
    Ok(())
}

fn into_handle(f: BooleanFunction, out: *mut *mut StFunction) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null("out"));
    }
    unsafe { out.write(Box::into_raw(Box::new(StFunction { inner: f }))) };
    Ok(())
}

/// Message for the last failed call on this thread, or null. Owned by the
/// library; valid until the next call.
#[no_mangle]
pub extern "C" fn st_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Parses `n=<arity>:hex=<digits>`.
///
/// # Safety
/// `table` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn st_function_from_hex(
    table: *const c_char,
    out: *mut *mut StFunction,
) -> StStatus {
    guard(|| into_handle(BooleanFunction::parse_hex(text(table, "table")?)?, out))
}

/// Builds a family such as `tribes:k=2,m=3` or `or:n=8`.
///
/// # Safety
/// `spec` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn st_function_from_family(
    spec: *const c_char,
    out: *mut *mut StFunction,
) -> StStatus {
    guard(|| {
        let spec: FamilySpec = text(spec, "spec")?.parse()?;
        into_handle(spec.instance()?, out)
    })
}

/// # Safety
/// `f` must come from a constructor of this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn st_function_free(f: *mut StFunction) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// # Safety
/// `f` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn st_function_arity(f: *const StFunction, out: *mut usize) -> StStatus {
    guard(|| write(out, handle(f)?.arity(), "out"))
}

/// `mu_p(A)` of the set where `f` is 1.
///
/// # Safety
/// `f` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn st_mu(f: *const StFunction, p: f64, out: *mut f64) -> StStatus {
    guard(|| write(out, threshold::mu_of_p(handle(f)?, Bias::new(p)?), "out"))
}

/// Influence of coordinate `i` (1-based).
///
/// # Safety
/// `f` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn st_influence(
    f: *const StFunction,
    p: f64,
    i: usize,
    out: *mut f64,
) -> StStatus {
    guard(|| {
        write(
            out,
            measure::influence(handle(f)?, Bias::new(p)?, i)?,
            "out",
        )
    })
}

/// All influences into `out[0..len]`; `len` must be at least the arity.
///
/// # Safety
/// `f` must be a live handle; `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn st_influences(
    f: *const StFunction,
    p: f64,
    out: *mut f64,
    len: usize,
) -> StStatus {
    guard(|| {
        let f = handle(f)?;
        if out.is_null() {
            return Err(Fail::Null("out"));
        }
        if len < f.arity() {
            return Err(Fail::Status(
                StStatus::BufferTooSmall,
                format!("buffer holds {len} values, arity is {}", f.arity()),
            ));
        }
        let inf = measure::influences(f, Bias::new(p)?);
        std::slice::from_raw_parts_mut(out, f.arity()).copy_from_slice(inf.values());
        Ok(())
    })
}

/// `d mu_p / dp`.
///
/// # Safety
/// `f` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn st_russo_derivative(
    f: *const StFunction,
    p: f64,
    out: *mut f64,
) -> StStatus {
    guard(|| {
        write(
            out,
            bounds::russo_derivative(handle(f)?, Bias::new(p)?),
            "out",
        )
    })
}

/// `p(1 - eps) - p(eps)` for a nontrivial monotone `f`.
///
/// # Safety
/// `f` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn st_threshold_width(
    f: *const StFunction,
    eps: f64,
    tol: f64,
    out: *mut StThreshold,
) -> StStatus {
    guard(|| {
        let curve = ExactCurve::new(handle(f)?)?;
        let t = threshold::threshold_width(&curve, eps, tol)?;
        write(
            out,
            StThreshold {
                p_lo: t.p_lo,
                p_hi: t.p_hi,
                width: t.width,
            },
            "out",
        )
    })
}

/// The largest influence against its lower bound.
///
/// # Safety
/// `f` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn st_max_influence_bound(
    f: *const StFunction,
    p: f64,
    out: *mut StBound,
) -> StStatus {
    guard(|| {
        let r = bounds::thm42_check(handle(f)?, Bias::new(p)?)?.report;
        write(
            out,
            StBound {
                lhs: r.lhs,
                rhs: r.rhs,
                slack: r.slack,
                pass: r.pass,
            },
            "out",
        )
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn st_c_ls(p: f64, out: *mut f64) -> StStatus {
    guard(|| write(out, bounds::c_ls(Bias::new(p)?), "out"))
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn st_s_of_n(n: u64, out: *mut f64) -> StStatus {
    guard(|| write(out, bounds::s_of_n(n)?.value, "out"))
}

/// Monte Carlo estimate of `mu_p` for a family (`or:n=50`, ...) or for
/// `connectivity:m=<vertices>`.
///
/// # Safety
/// `spec` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn st_mc_mu(
    spec: *const c_char,
    p: f64,
    samples: u64,
    seed: u64,
    out: *mut StEstimate,
) -> StStatus {
    guard(|| {
        let spec = text(spec, "spec")?;
        let oracle: Box<dyn Oracle> = match spec.strip_prefix("connectivity:m=") {
            Some(m) => {
                let m = m
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad vertex count in `{spec}`")))?;
                Box::new(connectivity_oracle(m)?)
            }
            None => Box::new(FamilyOracle::new(spec.parse()?)?),
        };
        let e =
            montecarlo::estimate_mu(oracle.as_ref(), Bias::new(p)?, samples, Sampler::new(seed))?;
        write(
            out,
            StEstimate {
                mean: e.mean,
                stderr: e.stderr,
                ci_lo: e.ci_lo,
                ci_hi: e.ci_hi,
                samples: e.samples,
            },
            "out",
        )
    })
}
