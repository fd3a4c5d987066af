//! C ABI over `kci_core`.
//!
//! Objects are opaque heap handles created by `kci_*_new` functions and
//! released with the matching `kci_*_free`. Every fallible call returns a
//! [`KciStatus`]; on failure a description is available from
//! [`kci_last_error`] on the same thread until the next failing call.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use kci_core::comparison::sandwich_run;
use kci_core::equilibria::{equilibria_catalog, nonlocal_positive_equilibrium};
use kci_core::evolution::{propagate, Beta, Diffusivity, EvolveOptions, ProblemSpec};
use kci_core::spatial::{h10_norm_sq, Grid, Profile};
use kci_core::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KciStatus {
    Ok = 0,
    /// Bad parameters, including a threshold not met.
    Invalid = 1,
    /// Blow-up, non-convergence or a failed root bracket.
    Numerical = 2,
    NullPointer = 3,
    Io = 4,
    /// A Rust panic was caught at the boundary.
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KciProblemKind {
    Nonlocal = 0,
    TimeChanged = 1,
    Autonomous = 2,
}

/// Grid values on `(0, L)` at the interior nodes.
pub struct KciProfile(Profile);

pub struct KciProblem(ProblemSpec);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> KciStatus {
    match e {
        Error::InvalidInput(_) | Error::GridMismatch(_) | Error::Threshold(_) => KciStatus::Invalid,
        Error::Io(_) | Error::Json(_) | Error::Csv(_) => KciStatus::Io,
        _ => KciStatus::Numerical,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (KciStatus, String)>) -> KciStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => KciStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside kci".into());
            KciStatus::Panic
        }
    }
}

fn core<T>(r: kci_core::Result<T>) -> Result<T, (KciStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (KciStatus, String) {
    (KciStatus::NullPointer, format!("{what} is null"))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, (KciStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (KciStatus::Invalid, format!("{what} is not UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, (KciStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

fn emit<T>(out: *mut *mut T, value: T) -> Result<(), (KciStatus, String)> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    unsafe { *out = Box::into_raw(Box::new(value)) };
    Ok(())
}

/// Message of the last failure on this thread, or null. Owned by the
/// library; valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn kci_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn kci_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies `len` values into a new profile on the grid with `len` interior
/// nodes of `(0, length)`.
///
/// # Safety
/// `values` must point to `len` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kci_profile_new(
    values: *const f64,
    len: usize,
    length: f64,
    out: *mut *mut KciProfile,
) -> KciStatus {
    guard(|| {
        if values.is_null() {
            return Err(null("values"));
        }
        let grid = core(Grid::new(len, length))?;
        let v = std::slice::from_raw_parts(values, len).to_vec();
        emit(out, KciProfile(core(Profile::new(grid, v))?))
    })
}

/// # Safety
/// `p` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn kci_profile_free(p: *mut KciProfile) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Number of nodes, 0 for null.
///
/// # Safety
/// `p` must be null or a live profile.
#[no_mangle]
pub unsafe extern "C" fn kci_profile_len(p: *const KciProfile) -> usize {
    p.as_ref().map_or(0, |p| p.0.values().len())
}

/// Copies at most `cap` values into `buf`.
///
/// # Safety
/// `p` must be a live profile and `buf` must hold `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn kci_profile_values(
    p: *const KciProfile,
    buf: *mut f64,
    cap: usize,
) -> KciStatus {
    guard(|| {
        let p = handle(p, "profile")?;
        if buf.is_null() {
            return Err(null("buffer"));
        }
        let v = p.0.values();
        if cap < v.len() {
            return Err((
                KciStatus::Invalid,
                format!("buffer holds {cap} values, profile has {}", v.len()),
            ));
        }
        ptr::copy_nonoverlapping(v.as_ptr(), buf, v.len());
        Ok(())
    })
}

/// `‖u_x‖²`, computed spectrally.
///
/// # Safety
/// `p` must be a live profile and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn kci_profile_h10_norm_sq(p: *const KciProfile, out: *mut f64) -> KciStatus {
    guard(|| {
        let p = handle(p, "profile")?;
        let out = out.as_mut().ok_or_else(|| null("output pointer"))?;
        *out = h10_norm_sq(&p.0);
        Ok(())
    })
}

/// Builds a problem from descriptor strings (`saturating`, `constant:1`,
/// `sinusoidal:1,2`, ...). For the autonomous kind `beta` must be constant.
///
/// # Safety
/// `a` and `beta` must be NUL-terminated strings; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn kci_problem_new(
    kind: KciProblemKind,
    lambda: f64,
    a: *const c_char,
    beta: *const c_char,
    out: *mut *mut KciProblem,
) -> KciStatus {
    guard(|| {
        let a: Diffusivity = core(text(a, "diffusivity")?.parse())?;
        let beta: Beta = core(text(beta, "beta")?.parse())?;
        let spec = match kind {
            KciProblemKind::Nonlocal => ProblemSpec::nonlocal(lambda, a, beta),
            KciProblemKind::TimeChanged => ProblemSpec::time_changed(lambda, a, beta),
            KciProblemKind::Autonomous => match beta {
                Beta::Constant { b } => ProblemSpec::autonomous(lambda, a, b),
                _ => Err(Error::InvalidInput(
                    "the autonomous problem needs a constant beta".into(),
                )),
            },
        };
        emit(out, KciProblem(core(spec)?))
    })
}

/// # Safety
/// `p` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn kci_problem_free(p: *mut KciProblem) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// `S(t, s)u0` with step `dt`; the result is a new profile.
///
/// # Safety
/// Handles must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn kci_evolve(
    u0: *const KciProfile,
    s: f64,
    t: f64,
    problem: *const KciProblem,
    dt: f64,
    out: *mut *mut KciProfile,
) -> KciStatus {
    guard(|| {
        let u0 = handle(u0, "initial profile")?;
        let p = handle(problem, "problem")?;
        let u = core(propagate(&u0.0, s, t, &p.0, &EvolveOptions::with_dt(dt)))?;
        emit(out, KciProfile(u))
    })
}

/// Number of equilibria of the autonomous problem on `n` nodes of `(0, π)`.
///
/// # Safety
/// `a` must be a NUL-terminated string; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn kci_equilibria_count(
    lambda: f64,
    b: f64,
    a: *const c_char,
    n: usize,
    out: *mut usize,
) -> KciStatus {
    guard(|| {
        let a: Diffusivity = core(text(a, "diffusivity")?.parse())?;
        let grid = core(Grid::on_pi(n))?;
        let recs = core(equilibria_catalog(lambda, b, &a, &grid))?;
        let out = out.as_mut().ok_or_else(|| null("output pointer"))?;
        *out = recs.len();
        Ok(())
    })
}

/// The positive-first `j`-arch equilibrium and its Kirchhoff value `c*`.
///
/// # Safety
/// `a` must be a NUL-terminated string; `out` and `c_star` writable
/// (`c_star` may be null).
#[no_mangle]
pub unsafe extern "C" fn kci_equilibrium(
    lambda: f64,
    b: f64,
    a: *const c_char,
    j: usize,
    n: usize,
    out: *mut *mut KciProfile,
    c_star: *mut f64,
) -> KciStatus {
    guard(|| {
        let a: Diffusivity = core(text(a, "diffusivity")?.parse())?;
        let grid = core(Grid::on_pi(n))?;
        let rec = core(nonlocal_positive_equilibrium(lambda, b, &a, j, &grid))?;
        if let Some(c) = c_star.as_mut() {
            *c = rec.c_star;
        }
        emit(out, KciProfile(rec.profile))
    })
}

/// Largest ordering violation of the comparison sandwich started from
/// `lower ≤ middle ≤ upper` over `[s, t]`.
///
/// # Safety
/// Handles must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn kci_sandwich_violation(
    lower: *const KciProfile,
    middle: *const KciProfile,
    upper: *const KciProfile,
    s: f64,
    t: f64,
    problem: *const KciProblem,
    dt: f64,
    out: *mut f64,
) -> KciStatus {
    guard(|| {
        let (l, m, u) = (
            handle(lower, "lower")?,
            handle(middle, "middle")?,
            handle(upper, "upper")?,
        );
        let p = handle(problem, "problem")?;
        let opts = EvolveOptions::with_dt(dt).sampled(usize::MAX);
        let r = core(sandwich_run(&l.0, &m.0, &u.0, s, t, &p.0, &opts))?;
        let out = out.as_mut().ok_or_else(|| null("output pointer"))?;
        *out = r.max_violation();
        Ok(())
    })
}

/// Runs the command line with `argv[0..argc]` and returns its exit code.
///
/// # Safety
/// `argv` must hold `argc` NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn kci_cli_run(argc: c_int, argv: *const *const c_char) -> c_int {
    if argv.is_null() || argc < 1 {
        set_error("argv is empty".into());
        return 1;
    }
    let args: Vec<String> = (0..argc as usize)
        .map(|i| {
            let p = *argv.add(i);
            if p.is_null() {
                String::new()
            } else {
                CStr::from_ptr(p).to_string_lossy().into_owned()
            }
        })
        .collect();
    catch_unwind(|| kci_core::cli::run(args)).unwrap_or_else(|_| {
        set_error("panic inside kci".into());
        KciStatus::Panic as c_int
    })
}
