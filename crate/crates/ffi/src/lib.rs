//! C ABI over the scri solver.
//!
//! Media and far fields are opaque heap handles released with their `_free`
//! functions. Every call returns a [`ScriStatus`]; on failure the message is
//! kept per thread and read back with [`scri_last_error_message`].

use scri::media::{anisotropic_medium, constant_medium, linear_medium, quadratic_medium, Medium};
use scri::pipeline::{scatter_beam, scattering_map, Beam, FarField, Resolution, Route};
use scri::reference::s_for_medium;
use scri::Error;
use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScriStatus {
    Ok = 0,
    Domain = 1,
    Range = 2,
    Precision = 3,
    Config = 4,
    Unsupported = 5,
    Solve = 6,
    Resource = 7,
    UndefinedMetric = 8,
    Io = 9,
    NullPointer = 10,
    Panic = 11,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScriRoute {
    Characteristic = 0,
    Hyperbolic = 1,
}

impl From<ScriRoute> for Route {
    fn from(r: ScriRoute) -> Self {
        match r {
            ScriRoute::Characteristic => Route::Characteristic,
            ScriRoute::Hyperbolic => Route::Hyperbolic,
        }
    }
}

/// A refractive-index model.
pub struct ScriMedium(Medium);

/// Far-field samples on an equispaced angular grid.
pub struct ScriFarField(FarField);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> ScriStatus {
    match err {
        Error::Domain(_) => ScriStatus::Domain,
        Error::Range(_) => ScriStatus::Range,
        Error::Precision { .. } => ScriStatus::Precision,
        Error::Config(_) => ScriStatus::Config,
        Error::Unsupported(_) => ScriStatus::Unsupported,
        Error::Solve { .. } => ScriStatus::Solve,
        Error::Resource(_) => ScriStatus::Resource,
        Error::UndefinedMetric(_) => ScriStatus::UndefinedMetric,
        Error::Io { .. } => ScriStatus::Io,
    }
}

enum Failure {
    Lib(Error),
    Null(&'static str),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> ScriStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            ScriStatus::Ok
        }
        Ok(Err(Failure::Lib(e))) => {
            set_last_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Failure::Null(what))) => {
            set_last_error(format!("null pointer passed for {what}"));
            ScriStatus::NullPointer
        }
        Err(_) => {
            set_last_error("internal panic".into());
            ScriStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn write<T>(p: *mut T, v: T, what: &'static str) -> Result<(), Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    p.write(v);
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn scri_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the calling thread's last error message into `buf` (truncated,
/// always NUL-terminated when `len > 0`). Returns the full message length
/// in bytes, excluding the NUL; 0 when there is no error.
///
/// # Safety
/// `buf` must be valid for `len` bytes or null.
#[no_mangle]
pub unsafe extern "C" fn scri_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else {
            if !buf.is_null() && len > 0 {
                *buf = 0;
            }
            return 0;
        };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

fn new_medium(out: *mut *mut ScriMedium, make: impl FnOnce() -> scri::Result<Medium>) -> ScriStatus {
    guard(|| {
        let m = make()?;
        unsafe { write(out, Box::into_raw(Box::new(ScriMedium(m))), "out") }
    })
}

/// n ≡ 1.
///
/// # Safety
/// `out` must be valid for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn scri_medium_constant(out: *mut *mut ScriMedium) -> ScriStatus {
    new_medium(out, || Ok(constant_medium()))
}

/// n² = 1 + κ²/r².
///
/// # Safety
/// `out` must be valid for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn scri_medium_quadratic(kappa: f64, out: *mut *mut ScriMedium) -> ScriStatus {
    new_medium(out, || quadratic_medium(kappa))
}

/// n² = 1 + κ/r.
///
/// # Safety
/// `out` must be valid for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn scri_medium_linear(kappa: f64, out: *mut *mut ScriMedium) -> ScriStatus {
    new_medium(out, || linear_medium(kappa))
}

/// n² = 1 + κ²/(r² + d² + 2dr cosθ + r₀²).
///
/// # Safety
/// `out` must be valid for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn scri_medium_anisotropic(kappa: f64, d: f64, r0: f64, out: *mut *mut ScriMedium) -> ScriStatus {
    new_medium(out, || anisotropic_medium(kappa, d, r0))
}

/// # Safety
/// `medium` must come from a `scri_medium_*` constructor and not be freed
/// twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn scri_medium_free(medium: *mut ScriMedium) {
    if !medium.is_null() {
        drop(Box::from_raw(medium));
    }
}

/// Numerical S_m from a single-mode two-step solve with `n_rho` radial
/// points, and the condition estimate of the incoming solve.
///
/// # Safety
/// `medium` must be a live handle; outputs must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn scri_scattering_coefficient(
    medium: *const ScriMedium,
    route: ScriRoute,
    k: f64,
    m: i32,
    n_rho: usize,
    s_re: *mut f64,
    s_im: *mut f64,
    condition: *mut f64,
) -> ScriStatus {
    guard(|| {
        let medium = &deref(medium, "medium")?.0;
        let e = &scattering_map(route.into(), medium, k, &[m], Resolution::single_mode(n_rho, m))?[0];
        write(s_re, e.s.re, "s_re")?;
        write(s_im, e.s.im, "s_im")?;
        write(condition, e.condition, "condition")
    })
}

/// Closed-form S_m for constant, short-range and long-range media.
///
/// # Safety
/// `medium` must be a live handle; outputs must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn scri_exact_scattering_coefficient(
    medium: *const ScriMedium,
    k: f64,
    m: i32,
    s_re: *mut f64,
    s_im: *mut f64,
) -> ScriStatus {
    guard(|| {
        let s = s_for_medium(&deref(medium, "medium")?.0, m, k)?;
        write(s_re, s.re, "s_re")?;
        write(s_im, s.im, "s_im")
    })
}

/// Scatters the von Mises beam e^{β cos(θ−θ₀)} and returns the far field.
///
/// # Safety
/// `medium` must be a live handle; `out` must be valid for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn scri_scatter_beam(
    medium: *const ScriMedium,
    route: ScriRoute,
    k: f64,
    beta: f64,
    theta0: f64,
    n_rho: usize,
    n_theta: usize,
    out: *mut *mut ScriFarField,
) -> ScriStatus {
    guard(|| {
        let medium = &deref(medium, "medium")?.0;
        let far = scatter_beam(route.into(), medium, k, Beam { beta, theta0 }, Resolution::new(n_rho, n_theta))?;
        write(out, Box::into_raw(Box::new(ScriFarField(far))), "out")
    })
}

/// Number of angular samples.
///
/// # Safety
/// `far` must be a live handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn scri_far_field_len(far: *const ScriFarField) -> usize {
    far.as_ref().map_or(0, |f| f.0.values.len())
}

/// Copies angles and values into caller buffers of length `len`, which
/// must equal [`scri_far_field_len`]. Any of the three buffers may be null.
///
/// # Safety
/// Non-null buffers must be valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn scri_far_field_values(
    far: *const ScriFarField,
    len: usize,
    theta: *mut f64,
    re: *mut f64,
    im: *mut f64,
) -> ScriStatus {
    guard(|| {
        let f = &deref(far, "far field")?.0;
        if len != f.values.len() {
            return Err(Error::Config(format!("buffer length {len} does not match {} samples", f.values.len())).into());
        }
        for (i, (t, v)) in f.thetas.iter().zip(&f.values).enumerate() {
            if !theta.is_null() {
                *theta.add(i) = *t;
            }
            if !re.is_null() {
                *re.add(i) = v.re;
            }
            if !im.is_null() {
                *im.add(i) = v.im;
            }
        }
        Ok(())
    })
}

/// # Safety
/// `far` must come from [`scri_scatter_beam`] and not be freed twice. Null
/// is ignored.
#[no_mangle]
pub unsafe extern "C" fn scri_far_field_free(far: *mut ScriFarField) {
    if !far.is_null() {
        drop(Box::from_raw(far));
    }
}
