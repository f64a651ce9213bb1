//! C ABI over the simred toolkit.
//!
//! Every function returns a [`SimredStatus`]; results go through out-pointers.
//! On failure a message is kept per thread and can be read with
//! [`simred_last_error`]. Strings handed out by this library must be released
//! with [`simred_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::str::FromStr;

use simred::catalog::{Catalog, EntryFilter, EntryKind};
use simred::verify::residual_scan;
use simred::{Error, Jet2, PdeParams, ScalarField};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimredStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidParams = 3,
    DomainViolation = 4,
    NonPositive = 5,
    UnknownEntry = 6,
    ParseError = 7,
    NumericalFailure = 8,
    IndexOutOfRange = 9,
    Panic = 10,
}

/// `u` with `u_x`, `u_xx` and `u_t`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SimredJet {
    pub v: f64,
    pub vx: f64,
    pub vxx: f64,
    pub vt: f64,
}

/// `n = n_num / n_den`, `C`, `λ`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimredParams {
    pub n_num: i64,
    pub n_den: i64,
    pub c: f64,
    pub lambda: f64,
}

/// Opaque handle to a verified catalog.
pub struct SimredCatalog {
    inner: Catalog,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> SimredStatus {
    match e {
        Error::InvalidParams(_) | Error::InadmissibleConstants(_) | Error::MissingPotential(_) => {
            SimredStatus::InvalidParams
        }
        Error::DomainViolation(_) | Error::SingularPoint { .. } => SimredStatus::DomainViolation,
        Error::NonPositiveU { .. } | Error::NonPositiveW { .. } | Error::PositivityLoss { .. } => {
            SimredStatus::NonPositive
        }
        Error::UnknownEntry(_) => SimredStatus::UnknownEntry,
        Error::Parse { .. } => SimredStatus::ParseError,
        Error::StepFailure(_)
        | Error::FlowUnavailable(_)
        | Error::QuadratureFailure(_)
        | Error::UnverifiedField(_) => SimredStatus::NumericalFailure,
    }
}

/// Runs `f`, recording errors and converting panics.
fn guard<F: FnOnce() -> Result<(), (SimredStatus, String)>>(f: F) -> SimredStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            SimredStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            SimredStatus::Panic
        }
    }
}

fn lift<T>(r: simred::Result<T>) -> Result<T, (SimredStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (SimredStatus, String) {
    (SimredStatus::NullPointer, format!("{what} is null"))
}

/// # Safety
/// `s` must be null or a valid NUL-terminated string.
unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, (SimredStatus, String)> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s).to_str().map_err(|_| (SimredStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

fn to_c_string(s: String) -> Result<*mut c_char, (SimredStatus, String)> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| (SimredStatus::InvalidParams, "string contains NUL".to_string()))
}

/// # Safety
/// `c` must be null or point to a live catalog from [`simred_catalog_new`].
unsafe fn catalog<'a>(c: *const SimredCatalog) -> Result<&'a Catalog, (SimredStatus, String)> {
    c.as_ref().map(|c| &c.inner).ok_or_else(|| null("catalog"))
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn simred_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string from this library that was not yet freed.
#[no_mangle]
pub unsafe extern "C" fn simred_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// PDE residual `u_t − (u^n)_xx − C/(x+λ)(u^n)_x` for a jet at `x`.
///
/// # Safety
/// `params` and `jet` must be readable, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn simred_pde_residual(
    params: *const SimredParams,
    x: f64,
    jet: *const SimredJet,
    out: *mut f64,
) -> SimredStatus {
    guard(|| {
        let p = params.as_ref().ok_or_else(|| null("params"))?;
        let j = jet.as_ref().ok_or_else(|| null("jet"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let p = lift(PdeParams::from_parts(p.n_num, p.n_den, p.c, p.lambda))?;
        let r = lift(simred::pde_residual(&p, x, &Jet2::new(j.v, j.vx, j.vxx, j.vt)))?;
        *out = r;
        Ok(())
    })
}

/// Builds the catalog and verifies every solution preset against the PDE.
/// Returns null on failure.
#[no_mangle]
pub extern "C" fn simred_catalog_new() -> *mut SimredCatalog {
    let mut handle = ptr::null_mut();
    guard(|| {
        handle = Box::into_raw(Box::new(SimredCatalog { inner: Catalog::build() }));
        Ok(())
    });
    handle
}

/// # Safety
/// `c` must be null or a catalog from [`simred_catalog_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn simred_catalog_free(c: *mut SimredCatalog) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Number of entries.
///
/// # Safety
/// `c` must be a live catalog and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn simred_catalog_len(c: *const SimredCatalog, out: *mut usize) -> SimredStatus {
    guard(|| {
        let cat = catalog(c)?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = cat.len();
        Ok(())
    })
}

/// Id of entry `index` in id order, as a new string.
///
/// # Safety
/// `c` must be a live catalog and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn simred_catalog_entry_id(
    c: *const SimredCatalog,
    index: usize,
    out: *mut *mut c_char,
) -> SimredStatus {
    guard(|| {
        let cat = catalog(c)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let entries = cat.list_entries(&EntryFilter::default());
        let e = entries
            .get(index)
            .ok_or_else(|| (SimredStatus::IndexOutOfRange, format!("index {index} >= {}", entries.len())))?;
        *out = to_c_string(e.id().to_string())?;
        Ok(())
    })
}

/// JSON listing of the entries of `kind` (null for all), as a new string.
///
/// # Safety
/// `c` must be a live catalog, `kind` null or a C string, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn simred_catalog_json(
    c: *const SimredCatalog,
    kind: *const c_char,
    out: *mut *mut c_char,
) -> SimredStatus {
    guard(|| {
        let cat = catalog(c)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let kind = if kind.is_null() { None } else { Some(lift(EntryKind::from_str(read_str(kind, "kind")?))?) };
        *out = to_c_string(cat.to_json(&EntryFilter { kind, ..Default::default() }))?;
        Ok(())
    })
}

/// Value and derivatives of solution `id` (or `id@preset`) at `(x, t)`.
///
/// # Safety
/// `c` must be a live catalog, `id` a C string, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn simred_solution_eval(
    c: *const SimredCatalog,
    id: *const c_char,
    x: f64,
    t: f64,
    out: *mut SimredJet,
) -> SimredStatus {
    guard(|| {
        let cat = catalog(c)?;
        let id = read_str(id, "id")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let inst = lift(cat.solution_instance(id))?;
        let j = lift(inst.eval(x, t))?;
        *out = SimredJet { v: j.v, vx: j.vx, vxx: j.vxx, vt: j.vt };
        Ok(())
    })
}

/// Residual scan of solution `id` on a `grid × grid` tensor grid over its domain.
///
/// # Safety
/// `c` must be a live catalog, `id` a C string, the out-pointers writable.
#[no_mangle]
pub unsafe extern "C" fn simred_verify_solution(
    c: *const SimredCatalog,
    id: *const c_char,
    tol: f64,
    grid: usize,
    max_residual: *mut f64,
    pass: *mut bool,
) -> SimredStatus {
    guard(|| {
        let cat = catalog(c)?;
        let id = read_str(id, "id")?;
        if max_residual.is_null() || pass.is_null() {
            return Err(null("out"));
        }
        let inst = lift(cat.solution_instance(id))?;
        let r = lift(residual_scan(&inst.params, &inst, &inst.domain(), grid, grid, tol))?;
        *max_residual = r.max_residual;
        *pass = r.pass;
        Ok(())
    })
}
