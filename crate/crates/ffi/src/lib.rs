//! C interface to `lgp-core`.
//!
//! Every function returns an [`LgpStatus`]; results come back through out
//! pointers. On failure the message is kept per thread and can be read with
//! [`lgp_last_error`]. Strings handed out by this library must be released
//! with [`lgp_string_free`], handles with their own `*_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::ptr;

use lgp_core::cli::{build_report, RunArgs};
use lgp_core::finite_abelian::{element_order, Element, FiniteAbelianGroup};
use lgp_core::fixture::load_module;
use lgp_core::local_global::{decide_membership_in, fixing_matrix_in};
use lgp_core::reduction::GlobalModule;
use lgp_core::report::{verify_report, Report};
use lgp_core::Error;
use num_bigint::BigInt;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LgpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidInput = 3,
    Fixture = 4,
    ResourceLimit = 5,
    Io = 6,
    Panic = 7,
}

/// A loaded module description.
pub struct LgpModule {
    inner: GlobalModule,
}

/// A finite abelian group given by invariant factors.
pub struct LgpGroup {
    inner: FiniteAbelianGroup,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn fail(status: LgpStatus, msg: impl Into<String>) -> LgpStatus {
    set_error(msg);
    status
}

fn from_core(err: Error) -> LgpStatus {
    let status = match &err {
        Error::Input(_) => LgpStatus::InvalidInput,
        Error::Resource { .. } => LgpStatus::ResourceLimit,
        Error::Fixture(_) => LgpStatus::Fixture,
        Error::Io { .. } => LgpStatus::Io,
    };
    fail(status, err.to_string())
}

/// Runs `f`, turning panics into `Panic`.
fn guard(f: impl FnOnce() -> Result<(), LgpStatus>) -> LgpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LgpStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(LgpStatus::Panic, "internal panic"),
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, LgpStatus> {
    if p.is_null() {
        return Err(fail(LgpStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(LgpStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn slice_arg<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], LgpStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(LgpStatus::NullPointer, format!("{what} is null")));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, LgpStatus> {
    p.as_mut()
        .ok_or_else(|| fail(LgpStatus::NullPointer, format!("{what} is null")))
}

fn to_c_string(s: String) -> Result<*mut c_char, LgpStatus> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| fail(LgpStatus::InvalidInput, "output contains a NUL byte"))
}

fn elements(g: &FiniteAbelianGroup, coords: &[i64], count: usize) -> Result<Vec<Element>, LgpStatus> {
    let r = g.rank();
    if coords.len() != count * r {
        return Err(fail(
            LgpStatus::InvalidInput,
            format!("expected {} coordinates, got {}", count * r, coords.len()),
        ));
    }
    (0..count)
        .map(|i| {
            let c: Vec<BigInt> = coords[i * r..(i + 1) * r].iter().map(|&x| BigInt::from(x)).collect();
            g.element_reduced(&c).map_err(from_core)
        })
        .collect()
}

/// Message for the last failed call on this thread, or null. Valid until
/// the next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn lgp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn lgp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn lgp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Loads a module description file.
///
/// # Safety
/// `path` is a NUL-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn lgp_module_load(path: *const c_char, out: *mut *mut LgpModule) -> LgpStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let path = str_arg(path, "path")?;
        let fx = load_module(Path::new(path)).map_err(from_core)?;
        *out = Box::into_raw(Box::new(LgpModule { inner: fx.module }));
        Ok(())
    })
}

/// # Safety
/// `m` comes from [`lgp_module_load`] or is null.
#[no_mangle]
pub unsafe extern "C" fn lgp_module_free(m: *mut LgpModule) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// # Safety
/// `m` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn lgp_module_rank(m: *const LgpModule, out: *mut usize) -> LgpStatus {
    guard(|| {
        let m = m
            .as_ref()
            .ok_or_else(|| fail(LgpStatus::NullPointer, "module is null"))?;
        *out_arg(out, "out")? = m.inner.rank();
        Ok(())
    })
}

/// Number of good places up to `bound`.
///
/// # Safety
/// `m` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn lgp_module_good_place_count(m: *const LgpModule, bound: u64, out: *mut usize) -> LgpStatus {
    guard(|| {
        let m = m
            .as_ref()
            .ok_or_else(|| fail(LgpStatus::NullPointer, "module is null"))?;
        *out_arg(out, "out")? = m.inner.good_places(bound).len();
        Ok(())
    })
}

/// Group with the given invariant factors (each ≥ 2, each dividing the
/// next). `len = 0` gives the trivial group.
///
/// # Safety
/// `invariants` points to `len` values; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn lgp_group_new(invariants: *const u64, len: usize, out: *mut *mut LgpGroup) -> LgpStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let inv = slice_arg(invariants, len, "invariants")?;
        let g = FiniteAbelianGroup::new(inv.to_vec()).map_err(from_core)?;
        *out = Box::into_raw(Box::new(LgpGroup { inner: g }));
        Ok(())
    })
}

/// # Safety
/// `g` comes from [`lgp_group_new`] or is null.
#[no_mangle]
pub unsafe extern "C" fn lgp_group_free(g: *mut LgpGroup) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Order of the element with coordinates `coords` (reduced modulo the
/// invariant factors).
///
/// # Safety
/// `g` is a live handle; `coords` points to `len` values; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn lgp_group_element_order(
    g: *const LgpGroup,
    coords: *const i64,
    len: usize,
    out: *mut u64,
) -> LgpStatus {
    guard(|| {
        let g = &g
            .as_ref()
            .ok_or_else(|| fail(LgpStatus::NullPointer, "group is null"))?
            .inner;
        let x = elements(g, slice_arg(coords, len, "coords")?, 1)?;
        *out_arg(out, "out")? = element_order(g, &x[0]).map_err(from_core)?;
        Ok(())
    })
}

/// Fixing-matrix outcome for `e` elements of `g` as JSON: either a
/// certificate or a method failure with its gcd. `pbar` holds the `e`
/// elements row by row.
///
/// # Safety
/// `g` is a live handle; `pbar` points to `e · rank(g)` values; `out_json`
/// is writable.
#[no_mangle]
pub unsafe extern "C" fn lgp_fixing_matrix_json(
    g: *const LgpGroup,
    pbar: *const i64,
    e: usize,
    place: u64,
    out_json: *mut *mut c_char,
) -> LgpStatus {
    guard(|| {
        let out = out_arg(out_json, "out_json")?;
        let g = &g
            .as_ref()
            .ok_or_else(|| fail(LgpStatus::NullPointer, "group is null"))?
            .inner;
        let coords = slice_arg(pbar, e * g.rank(), "pbar")?;
        let pts = elements(g, coords, e)?;
        let outcome = fixing_matrix_in(g, &pts, place).map_err(from_core)?;
        let json = serde_json::to_string(&outcome).map_err(|e| fail(LgpStatus::InvalidInput, e.to_string()))?;
        *out = to_c_string(json)?;
        Ok(())
    })
}

/// Exact decision of whether `pbar` lies in its own trace-zero lattice
/// inside `g`; writes 1 or 0.
///
/// # Safety
/// As for [`lgp_fixing_matrix_json`]; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn lgp_local_membership(
    g: *const LgpGroup,
    pbar: *const i64,
    e: usize,
    out: *mut i32,
) -> LgpStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let g = &g
            .as_ref()
            .ok_or_else(|| fail(LgpStatus::NullPointer, "group is null"))?
            .inner;
        let pts = elements(g, slice_arg(pbar, e * g.rank(), "pbar")?, e)?;
        *out = decide_membership_in(g, &pts).map_err(from_core)?.is_some() as i32;
        Ok(())
    })
}

/// Runs a subcommand (`counterexample`, `dynamics`, `scan-orders` or
/// `axioms`) on a module file and returns the report as JSON. Zero bounds
/// fall back to the fixture's values. `exit_code` receives 0 or 1 as the
/// command-line tool would return.
///
/// # Safety
/// String arguments are NUL-terminated; out pointers are writable.
#[no_mangle]
pub unsafe extern "C" fn lgp_run_report(
    command: *const c_char,
    fixture: *const c_char,
    place_bound: u64,
    step_bound: u64,
    seed: u64,
    out_json: *mut *mut c_char,
    exit_code: *mut i32,
) -> LgpStatus {
    guard(|| {
        let out = out_arg(out_json, "out_json")?;
        let code = out_arg(exit_code, "exit_code")?;
        let command = str_arg(command, "command")?;
        let args = RunArgs {
            fixture: PathBuf::from(str_arg(fixture, "fixture")?),
            place_bound: (place_bound > 0).then_some(place_bound),
            step_bound: (step_bound > 0).then_some(step_bound),
            l: None,
            pattern: None,
            out: None,
            jobs: None,
            seed,
        };
        let report = build_report(command, &args).map_err(from_core)?;
        *code = report.exit_code;
        *out = to_c_string(report.to_json())?;
        Ok(())
    })
}

/// Rechecks a JSON report; writes the number of problems found. When
/// there are any, the first one is readable through [`lgp_last_error`].
///
/// # Safety
/// `json` is NUL-terminated; `problems` is writable.
#[no_mangle]
pub unsafe extern "C" fn lgp_verify_report(json: *const c_char, problems: *mut usize) -> LgpStatus {
    guard(|| {
        let n = out_arg(problems, "problems")?;
        let report: Report = serde_json::from_str(str_arg(json, "json")?)
            .map_err(|e| fail(LgpStatus::InvalidInput, format!("not a report: {e}")))?;
        let found = verify_report(&report);
        if let Some(first) = found.first() {
            set_error(first.clone());
        }
        *n = found.len();
        Ok(())
    })
}
