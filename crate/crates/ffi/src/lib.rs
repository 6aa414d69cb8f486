//! C ABI over `cone-cert`.
//!
//! Forms and certificates cross the boundary as opaque handles. Every fallible call
//! returns a [`ConeStatus`]; on failure `cone_last_error` describes the cause for the
//! calling thread. Strings returned by the library are freed with `cone_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use cone_cert::catalog;
use cone_cert::cert::Certificate;
use cone_cert::certify::{
    classify, refute_search, sos_search, verify_membership, ChartHint, ClassifyConfig, RefuteOutcome, RefuteStrategy,
    SearchBudget, SosConfig, SosOutcome,
};
use cone_cert::forms::{Dims, Form};
use cone_cert::gram::kernel_relations;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConeStatus {
    Ok = 0,
    VerifyFailed = 1,
    Inconclusive = 2,
    NullPointer = 3,
    InvalidUtf8 = 4,
    ParseError = 5,
    InvalidArgument = 6,
    Internal = 7,
}

/// Opaque form handle.
pub struct ConeForm {
    form: Form,
}

/// Opaque certificate handle.
pub struct ConeCertificate {
    cert: Certificate,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn fail(status: ConeStatus, msg: impl Into<String>) -> ConeStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> ConeStatus) -> ConeStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(ConeStatus::Internal, "internal panic"),
    }
}

unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, ConeStatus> {
    if p.is_null() {
        return Err(fail(ConeStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(p).to_str().map_err(|_| fail(ConeStatus::InvalidUtf8, "argument is not UTF-8"))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).map_or(ptr::null_mut(), CString::into_raw)
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

/// Message for the last failed call on this thread, or NULL. Valid until the next call.
#[no_mangle]
pub extern "C" fn cone_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn cone_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version; free with `cone_string_free`.
#[no_mangle]
pub extern "C" fn cone_version() -> *mut c_char {
    into_c_string(cone_cert::cert::VERIFIER_VERSION.to_string())
}

/// `dim ker G` for `(n, d)`, or -1 on invalid dims.
#[no_mangle]
pub extern "C" fn cone_kernel_dim(n: usize, d: u32) -> i64 {
    match Dims::new(n, d) {
        Ok(dims) => kernel_relations(dims).len() as i64,
        Err(e) => {
            set_error(e.to_string());
            -1
        }
    }
}

/// Parses `text`; `nvars = 0` infers the variable count.
///
/// # Safety
/// `text` is a NUL-terminated string and `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn cone_form_parse(text: *const c_char, nvars: usize, out: *mut *mut ConeForm) -> ConeStatus {
    guard(|| {
        if out.is_null() {
            return fail(ConeStatus::NullPointer, "null output pointer");
        }
        let text = match read_str(text) {
            Ok(t) => t,
            Err(s) => return s,
        };
        let parsed = if nvars == 0 { Form::parse(text) } else { Form::parse_with_vars(text, nvars) };
        match parsed {
            Ok(form) => {
                *out = boxed(ConeForm { form });
                ConeStatus::Ok
            }
            Err(e) => fail(ConeStatus::ParseError, e.to_string()),
        }
    })
}

/// Looks up a catalog entry by name.
///
/// # Safety
/// `name` is a NUL-terminated string and `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn cone_form_catalog(name: *const c_char, out: *mut *mut ConeForm) -> ConeStatus {
    guard(|| {
        if out.is_null() {
            return fail(ConeStatus::NullPointer, "null output pointer");
        }
        let name = match read_str(name) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match catalog::get(name) {
            Ok(e) => {
                *out = boxed(ConeForm { form: e.form });
                ConeStatus::Ok
            }
            Err(e) => fail(ConeStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// # Safety
/// `form` comes from this library and is not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cone_form_free(form: *mut ConeForm) {
    if !form.is_null() {
        drop(Box::from_raw(form));
    }
}

/// Canonical text; free with `cone_string_free`. NULL when `form` is NULL.
///
/// # Safety
/// `form` is a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn cone_form_to_string(form: *const ConeForm) -> *mut c_char {
    match form.as_ref() {
        Some(f) => into_c_string(f.form.to_text()),
        None => ptr::null_mut(),
    }
}

/// # Safety
/// `form` is a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn cone_form_nvars(form: *const ConeForm) -> usize {
    form.as_ref().map_or(0, |f| f.form.nvars())
}

/// # Safety
/// `form` is a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn cone_form_degree(form: *const ConeForm) -> u32 {
    form.as_ref().map_or(0, |f| f.form.degree())
}

unsafe fn form_ref<'a>(form: *const ConeForm) -> Result<&'a Form, ConeStatus> {
    form.as_ref().map(|f| &f.form).ok_or_else(|| fail(ConeStatus::NullPointer, "null form handle"))
}

/// Membership at `level` using the catalog Gram matrix or, failing that, an SOS search.
/// Returns `Inconclusive` when no certificate is found.
///
/// # Safety
/// `form` is a live handle and `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn cone_certify(form: *const ConeForm, level: usize, out: *mut *mut ConeCertificate) -> ConeStatus {
    guard(|| {
        let f = match form_ref(form) {
            Ok(f) => f,
            Err(s) => return s,
        };
        if out.is_null() {
            return fail(ConeStatus::NullPointer, "null output pointer");
        }
        let gram = match catalog::find_by_form(f).and_then(|e| e.gram) {
            Some(g) => g,
            None => match sos_search(f, &SosConfig::default()) {
                Ok(SosOutcome::Found(c)) => c.gram,
                Ok(SosOutcome::NotFound { .. }) => return fail(ConeStatus::Inconclusive, "no Gram matrix found"),
                Err(e) => return fail(ConeStatus::InvalidArgument, e.to_string()),
            },
        };
        match verify_membership(f, level, &gram, ChartHint::Auto) {
            Ok(m) => {
                *out = boxed(ConeCertificate { cert: Certificate::Membership(m) });
                ConeStatus::Ok
            }
            Err(e) => fail(ConeStatus::Inconclusive, e.to_string()),
        }
    })
}

/// Refutation at `level` with the default strategy ladder.
///
/// # Safety
/// `form` is a live handle and `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn cone_refute(form: *const ConeForm, level: usize, seed: u64, out: *mut *mut ConeCertificate) -> ConeStatus {
    guard(|| {
        let f = match form_ref(form) {
            Ok(f) => f,
            Err(s) => return s,
        };
        if out.is_null() {
            return fail(ConeStatus::NullPointer, "null output pointer");
        }
        match refute_search(f, level, &RefuteStrategy::Default, seed, &SearchBudget::default()) {
            Ok(RefuteOutcome::Refuted(c)) => {
                *out = boxed(ConeCertificate { cert: Certificate::Refutation(c) });
                ConeStatus::Ok
            }
            Ok(RefuteOutcome::Inconclusive { points_tried, .. }) => {
                fail(ConeStatus::Inconclusive, format!("no refutation after {points_tried} points"))
            }
            Err(e) => fail(ConeStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// Brackets the smallest level: `*lo` certified lower bound, `*hi` certified upper bound
/// or -1. Returns `Inconclusive` when `lo != hi`.
///
/// # Safety
/// `form` is a live handle; `lo` and `hi` are writable.
#[no_mangle]
pub unsafe extern "C" fn cone_classify(form: *const ConeForm, seed: u64, lo: *mut i64, hi: *mut i64) -> ConeStatus {
    guard(|| {
        let f = match form_ref(form) {
            Ok(f) => f,
            Err(s) => return s,
        };
        if lo.is_null() || hi.is_null() {
            return fail(ConeStatus::NullPointer, "null output pointer");
        }
        let cfg = ClassifyConfig { seed, ..ClassifyConfig::default() };
        match classify(f, &cfg) {
            Ok(c) => {
                *lo = c.lo as i64;
                *hi = c.hi.map_or(-1, |h| h as i64);
                if c.is_exact() {
                    ConeStatus::Ok
                } else {
                    fail(ConeStatus::Inconclusive, format!("interval {}", c.interval()))
                }
            }
            Err(e) => fail(ConeStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// # Safety
/// `json` is a NUL-terminated string and `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn cone_certificate_from_json(json: *const c_char, out: *mut *mut ConeCertificate) -> ConeStatus {
    guard(|| {
        if out.is_null() {
            return fail(ConeStatus::NullPointer, "null output pointer");
        }
        let text = match read_str(json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match Certificate::from_json(text) {
            Ok(cert) => {
                *out = boxed(ConeCertificate { cert });
                ConeStatus::Ok
            }
            Err(e) => fail(ConeStatus::ParseError, e.to_string()),
        }
    })
}

/// Certificate JSON; free with `cone_string_free`.
///
/// # Safety
/// `cert` is a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn cone_certificate_to_json(cert: *const ConeCertificate) -> *mut c_char {
    match cert.as_ref().map(|c| c.cert.to_json()) {
        Some(Ok(s)) => into_c_string(s),
        Some(Err(e)) => {
            set_error(e.to_string());
            ptr::null_mut()
        }
        None => ptr::null_mut(),
    }
}

/// Full exact re-check: `Ok` or `VerifyFailed`.
///
/// # Safety
/// `cert` is a live handle.
#[no_mangle]
pub unsafe extern "C" fn cone_certificate_verify(cert: *const ConeCertificate) -> ConeStatus {
    guard(|| match cert.as_ref() {
        None => fail(ConeStatus::NullPointer, "null certificate handle"),
        Some(c) => match c.cert.verify() {
            Ok(()) => ConeStatus::Ok,
            Err(e) => fail(ConeStatus::VerifyFailed, e.to_string()),
        },
    })
}

/// 1 for membership, 0 for refutation, -1 for NULL.
///
/// # Safety
/// `cert` is a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn cone_certificate_is_membership(cert: *const ConeCertificate) -> i32 {
    match cert.as_ref() {
        Some(ConeCertificate { cert: Certificate::Membership(_) }) => 1,
        Some(_) => 0,
        None => -1,
    }
}

/// # Safety
/// `cert` is a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn cone_certificate_level(cert: *const ConeCertificate) -> i64 {
    cert.as_ref().map_or(-1, |c| c.cert.level() as i64)
}

/// # Safety
/// `cert` comes from this library and is not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cone_certificate_free(cert: *mut ConeCertificate) {
    if !cert.is_null() {
        drop(Box::from_raw(cert));
    }
}
