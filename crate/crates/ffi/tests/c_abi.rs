use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use cone_cert_ffi::*;

fn text(p: *mut std::ffi::c_char) -> String {
    assert!(!p.is_null());
    let s = unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string();
    unsafe { cone_string_free(p) };
    s
}

fn last_error() -> String {
    let p = cone_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

#[test]
fn parse_and_print() {
    let src = CString::new("x1^4 + x0^4").unwrap();
    let mut f = ptr::null_mut();
    assert_eq!(unsafe { cone_form_parse(src.as_ptr(), 0, &mut f) }, ConeStatus::Ok);
    assert_eq!(unsafe { cone_form_nvars(f) }, 2);
    assert_eq!(unsafe { cone_form_degree(f) }, 4);
    assert_eq!(text(unsafe { cone_form_to_string(f) }), "x0^4 + x1^4");
    unsafe { cone_form_free(f) };
}

#[test]
fn error_codes() {
    let bad = CString::new("x0^2 +").unwrap();
    let mut f = ptr::null_mut();
    assert_eq!(unsafe { cone_form_parse(bad.as_ptr(), 0, &mut f) }, ConeStatus::ParseError);
    assert!(f.is_null());
    assert!(!last_error().is_empty());
    assert_eq!(unsafe { cone_form_parse(ptr::null(), 0, &mut f) }, ConeStatus::NullPointer);
    let name = CString::new("robinson").unwrap();
    assert_eq!(unsafe { cone_form_catalog(name.as_ptr(), &mut f) }, ConeStatus::InvalidArgument);
    assert!(last_error().contains("robinson"));
    assert_eq!(cone_kernel_dim(3, 2), 20);
    assert_eq!(cone_kernel_dim(0, 2), -1);
    assert_eq!(unsafe { cone_certificate_verify(ptr::null()) }, ConeStatus::NullPointer);
}

#[test]
fn certify_refute_roundtrip() {
    let name = CString::new("choi_lam_quartic_sigma").unwrap();
    let mut f = ptr::null_mut();
    assert_eq!(unsafe { cone_form_catalog(name.as_ptr(), &mut f) }, ConeStatus::Ok);
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { cone_certify(f, 4, &mut m) }, ConeStatus::Ok);
    assert_eq!(unsafe { cone_certificate_is_membership(m) }, 1);
    assert_eq!(unsafe { cone_certificate_level(m) }, 4);
    let mut r = ptr::null_mut();
    assert_eq!(unsafe { cone_refute(f, 3, 0, &mut r) }, ConeStatus::Ok);
    assert_eq!(unsafe { cone_certificate_is_membership(r) }, 0);
    let json = text(unsafe { cone_certificate_to_json(r) });
    let mut back = ptr::null_mut();
    let cjson = CString::new(json.clone()).unwrap();
    assert_eq!(unsafe { cone_certificate_from_json(cjson.as_ptr(), &mut back) }, ConeStatus::Ok);
    assert_eq!(unsafe { cone_certificate_verify(back) }, ConeStatus::Ok);
    let tampered = json.replacen("\"multipliers\": [\n        \"", "\"multipliers\": [\n        \"1", 1);
    assert_ne!(tampered, json);
    let ct = CString::new(tampered).unwrap();
    let mut t = ptr::null_mut();
    assert_eq!(unsafe { cone_certificate_from_json(ct.as_ptr(), &mut t) }, ConeStatus::Ok);
    assert_eq!(unsafe { cone_certificate_verify(t) }, ConeStatus::VerifyFailed);
    unsafe {
        cone_certificate_free(m);
        cone_certificate_free(r);
        cone_certificate_free(back);
        cone_certificate_free(t);
        cone_form_free(f);
    }
}

#[test]
fn classify_sos_form() {
    let src = CString::new("x0^4 + x1^4").unwrap();
    let mut f = ptr::null_mut();
    assert_eq!(unsafe { cone_form_parse(src.as_ptr(), 0, &mut f) }, ConeStatus::Ok);
    let (mut lo, mut hi) = (-5i64, -5i64);
    assert_eq!(unsafe { cone_classify(f, 0, &mut lo, &mut hi) }, ConeStatus::Ok);
    assert_eq!((lo, hi), (0, 0));
    unsafe { cone_form_free(f) };
}

/// Compiles a small C program against the generated header and the shared library.
#[test]
fn c_program_links_against_header() {
    let crate_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header_dir = crate_dir.join("include");
    assert!(header_dir.join("cone_cert.h").exists());
    let lib_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    if !lib_dir.join("libcone_cert_ffi.so").exists() {
        eprintln!("shared library not built next to the test binary; skipping link check");
        return;
    }
    let tmp = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let src = tmp.join("smoke.c");
    std::fs::write(
        &src,
        r#"#include <stdio.h>
#include "cone_cert.h"
int main(void) {
    ConeForm *f = NULL;
    if (cone_form_catalog("choi_lam_quartic", &f) != CONE_STATUS_OK) return 10;
    ConeCertificate *c = NULL;
    if (cone_certify(f, 6, &c) != CONE_STATUS_OK) return 11;
    if (cone_certificate_verify(c) != CONE_STATUS_OK) return 12;
    if (cone_certify(f, 5, &c) != CONE_STATUS_INCONCLUSIVE) return 13;
    if (cone_last_error() == NULL) return 14;
    char *s = cone_form_to_string(f);
    printf("%s\n", s);
    cone_string_free(s);
    cone_form_free(f);
    return 0;
}
"#,
    )
    .unwrap();
    let exe = tmp.join("smoke");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let status = Command::new(&cc)
        .arg(&src)
        .arg("-I")
        .arg(&header_dir)
        .arg("-L")
        .arg(&lib_dir)
        .arg("-lcone_cert_ffi")
        .arg("-o")
        .arg(&exe)
        .status();
    let Ok(status) = status else {
        eprintln!("no C compiler; skipping link check");
        return;
    };
    assert!(status.success(), "C compile failed");
    let out = Command::new(&exe).env("LD_LIBRARY_PATH", &lib_dir).output().unwrap();
    assert!(out.status.success(), "C program exited with {:?}", out.status.code());
    assert!(String::from_utf8_lossy(&out.stdout).contains("x3^4"));
}
