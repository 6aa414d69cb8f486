use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_cone-cert"));
    c.env_remove("CONE_CERT_SEED");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn verify(path: &Path) -> i32 {
    run(&["verify-cert", path.to_str().unwrap()]).status.code().unwrap()
}

fn certificates(dir: &Path) -> Vec<std::path::PathBuf> {
    let mut v: Vec<_> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    v.sort();
    v
}

fn rewrite(src: &Path, dst: &Path, edit: impl FnOnce(&mut Value)) {
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(src).unwrap()).unwrap();
    edit(&mut v);
    std::fs::write(dst, serde_json::to_string(&v).unwrap()).unwrap();
}

#[test]
fn reproduce_outputs_verify_in_a_separate_process() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["reproduce", "4,4", "--json-out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).contains("all 3 strict inclusions certified"));
    let files = certificates(dir.path());
    assert_eq!(files.len(), 6);
    for f in &files {
        assert_eq!(verify(f), 0, "{}", f.display());
    }
}

#[test]
fn tampered_certificates_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["reproduce", "4,4", "--json-out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let files = certificates(dir.path());
    let member = files.iter().find(|p| p.to_str().unwrap().contains("membership")).unwrap();
    let refute = files.iter().find(|p| p.to_str().unwrap().contains("refutation")).unwrap();
    let bad = dir.path().join("bad.json");

    rewrite(member, &bad, |v| {
        let e = &mut v["payload"]["gram"]["entries"][0];
        let old: i64 = e[2].as_str().unwrap().parse().unwrap();
        e[2] = Value::String(format!("{}/1000", old * 1000 + 1));
    });
    assert_eq!(verify(&bad), 1);

    rewrite(refute, &bad, |v| {
        let m = &mut v["payload"]["farkas"]["multipliers"][0];
        let old: num::BigInt = m.as_str().unwrap().parse().unwrap();
        *m = Value::String((old + num::BigInt::from(1)).to_string());
    });
    assert_eq!(verify(&bad), 1);

    // the envelope must agree with the payload
    rewrite(refute, &bad, |v| {
        let level = v["level"].as_u64().unwrap();
        v["level"] = Value::from(level + 1);
    });
    assert_eq!(verify(&bad), 1);

    rewrite(refute, &bad, |v| {
        v["payload"]["points"][0][1] = Value::String("7/3".into());
    });
    assert_eq!(verify(&bad), 1);
}

#[test]
fn inspect_lists_relations_and_kernel() {
    let out = run(&["inspect", "3", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let s = stdout(&out);
    assert!(s.contains("  1: Z0*Z4 - Z1*Z1"));
    assert!(s.contains("  6: Z0*Z9 - Z3*Z3"));
    assert!(s.contains("kernel dimension: 20"));
    assert!(s.contains("C_0 = C_1 = C_2 = C_3 ⊊ C_4 ⊊ C_5 ⊊ C_6"));
    assert!(s.contains("mu(n=3, d=2)"));
}

#[test]
fn seed_environment_overrides_flag() {
    let args = ["refute", "--catalog", "motzkin", "--level", "6", "--strategy", "random", "--seed", "3"];
    let a = bin().args(args).env("CONE_CERT_SEED", "9").output().unwrap();
    let b = run(&["refute", "--catalog", "motzkin", "--level", "6", "--strategy", "random", "--seed", "9"]);
    assert_eq!(a.status.code(), b.status.code());
    assert_eq!(stdout(&a), stdout(&b));
    let bad = bin().args(args).env("CONE_CERT_SEED", "nine").output().unwrap();
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn exit_codes() {
    // SOS forms cannot be refuted: inconclusive
    let out = run(&["refute", "x0^4 + x1^4", "--level", "0", "--strategy", "signed-units", "--points", "50"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["classify", "x0^4 + x1^4"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("{0..0}"));
    let out = run(&["classify", "x0^3 + x1^3"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["verify-cert", "/nonexistent/cert.json"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn embed_carries_the_gram_matrix() {
    let out = run(&["embed", "--catalog", "choi_lam_quartic_sigma", "--square-of", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let s = stdout(&out);
    assert!(s.contains("form: x0^4*x1^2 + x0^4*x3^2 - 4*x0^3*x1*x2*x3 + x0^2*x1^2*x3^2 + x0^2*x2^4"), "{s}");
    assert!(s.contains("gram: "));
}

#[test]
fn certificate_payloads_are_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let out = run(&["reproduce", "3,6", "--json-out", d.path().to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
    }
    let (fa, fb) = (certificates(a.path()), certificates(b.path()));
    assert_eq!(fa.len(), 8);
    for (x, y) in fa.iter().zip(&fb) {
        assert_eq!(x.file_name(), y.file_name());
        assert_eq!(std::fs::read(x).unwrap(), std::fs::read(y).unwrap());
    }
}
