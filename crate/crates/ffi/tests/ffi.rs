use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use simred_ffi::*;

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

#[test]
fn residual_of_a_steady_constant() {
    let p = SimredParams { n_num: 2, n_den: 1, c: 0.5, lambda: 0.0 };
    let j = SimredJet { v: 3.0, ..Default::default() };
    let mut out = f64::NAN;
    let st = unsafe { simred_pde_residual(&p, 1.0, &j, &mut out) };
    assert_eq!(st, SimredStatus::Ok);
    assert_eq!(out, 0.0);
}

#[test]
fn invalid_inputs_map_to_status_codes() {
    let j = SimredJet::default();
    let mut out = 0.0;
    let bad = SimredParams { n_num: 1, n_den: 1, c: 0.0, lambda: 0.0 };
    assert_eq!(unsafe { simred_pde_residual(&bad, 1.0, &j, &mut out) }, SimredStatus::InvalidParams);
    let msg = unsafe { CStr::from_ptr(simred_last_error()) }.to_str().unwrap();
    assert!(msg.contains("n = 1"), "{msg}");
    let p = SimredParams { n_num: 1, n_den: 2, c: 0.0, lambda: 0.0 };
    assert_eq!(unsafe { simred_pde_residual(&p, -1.0, &j, &mut out) }, SimredStatus::DomainViolation);
    assert_eq!(unsafe { simred_pde_residual(ptr::null(), 1.0, &j, &mut out) }, SimredStatus::NullPointer);
    assert_eq!(unsafe { simred_catalog_len(ptr::null(), ptr::null_mut()) }, SimredStatus::NullPointer);
}

#[test]
fn catalog_round_trip() {
    let cat = simred_catalog_new();
    assert!(!cat.is_null());
    let mut n = 0usize;
    assert_eq!(unsafe { simred_catalog_len(cat, &mut n) }, SimredStatus::Ok);
    let mut ids = Vec::new();
    for i in 0..n {
        let mut s = ptr::null_mut();
        assert_eq!(unsafe { simred_catalog_entry_id(cat, i, &mut s) }, SimredStatus::Ok);
        ids.push(unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_string());
        unsafe { simred_string_free(s) };
    }
    assert!(ids.windows(2).all(|w| w[0] <= w[1]));
    assert!(ids.iter().any(|i| i == "X6"));
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { simred_catalog_entry_id(cat, n, &mut s) }, SimredStatus::IndexOutOfRange);

    let kind = cstr("potential");
    assert_eq!(unsafe { simred_catalog_json(cat, kind.as_ptr(), &mut s) }, SimredStatus::Ok);
    let json: serde_json::Value = serde_json::from_str(unsafe { CStr::from_ptr(s) }.to_str().unwrap()).unwrap();
    unsafe { simred_string_free(s) };
    assert_eq!(json.as_array().unwrap().len(), 1);
    assert_eq!(json[0]["id"], "X6");

    let id = cstr("trivial-potential");
    let mut j = SimredJet::default();
    assert_eq!(unsafe { simred_solution_eval(cat, id.as_ptr(), 1.0, 0.3, &mut j) }, SimredStatus::Ok);
    assert!((j.v - 0.5).abs() < 1e-15 && j.vt == 0.0);
    let (mut r, mut pass) = (f64::NAN, false);
    assert_eq!(unsafe { simred_verify_solution(cat, id.as_ptr(), 1e-9, 10, &mut r, &mut pass) }, SimredStatus::Ok);
    assert!(pass && r < 1e-9);
    let unknown = cstr("nope");
    assert_eq!(unsafe { simred_solution_eval(cat, unknown.as_ptr(), 1.0, 0.0, &mut j) }, SimredStatus::UnknownEntry);
    unsafe { simred_catalog_free(cat) };
}

#[test]
fn header_declares_the_api() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/simred.h")).unwrap();
    for f in ["simred_catalog_new", "simred_verify_solution", "simred_last_error", "typedef struct SimredCatalog"] {
        assert!(h.contains(f), "{f}");
    }
}

/// Compiles and runs the C smoke program against the static library when a C
/// compiler and the archive are available.
#[test]
fn c_program_links_and_runs() {
    let tmp = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let profile_dir = tmp.parent().unwrap().join(if cfg!(debug_assertions) { "debug" } else { "release" });
    let lib = profile_dir.join("libsimred_ffi.a");
    if !lib.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler or {} missing", lib.display());
        return;
    }
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let exe = tmp.join("simred_smoke");
    let status = Command::new("cc")
        .arg(manifest.join("tests/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
}
