use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use circuit_prior_ffi::*;

fn last_error() -> String {
    let p = cp_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

unsafe fn take(s: *mut c_char) -> String {
    let text = CStr::from_ptr(s).to_string_lossy().into_owned();
    cp_string_free(s);
    text
}

fn oracle(inputs: u8, budget: usize) -> *mut CpOracle {
    let mut o = ptr::null_mut();
    assert_eq!(unsafe { cp_oracle_new(inputs, budget, &mut o) }, CpStatus::Ok);
    assert!(!o.is_null());
    o
}

#[test]
fn complexity_with_witness() {
    let o = oracle(2, 6);
    let pat = CString::new("01").unwrap();
    let (mut value, mut exceeded, mut witness) = (99usize, true, ptr::null_mut());
    unsafe {
        assert_eq!(cp_oracle_complexity(o, pat.as_ptr(), &mut value, &mut exceeded, &mut witness), CpStatus::Ok);
        assert_eq!((value, exceeded), (0, false));
        assert_eq!(cp_circuit_size(witness), 0);
        let mut s = ptr::null_mut();
        assert_eq!(cp_circuit_compute_string(witness, &mut s), CpStatus::Ok);
        assert_eq!(take(s), "0101");
        cp_circuit_free(witness);

        let pat = CString::new("0110").unwrap();
        assert_eq!(cp_oracle_complexity(o, pat.as_ptr(), &mut value, &mut exceeded, ptr::null_mut()), CpStatus::Ok);
        assert_eq!(value, 4);
        cp_oracle_free(o);
    }
}

#[test]
fn budget_exceeded_is_a_result() {
    let o = oracle(2, 3);
    let pat = CString::new("0110").unwrap();
    let (mut value, mut exceeded, mut witness) = (0usize, false, ptr::null_mut());
    unsafe {
        assert_eq!(cp_oracle_complexity(o, pat.as_ptr(), &mut value, &mut exceeded, &mut witness), CpStatus::Ok);
        assert!(exceeded);
        assert!(witness.is_null());
        cp_oracle_free(o);
    }
}

#[test]
fn predict_and_trace() {
    let o = oracle(2, 6);
    let (mut set, mut capped) = (0u8, true);
    let mut trace = CpTrace::default();
    unsafe {
        let prefix = CString::new("01").unwrap();
        assert_eq!(cp_oracle_predict(o, prefix.as_ptr(), &mut set, &mut capped), CpStatus::Ok);
        assert_eq!((set, capped), (0b01, false));
        let prefix = CString::new("0").unwrap();
        assert_eq!(cp_oracle_predict(o, prefix.as_ptr(), &mut set, &mut capped), CpStatus::Ok);
        assert_eq!(set, 0b11);

        let s = CString::new("0110").unwrap();
        assert_eq!(cp_oracle_trace(o, s.as_ptr(), &mut trace), CpStatus::Ok);
        assert_eq!(trace, CpTrace { complexity: 4, errors: 2, uncertain: 1, budget_exceeded: false });
        cp_oracle_free(o);
    }
}

#[test]
fn errors_set_status_and_message() {
    let o = oracle(2, 6);
    let mut trace = CpTrace::default();
    unsafe {
        let s = CString::new("01101").unwrap();
        assert_eq!(cp_oracle_trace(o, s.as_ptr(), &mut trace), CpStatus::InvalidArgument);
        assert!(!last_error().is_empty());

        assert_eq!(cp_oracle_trace(ptr::null(), s.as_ptr(), &mut trace), CpStatus::NullPointer);
        assert!(last_error().contains("oracle"));

        let mut c = ptr::null_mut();
        let bad = CString::new("inputs=2\n0: NAND x0 g0\nout=g0").unwrap();
        assert_eq!(cp_circuit_parse(bad.as_ptr(), &mut c), CpStatus::Parse);
        assert!(c.is_null());

        let mut other = ptr::null_mut();
        assert_eq!(cp_oracle_new(9, 2, &mut other), CpStatus::InvalidArgument);
        cp_oracle_free(o);
    }
}

#[test]
fn circuit_round_trip() {
    let text = "inputs=2\n0: NAND x0 x1\n1: NAND g0 g0\nout=g1";
    let src = CString::new(text).unwrap();
    let mut c = ptr::null_mut();
    unsafe {
        assert_eq!(cp_circuit_parse(src.as_ptr(), &mut c), CpStatus::Ok);
        assert_eq!((cp_circuit_inputs(c), cp_circuit_size(c)), (2, 2));
        let mut s = ptr::null_mut();
        assert_eq!(cp_circuit_to_text(c, &mut s), CpStatus::Ok);
        assert_eq!(take(s), text);
        assert_eq!(cp_circuit_compute_string(c, &mut s), CpStatus::Ok);
        assert_eq!(take(s), "0001");
        cp_circuit_free(c);
        cp_circuit_free(ptr::null_mut());
        assert_eq!(cp_circuit_size(ptr::null()), 0);
    }
}

#[test]
fn counts_and_bounds() {
    let mut count = 0u64;
    let (mut lo, mut hi) = (ptr::null_mut(), ptr::null_mut());
    unsafe {
        assert_eq!(cp_count_circuits(2, 1, 1000, &mut count), CpStatus::Ok);
        assert_eq!(count, 9);
        assert_eq!(cp_count_circuits(2, 4, 100, &mut count), CpStatus::BudgetExceeded);
        assert_eq!(cp_count_bounds(2, 1, &mut lo, &mut hi), CpStatus::Ok);
        assert_eq!((take(lo), take(hi)), ("6".to_string(), "12".to_string()));
    }
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(cp_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_every_export() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = std::fs::read_to_string(dir.join("include/circuit_prior.h")).unwrap();
    let source = std::fs::read_to_string(dir.join("src/lib.rs")).unwrap();
    let exports: Vec<&str> = source
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .filter_map(|rest| rest.split('(').next())
        .collect();
    assert!(exports.len() >= 14, "{exports:?}");
    for name in exports {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
}

#[test]
fn header_compiles_as_c() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let Ok(status) = Command::new("cc")
        .args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c"])
        .arg(dir.join("include/circuit_prior.h"))
        .status()
    else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    assert!(status.success());
}
