use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use mzero_ffi::*;

const EXAMPLE_TRIPLE: &str = "vars: X1 X2
f1: 64/73*X1^2 - 48/73*X1*X2 + 9/73*X2^2 + sqrt(73)/12*X2
f2: (8*X1 - 3*X2)^2*(3*X1 + 8*X2)";

fn parse(text: &str) -> (MzStatus, *mut MzSystem) {
    let c = CString::new(text).unwrap();
    let mut sys = ptr::null_mut();
    let st = unsafe { mz_system_parse(c.as_ptr(), &mut sys) };
    (st, sys)
}

fn last_error() -> Option<String> {
    let p = mz_last_error_message();
    if p.is_null() {
        None
    } else {
        Some(unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned())
    }
}

fn origin() -> [MzComplex; 2] {
    [MzComplex { re: 0.0, im: 0.0 }; 2]
}

#[test]
fn parse_and_free() {
    let (st, sys) = parse(EXAMPLE_TRIPLE);
    assert_eq!(st, MzStatus::Ok);
    assert!(!sys.is_null());
    assert_eq!(unsafe { mz_system_nvars(sys) }, 2);
    assert!(last_error().is_none());
    unsafe { mz_system_free(sys) };
    unsafe { mz_system_free(ptr::null_mut()) };
}

#[test]
fn syntax_error_reports_message() {
    let (st, sys) = parse("vars: X\nf: X + * X");
    assert_eq!(st, MzStatus::Syntax);
    assert!(sys.is_null());
    assert!(last_error().unwrap().contains("syntax"));
}

#[test]
fn null_arguments_are_rejected() {
    let mut sys = ptr::null_mut();
    assert_eq!(unsafe { mz_system_parse(ptr::null(), &mut sys) }, MzStatus::NullPointer);
    let mut mu = 0usize;
    let p = origin();
    assert_eq!(unsafe { mz_multiplicity(ptr::null(), p.as_ptr(), 2, &mut mu) }, MzStatus::NullPointer);
    assert_eq!(unsafe { mz_thresholds(0, ptr::null_mut()) }, MzStatus::NullPointer);
    assert_eq!(unsafe { mz_system_nvars(ptr::null()) }, 0);
}

#[test]
fn multiplicity_and_bounds() {
    let (_, sys) = parse(EXAMPLE_TRIPLE);
    let p = origin();
    let mut mu = 0usize;
    assert_eq!(unsafe { mz_multiplicity(sys, p.as_ptr(), 2, &mut mu) }, MzStatus::Ok);
    assert_eq!(mu, 3);
    let mut bound = 0.0;
    assert_eq!(unsafe { mz_separation_bound(sys, p.as_ptr(), 2, 3, 0, &mut bound) }, MzStatus::Ok);
    assert!((bound - 0.01535).abs() < 1e-4, "{bound}");
    assert_eq!(unsafe { mz_multiplicity(sys, p.as_ptr(), 3, &mut mu) }, MzStatus::InvalidInput);
    unsafe { mz_system_free(sys) };
}

#[test]
fn nonsingular_point_is_numerical_error() {
    let (_, sys) = parse(EXAMPLE_TRIPLE);
    let p = [MzComplex { re: 1.0, im: 0.0 }, MzComplex { re: 1.0, im: 0.0 }];
    let mut mu = 0usize;
    assert_eq!(unsafe { mz_multiplicity(sys, p.as_ptr(), 2, &mut mu) }, MzStatus::Numerical);
    assert!(last_error().is_some());
    unsafe { mz_system_free(sys) };
}

#[test]
fn certify_and_refine() {
    let (_, sys) = parse(EXAMPLE_TRIPLE);
    let x = [MzComplex { re: -4.1291826e-8, im: 0.0 }, MzComplex { re: -2.9505818e-8, im: 0.0 }];
    let mut cert = MzCertificate::default();
    assert_eq!(unsafe { mz_certify(sys, x.as_ptr(), 2, 3, 0, &mut cert) }, MzStatus::Ok);
    assert_eq!(cert.mu, 3);
    assert!((cert.radius - 0.0076).abs() < 1e-4);
    assert_eq!(cert.holds != 0, cert.lhs < cert.rhs);

    let z = [MzComplex { re: -0.01, im: 0.0 }, MzComplex { re: 0.01, im: 0.0 }];
    let mut out = origin();
    let mut iters = 0usize;
    let mut conv = 0i32;
    let st = unsafe { mz_refine(sys, z.as_ptr(), 2, 3, 1e-12, 20, out.as_mut_ptr(), &mut iters, &mut conv) };
    assert_eq!(st, MzStatus::Ok);
    assert_eq!(conv, 1);
    assert!((1..=6).contains(&iters));
    assert!(out[0].re.hypot(out[1].re) < 1e-9);
    unsafe { mz_system_free(sys) };
}

#[test]
fn thresholds_by_code() {
    let mut t = MzThresholds::default();
    assert_eq!(unsafe { mz_thresholds(MZ_VARIANT_NORMALIZED_DOUBLE, &mut t) }, MzStatus::Ok);
    assert_eq!(t.mu, 2);
    assert!((t.u_converge - 0.0418).abs() < 5e-4 && (t.u_quadratic - 0.0318).abs() < 5e-4);
    assert_eq!(unsafe { mz_thresholds(MZ_VARIANT_GENERAL_TRIPLE, &mut t) }, MzStatus::Ok);
    assert!((t.u_converge - 0.0137).abs() < 5e-4);
    assert_eq!(unsafe { mz_thresholds(42, &mut t) }, MzStatus::InvalidInput);
}

#[test]
fn header_is_generated_and_compiles() {
    let header = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include").join("mzero.h");
    let text = std::fs::read_to_string(&header).expect("header generated by the build script");
    for name in ["mz_system_parse", "mz_system_free", "mz_certify", "mz_refine", "mz_last_error_message", "MzStatus"] {
        assert!(text.contains(name), "{name} missing from header");
    }
    // Syntax-check with a C compiler when one is available.
    if let Ok(out) = Command::new("cc").args(["-fsyntax-only", "-x", "c"]).arg(&header).output() {
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
}
