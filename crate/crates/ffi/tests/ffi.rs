use std::ffi::{CStr, CString};
use std::ptr;

use fockforge::zx::fixtures;
use fockforge_ffi::*;

fn device(kind: FfDeviceKind, n: usize, boost: &[usize]) -> *mut FfDevice {
    let mut d = ptr::null_mut();
    let s = unsafe { ff_device_new(kind as i32, n, boost.as_ptr(), boost.len(), &mut d) };
    assert_eq!(s, FfStatus::Ok);
    d
}

fn last_error() -> String {
    let p = ff_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn device_probabilities() {
    for (kind, n, boost, num, den) in [
        (FfDeviceKind::Bell, 2, &[][..], 1, 2),
        (FfDeviceKind::Bell, 2, &[0][..], 5, 8),
        (FfDeviceKind::Ghz, 3, &[][..], 1, 4),
        (FfDeviceKind::Fusion, 4, &[][..], 1, 8),
    ] {
        let d = device(kind, n, boost);
        let mut p = FfProbability::default();
        assert_eq!(unsafe { ff_device_success_probability(d, &mut p) }, FfStatus::Ok);
        assert_eq!((p.numerator, p.denominator), (num, den));
        assert!((p.value - num as f64 / den as f64).abs() < 1e-12);
        unsafe { ff_device_free(d) };
    }
}

#[test]
fn kraus_counts_and_loss() {
    let d = device(FfDeviceKind::Bell, 2, &[]);
    let (mut total, mut ok) = (0, 0);
    assert_eq!(unsafe { ff_device_kraus_count(d, &mut total, &mut ok) }, FfStatus::Ok);
    assert_eq!((total, ok), (4, 2));
    let mut v = 0.0;
    assert_eq!(unsafe { ff_device_lossy_probability(d, 0.5, &mut v) }, FfStatus::Ok);
    assert!((v - 0.125).abs() < 1e-12);
    assert_eq!(unsafe { ff_device_lossy_probability(d, 2.0, &mut v) }, FfStatus::InvalidArgument);
    assert!(last_error().contains("eta"));
    unsafe { ff_device_free(d) };
}

#[test]
fn bad_arguments() {
    let mut d = ptr::null_mut();
    assert_eq!(unsafe { ff_device_new(7, 2, ptr::null(), 0, &mut d) }, FfStatus::InvalidArgument);
    assert!(d.is_null());
    assert_eq!(unsafe { ff_device_new(1, 1, ptr::null(), 0, &mut d) }, FfStatus::InvalidArgument);
    assert_eq!(unsafe { ff_device_new(0, 2, ptr::null(), 1, &mut d) }, FfStatus::NullPointer);
    assert_eq!(unsafe { ff_device_new(0, 2, ptr::null(), 0, ptr::null_mut()) }, FfStatus::NullPointer);
    let mut p = FfProbability::default();
    assert_eq!(unsafe { ff_device_success_probability(ptr::null(), &mut p) }, FfStatus::NullPointer);
    unsafe {
        ff_device_free(ptr::null_mut());
        ff_scheme_free(ptr::null_mut());
        ff_string_free(ptr::null_mut());
    }
}

#[test]
fn compile_verify_and_round_trip() {
    let json = CString::new(fixtures::ghz4_bell_seeds().unwrap().to_json()).unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { ff_scheme_compile(json.as_ptr(), &mut s) }, FfStatus::Ok);
    let mut p = FfProbability::default();
    assert_eq!(unsafe { ff_scheme_success_probability(s, &mut p) }, FfStatus::Ok);
    assert_eq!((p.numerator, p.denominator), (1, 8));
    let (mut photons, mut detecting) = (0, false);
    assert_eq!(unsafe { ff_scheme_resources(s, &mut photons, &mut detecting) }, FfStatus::Ok);
    assert_eq!(photons, 8);
    assert!(detecting);

    let target = CString::new("ghz:4").unwrap();
    let mut r = FfVerifyReport::default();
    assert_eq!(unsafe { ff_scheme_verify(s, target.as_ptr(), 0, &mut r) }, FfStatus::Ok);
    assert!(r.passed);
    assert!((r.total_probability - 0.125).abs() < 1e-9);
    assert_eq!(unsafe { ff_scheme_verify(s, target.as_ptr(), 4, &mut r) }, FfStatus::Resource);

    let mut text = ptr::null_mut();
    assert_eq!(unsafe { ff_scheme_to_json(s, &mut text) }, FfStatus::Ok);
    let mut back = ptr::null_mut();
    assert_eq!(unsafe { ff_scheme_from_json(text, &mut back) }, FfStatus::Ok);
    let source = CString::new("source").unwrap();
    assert_eq!(unsafe { ff_scheme_verify(back, source.as_ptr(), 16, &mut r) }, FfStatus::Ok);
    assert!(r.passed);
    unsafe {
        ff_string_free(text);
        ff_scheme_free(back);
        ff_scheme_free(s);
    }
}

#[test]
fn compile_errors() {
    let mut s = ptr::null_mut();
    let junk = CString::new("{").unwrap();
    assert_eq!(unsafe { ff_scheme_compile(junk.as_ptr(), &mut s) }, FfStatus::Parse);
    let mut b = fockforge::zx::DiagramBuilder::new();
    b.spider("x", 2, 2);
    for i in 0..2 {
        let (e, p) = (b.input(), b.inp("x", i));
        b.wire(e, p);
        let (p, e) = (b.out("x", i), b.output());
        b.wire(p, e);
    }
    let json = CString::new(b.build().unwrap().to_json()).unwrap();
    assert_eq!(unsafe { ff_scheme_compile(json.as_ptr(), &mut s) }, FfStatus::Conversion);
    assert!(last_error().contains("2->2"));
    assert!(s.is_null());
}

#[test]
fn header_declares_the_interface() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/fockforge.h")).unwrap();
    for name in [
        "ff_last_error", "ff_device_new", "ff_device_free", "ff_device_success_probability",
        "ff_device_kraus_count", "ff_device_lossy_probability", "ff_scheme_compile",
        "ff_scheme_from_json", "ff_scheme_free", "ff_scheme_success_probability",
        "ff_scheme_resources", "ff_scheme_to_json", "ff_string_free", "ff_scheme_verify",
        "typedef struct FfDevice FfDevice", "FF_STATUS_CONVERSION",
    ] {
        assert!(header.contains(name), "{name} missing from the header");
    }
}
