//! C interface. Devices and schemes live behind opaque handles; every call
//! returns an `FfStatus` and writes results through out-pointers. The message
//! of the last failure on the calling thread is kept for `ff_last_error`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::ptr;

use fockforge::devices::{
    bell_analyser, boosted, ghz_analyser, kraus_table, lossy_success_polynomial,
    success_probability_of, type1_fusion, Device, KrausOperator, Outcome,
};
use fockforge::exact::Probability;
use fockforge::stabilizer::{ghz_state, graph_state, ring_edges};
use fockforge::zx::{
    extract_scheme, scheme_metrics, to_tensor, verify_scheme, Boosting, LOScheme, SchemeMetrics,
    SimOptions, ZXDiagram,
};
use fockforge::Error;

/// Result of every call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Conversion = 4,
    Resource = 5,
    Internal = 6,
}

/// Device families accepted by `ff_device_new`.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FfDeviceKind {
    Bell = 0,
    Ghz = 1,
    Fusion = 2,
}

/// An exact probability `numerator / denominator`, or `denominator == 0`
/// when only `value` is known.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FfProbability {
    pub numerator: i64,
    pub denominator: i64,
    pub value: f64,
}

/// A measurement device with its grouped Kraus table.
pub struct FfDevice {
    device: Device,
    table: Vec<KrausOperator>,
}

/// A compiled linear-optics scheme with its metrics.
pub struct FfScheme {
    scheme: LOScheme,
    metrics: SchemeMetrics,
}

/// Outcome of `ff_scheme_verify`.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FfVerifyReport {
    pub passed: bool,
    pub branches: usize,
    pub total_probability: f64,
    pub worst_fidelity: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn fail(status: FfStatus, msg: impl Into<String>) -> FfStatus {
    let text = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(text));
    status
}

fn status_of(e: Error) -> FfStatus {
    let status = match &e {
        Error::Parse(_) => FfStatus::Parse,
        Error::Conversion(_) => FfStatus::Conversion,
        Error::Resource(_) => FfStatus::Resource,
        Error::Parameter(_) | Error::Index(_) | Error::Dimension(_) => FfStatus::InvalidArgument,
        Error::Rewrite(_) => FfStatus::Internal,
    };
    fail(status, e.to_string())
}

/// Runs `f`, turning errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), FfStatus>) -> FfStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match std::panic::catch_unwind(std::panic::AssertUnwindSafe(f)) {
        Ok(Ok(())) => FfStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(FfStatus::Internal, "internal panic"),
    }
}

fn lib<T>(r: fockforge::Result<T>) -> Result<T, FfStatus> {
    r.map_err(status_of)
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), FfStatus> {
    if p.is_null() {
        Err(fail(FfStatus::NullPointer, format!("{name} is null")))
    } else {
        Ok(())
    }
}

unsafe fn text<'a>(p: *const c_char, name: &str) -> Result<&'a str, FfStatus> {
    non_null(p, name)?;
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(FfStatus::InvalidArgument, format!("{name} is not UTF-8")))
}

fn probability(p: Probability) -> FfProbability {
    let exact = p.exact().and_then(|r| {
        Some((i64::try_from(*r.numer()).ok()?, i64::try_from(*r.denom()).ok()?))
    });
    let (numerator, denominator) = exact.unwrap_or((0, 0));
    FfProbability {
        numerator,
        denominator,
        value: p.value(),
    }
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call on the same thread.
#[no_mangle]
pub extern "C" fn ff_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Builds a device. `kind` is an `FfDeviceKind`; `n` is ignored for Bell
/// analysers; `boost` lists `boost_len` qubits that get an SQA-beta unit.
///
/// # Safety
/// `boost` must point to `boost_len` readable values (or be null when
/// `boost_len` is 0) and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ff_device_new(
    kind: i32,
    n: usize,
    boost: *const usize,
    boost_len: usize,
    out: *mut *mut FfDevice,
) -> FfStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = ptr::null_mut();
        if boost_len > 0 {
            non_null(boost, "boost")?;
        }
        let base = match kind {
            k if k == FfDeviceKind::Bell as i32 => bell_analyser(),
            k if k == FfDeviceKind::Ghz as i32 => lib(ghz_analyser(n))?,
            k if k == FfDeviceKind::Fusion as i32 => lib(type1_fusion(n))?,
            k => return Err(fail(FfStatus::InvalidArgument, format!("unknown device kind {k}"))),
        };
        let device = if boost_len == 0 {
            base
        } else {
            let qubits = std::slice::from_raw_parts(boost, boost_len);
            lib(boosted(&base, qubits))?
        };
        let table = lib(kraus_table(&device))?;
        *out = Box::into_raw(Box::new(FfDevice { device, table }));
        Ok(())
    })
}

/// # Safety
/// `device` must come from `ff_device_new` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ff_device_free(device: *mut FfDevice) {
    if !device.is_null() {
        drop(Box::from_raw(device));
    }
}

/// Lossless success probability.
///
/// # Safety
/// `device` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ff_device_success_probability(
    device: *const FfDevice,
    out: *mut FfProbability,
) -> FfStatus {
    guard(|| {
        non_null(device, "device")?;
        non_null(out, "out")?;
        let d = &*device;
        *out = probability(success_probability_of(&d.device, &d.table));
        Ok(())
    })
}

/// Number of grouped Kraus operators, and how many of them herald success.
///
/// # Safety
/// `device` must be a live handle; the out-pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn ff_device_kraus_count(
    device: *const FfDevice,
    total: *mut usize,
    successes: *mut usize,
) -> FfStatus {
    guard(|| {
        non_null(device, "device")?;
        non_null(total, "total")?;
        non_null(successes, "successes")?;
        let t = &(*device).table;
        *total = t.len();
        *successes = t.iter().filter(|k| k.outcome == Outcome::SuccessEntangled).count();
        Ok(())
    })
}

/// Success probability of an analyser whose detectors and sources each
/// work with probability `eta`.
///
/// # Safety
/// `device` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ff_device_lossy_probability(
    device: *const FfDevice,
    eta: f64,
    out: *mut f64,
) -> FfStatus {
    guard(|| {
        non_null(device, "device")?;
        non_null(out, "out")?;
        if !(0.0..=1.0).contains(&eta) {
            return Err(fail(FfStatus::InvalidArgument, format!("eta {eta} outside [0, 1]")));
        }
        *out = lib(lossy_success_polynomial(&(*device).device))?.eval(eta);
        Ok(())
    })
}

/// Compiles diagram JSON into a scheme.
///
/// # Safety
/// `diagram_json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ff_scheme_compile(
    diagram_json: *const c_char,
    out: *mut *mut FfScheme,
) -> FfStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = ptr::null_mut();
        let d = lib(ZXDiagram::from_json(text(diagram_json, "diagram_json")?))?;
        let scheme = lib(extract_scheme(&d))?;
        let metrics = lib(scheme_metrics(&scheme, &Boosting::new()))?;
        *out = Box::into_raw(Box::new(FfScheme { scheme, metrics }));
        Ok(())
    })
}

/// Loads a scheme file previously written by `ff_scheme_to_json` or the CLI.
///
/// # Safety
/// `scheme_json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ff_scheme_from_json(
    scheme_json: *const c_char,
    out: *mut *mut FfScheme,
) -> FfStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = ptr::null_mut();
        let scheme = lib(LOScheme::from_json(text(scheme_json, "scheme_json")?))?;
        let metrics = lib(scheme_metrics(&scheme, &Boosting::new()))?;
        *out = Box::into_raw(Box::new(FfScheme { scheme, metrics }));
        Ok(())
    })
}

/// # Safety
/// `scheme` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ff_scheme_free(scheme: *mut FfScheme) {
    if !scheme.is_null() {
        drop(Box::from_raw(scheme));
    }
}

/// Product of the device success probabilities.
///
/// # Safety
/// `scheme` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ff_scheme_success_probability(
    scheme: *const FfScheme,
    out: *mut FfProbability,
) -> FfStatus {
    guard(|| {
        non_null(scheme, "scheme")?;
        non_null(out, "out")?;
        *out = probability((*scheme).metrics.success_probability);
        Ok(())
    })
}

/// Seed photons plus auxiliary photons, and whether every loss is heralded.
///
/// # Safety
/// `scheme` must be a live handle; the out-pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn ff_scheme_resources(
    scheme: *const FfScheme,
    photons: *mut usize,
    fully_loss_detecting: *mut bool,
) -> FfStatus {
    guard(|| {
        non_null(scheme, "scheme")?;
        non_null(photons, "photons")?;
        non_null(fully_loss_detecting, "fully_loss_detecting")?;
        let m = &(*scheme).metrics;
        *photons = m.photon_count;
        *fully_loss_detecting = m.fully_loss_detecting;
        Ok(())
    })
}

/// Scheme JSON including metrics. Release the string with `ff_string_free`.
///
/// # Safety
/// `scheme` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ff_scheme_to_json(scheme: *const FfScheme, out: *mut *mut c_char) -> FfStatus {
    guard(|| {
        non_null(scheme, "scheme")?;
        non_null(out, "out")?;
        let s = &*scheme;
        let json = s.scheme.to_json(Some(&s.metrics));
        *out = CString::new(json)
            .map_err(|_| fail(FfStatus::Internal, "JSON contains NUL"))?
            .into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ff_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Simulates every success branch and compares the output with `target`:
/// `"ghz:N"`, `"ring:N"` or `"source"`. `max_photons` of 0 means 16.
///
/// # Safety
/// `scheme` must be a live handle, `target` a NUL-terminated string and
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ff_scheme_verify(
    scheme: *const FfScheme,
    target: *const c_char,
    max_photons: usize,
    out: *mut FfVerifyReport,
) -> FfStatus {
    guard(|| {
        non_null(scheme, "scheme")?;
        non_null(out, "out")?;
        let s = &(*scheme).scheme;
        let spec = text(target, "target")?;
        let bad = || fail(FfStatus::InvalidArgument, format!("bad target {spec:?}"));
        let size = |n: &str| n.parse::<usize>().ok().filter(|&n| (2..=12).contains(&n)).ok_or_else(bad);
        let state = match spec.split_once(':') {
            Some(("ghz", n)) => ghz_state(size(n)?),
            Some(("ring", n)) => {
                let n = size(n)?;
                graph_state(n, &ring_edges(n))
            }
            None if spec == "source" => {
                let d = s.source().ok_or_else(|| fail(FfStatus::InvalidArgument, "no source diagram"))?;
                lib(to_tensor(d))?
            }
            _ => return Err(bad()),
        };
        if state.len() != 1 << (s.input_count() + s.output_count()) {
            return Err(fail(FfStatus::InvalidArgument, "target size does not match the scheme"));
        }
        let opts = SimOptions {
            max_photons: if max_photons == 0 { 16 } else { max_photons },
            ..SimOptions::default()
        };
        let r = lib(verify_scheme(s, &state, &opts))?;
        *out = FfVerifyReport {
            passed: r.passed(),
            branches: r.branches,
            total_probability: r.total_probability,
            worst_fidelity: r.worst_fidelity,
        };
        Ok(())
    })
}
