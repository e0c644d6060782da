//! C interface to `shearlift`.
//!
//! Every fallible function returns an [`SlStatus`]; on failure the message is
//! kept per thread and can be copied out with [`sl_last_error`]. Handles are
//! opaque and must be released with their `_free` function. Panics never
//! cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use shearlift::cli::{resolve_lift, verify_report};
use shearlift::config::RunConfig;
use shearlift::cr::{verify_structure_equation, CrPoint};
use shearlift::curvature::{Spacetime, Verdict};
use shearlift::lift::{LiftProfile, MetricField};
use shearlift::potential::{Potential, PotentialKind};
use shearlift::Error;

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Domain = 4,
    GuardBand = 5,
    Solver = 6,
    Numeric = 7,
    Io = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SlVerdict {
    Einstein = 0,
    QuasiEinstein = 1,
    Fail = 2,
}

/// CR data of a potential at one point of the `z`-plane.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SlCrData {
    pub fzzbar: f64,
    pub c_re: f64,
    pub c_im: f64,
    /// Ricci scalar of the Kähler quotient.
    pub ricci: f64,
    pub structure_residual: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlVerifySummary {
    pub verdict: SlVerdict,
    pub lambda_fit: f64,
    pub pattern_residual: f64,
    pub max_phi: f64,
    pub min_psi2: f64,
    pub max_shearfree_residual: f64,
}

/// A solved lift: the metric field plus the run configuration it came from.
pub struct SlLift {
    config: RunConfig,
    field: MetricField,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(err: &Error) -> SlStatus {
    match err {
        Error::Config(_) | Error::Syntax { .. } | Error::UnknownIdentifier { .. } => SlStatus::Config,
        Error::OutsideDomain { .. }
        | Error::NotPseudoconvex { .. }
        | Error::Singular(_)
        | Error::Gauge(_)
        | Error::Profile(_) => SlStatus::Domain,
        Error::GuardBand { .. } => SlStatus::GuardBand,
        Error::Solver { .. } => SlStatus::Solver,
        Error::DegenerateMetric(_) => SlStatus::Numeric,
        Error::Io(_) => SlStatus::Io,
    }
}

/// Runs `f`, recording errors and panics.
fn guard(f: impl FnOnce() -> Result<(), (SlStatus, String)>) -> SlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            SlStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            SlStatus::Panic
        }
    }
}

fn lib(err: Error) -> (SlStatus, String) {
    (status_of(&err), err.to_string())
}

fn null(what: &str) -> (SlStatus, String) {
    (SlStatus::NullPointer, format!("`{what}` is null"))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, (SlStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (SlStatus::InvalidArgument, format!("`{what}` is not valid UTF-8")))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the calling thread's last error message into `buf` (NUL-terminated,
/// truncated to `len`) and returns the full message length excluding the NUL.
/// Returns 0 when the last call succeeded. `buf` may be null to query the length.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn sl_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else {
            if !buf.is_null() && len > 0 {
                *buf = 0;
            }
            return 0;
        };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// CR data at `(x, y)`. `kind` is a catalog name or `"custom"`; `expr` is the
/// potential expression for custom and harmonic/tubular kinds and may be null.
///
/// # Safety
/// `kind` must be a NUL-terminated string, `expr` null or NUL-terminated, and
/// `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sl_cr_data(kind: *const c_char, expr: *const c_char, x: f64, y: f64, out: *mut SlCrData) -> SlStatus {
    guard(|| {
        let kind = read_str(kind, "kind")?;
        let expr = if expr.is_null() { None } else { Some(read_str(expr, "expr")?) };
        if out.is_null() {
            return Err(null("out"));
        }
        let kind = PotentialKind::from_name(kind)
            .ok_or_else(|| (SlStatus::InvalidArgument, format!("unknown potential kind `{kind}`")))?;
        let p = Potential::from_kind(kind, expr, None).map_err(lib)?;
        let pt = CrPoint::new(&p, x, y).map_err(lib)?;
        let res = verify_structure_equation(&p, x, y).map_err(lib)?;
        *out = SlCrData { fzzbar: pt.fzzbar(), c_re: pt.c.re, c_im: pt.c.im, ricci: pt.ricci, structure_residual: res };
        Ok(())
    })
}

/// Resolves the conformal factor for a TOML run configuration and returns a
/// lift handle in `*out`.
///
/// # Safety
/// `config_toml` must be NUL-terminated and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sl_lift_new(config_toml: *const c_char, out: *mut *mut SlLift) -> SlStatus {
    guard(|| {
        let text = read_str(config_toml, "config_toml")?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let config = RunConfig::from_toml(text).map_err(lib)?;
        let lift = resolve_lift(&config).map_err(lib)?;
        let field = lift.profile.metric_field();
        *out = Box::into_raw(Box::new(SlLift { config, field }));
        Ok(())
    })
}

/// Releases a lift handle; null is ignored.
///
/// # Safety
/// `lift` must come from [`sl_lift_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sl_lift_free(lift: *mut SlLift) {
    if !lift.is_null() {
        drop(Box::from_raw(lift));
    }
}

unsafe fn lift_ref<'a>(lift: *const SlLift) -> Result<&'a SlLift, (SlStatus, String)> {
    lift.as_ref().ok_or_else(|| null("lift"))
}

fn profile(l: &SlLift) -> &LiftProfile {
    l.field.profile()
}

/// Metric components at `coords = (x, y, u, r)`, row-major into `out[16]`.
///
/// # Safety
/// `coords` must point to 4 doubles and `out` to 16 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn sl_lift_metric(lift: *const SlLift, coords: *const f64, out: *mut f64) -> SlStatus {
    guard(|| {
        let l = lift_ref(lift)?;
        if coords.is_null() {
            return Err(null("coords"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let c = [*coords, *coords.add(1), *coords.add(2), *coords.add(3)];
        let g = l.field.metric(c).map_err(lib)?;
        for (i, row) in g.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                *out.add(4 * i + j) = *v;
            }
        }
        Ok(())
    })
}

/// The conformal factor `p` at `(x, y)`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sl_lift_p(lift: *const SlLift, x: f64, y: f64, out: *mut f64) -> SlStatus {
    guard(|| {
        let l = lift_ref(lift)?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = profile(l).point(x, y).map_err(lib)?.p_value();
        Ok(())
    })
}

/// The cosmological constant of the lift.
///
/// # Safety
/// `lift` must be a valid handle or null (which yields NaN).
#[no_mangle]
pub unsafe extern "C" fn sl_lift_lambda(lift: *const SlLift) -> f64 {
    lift.as_ref().map_or(f64::NAN, |l| profile(l).lambda())
}

/// Runs the verification pipeline for the lift's configuration. When
/// `report_json` is non-null it receives the full report, to be released
/// with [`sl_string_free`]. A `fail` verdict is still `SL_STATUS_OK`.
///
/// # Safety
/// `summary` must be valid; `report_json` null or valid.
#[no_mangle]
pub unsafe extern "C" fn sl_lift_verify(lift: *const SlLift, summary: *mut SlVerifySummary, report_json: *mut *mut c_char) -> SlStatus {
    guard(|| {
        let l = lift_ref(lift)?;
        if summary.is_null() {
            return Err(null("summary"));
        }
        let rep = verify_report(&l.config).map_err(lib)?;
        *summary = SlVerifySummary {
            verdict: match rep.verdict {
                Verdict::Einstein => SlVerdict::Einstein,
                Verdict::QuasiEinstein => SlVerdict::QuasiEinstein,
                Verdict::Fail => SlVerdict::Fail,
            },
            lambda_fit: rep.curvature.lambda_fit,
            pattern_residual: rep.curvature.pattern_residual,
            max_phi: rep.curvature.max_phi,
            min_psi2: rep.curvature.min_psi2,
            max_shearfree_residual: rep.shearfree.max_residual,
        };
        if !report_json.is_null() {
            let json = rep.to_json().map_err(lib)?;
            *report_json = CString::new(json).map_err(|e| (SlStatus::Numeric, e.to_string()))?.into_raw();
        }
        Ok(())
    })
}

/// Releases a string returned by this library; null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
