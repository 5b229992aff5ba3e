//! C ABI over `otr-bounds`.
//!
//! Every function returns an [`OtrStatus`]; results go through out-pointers.
//! On failure, [`otr_last_error_message`] describes the most recent error on
//! the calling thread. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use otr_bounds::benefit::{benefit_bounds_binary, benefit_bounds_lp, benefit_upper_closed};
use otr_bounds::error::Error;
use otr_bounds::heterogeneity::{het_bounds_bounded, het_bounds_general};
use otr_bounds::inference::{
    ci_benefit_lp, ci_heterogeneity, normal_quantile, ucb_benefit_closed, MeanSeConvention,
    MomentSet,
};
use otr_bounds::io::cli::{analyze_document, Analysis};
use otr_bounds::io::parse_study;
use otr_bounds::model::{
    normalize_direction, require_valid, structural_diagnostics, ArmSummary, Direction, Interval,
    OutcomeSpace, TrialSummary,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OtrStatus {
    Ok = 0,
    InvalidInput = 1,
    ZeroControlVariance = 2,
    UnsupportedSpace = 3,
    Infeasible = 4,
    DomainError = 5,
    MissingMoments = 6,
    Numerical = 7,
    NullPointer = 8,
    InvalidUtf8 = 9,
    Panic = 10,
}

/// Values accepted for the `space_kind` argument of [`otr_trial_new`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OtrSpaceKind {
    Unbounded = 0,
    Range = 1,
    Finite = 2,
    Binary = 3,
}

/// Values accepted for the `direction` argument of [`otr_trial_new`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OtrDirection {
    HigherBetter = 0,
    LowerBetter = 1,
}

/// Values accepted for the `mean_se` argument of [`otr_ci_benefit_lp`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OtrMeanSe {
    Standard = 0,
    AsPrinted = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OtrArm {
    pub n: u64,
    pub mean: f64,
    pub variance: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OtrInterval {
    pub lower: f64,
    pub upper: f64,
}

/// Opaque trial handle.
pub struct OtrTrial {
    trial: TrialSummary,
    /// Exact moments when the trial came from a document with individual outcomes.
    moments: Option<MomentSet>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure {
    status: OtrStatus,
    message: String,
}

impl Failure {
    fn new(status: OtrStatus, message: impl Into<String>) -> Self {
        Failure { status, message: message.into() }
    }
}

fn status_of(err: &Error) -> OtrStatus {
    match err {
        Error::InvalidInput(_) | Error::Parse { .. } | Error::DimensionTooLarge { .. } => {
            OtrStatus::InvalidInput
        }
        Error::ZeroControlVariance => OtrStatus::ZeroControlVariance,
        Error::UnsupportedSpace { .. } => OtrStatus::UnsupportedSpace,
        Error::InfeasibleSummaries { .. } | Error::InfeasibleWidenedLp(_) => OtrStatus::Infeasible,
        Error::DomainError(_) => OtrStatus::DomainError,
        Error::MissingMoments(_) => OtrStatus::MissingMoments,
        Error::MalformedLp(_)
        | Error::MaxIterationsExceeded { .. }
        | Error::DegenerateDenominator
        | Error::Numerical(_) => OtrStatus::Numerical,
        Error::Strata(inner) => inner.first().map_or(OtrStatus::InvalidInput, |(_, e)| status_of(e)),
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        Failure::new(status_of(&err), err.to_string())
    }
}

fn set_last_error(message: Option<String>) {
    let c = message.map(|m| CString::new(m.replace('\0', " ")).expect("nul bytes removed"));
    LAST_ERROR.with(|slot| *slot.borrow_mut() = c);
}

/// Run `body`, translating errors and panics into a status code.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> OtrStatus {
    let outcome = catch_unwind(AssertUnwindSafe(body)).unwrap_or_else(|payload| {
        let message = payload
            .downcast_ref::<&str>()
            .map(|s| s.to_string())
            .or_else(|| payload.downcast_ref::<String>().cloned())
            .unwrap_or_else(|| "unknown panic".into());
        Err(Failure::new(OtrStatus::Panic, format!("internal panic: {message}")))
    });
    match outcome {
        Ok(()) => {
            set_last_error(None);
            OtrStatus::Ok
        }
        Err(f) => {
            set_last_error(Some(f.message));
            f.status
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| Failure::new(OtrStatus::NullPointer, format!("{name} is null")))
}

unsafe fn write<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::new(OtrStatus::NullPointer, "output pointer is null"));
    }
    out.write(value);
    Ok(())
}

unsafe fn c_str<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::new(OtrStatus::NullPointer, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Failure::new(OtrStatus::InvalidUtf8, format!("{name}: {e}")))
}

fn interval(iv: &Interval) -> OtrInterval {
    OtrInterval { lower: iv.lower, upper: iv.upper }
}

fn handle(trial: TrialSummary, moments: Option<MomentSet>) -> *mut OtrTrial {
    Box::into_raw(Box::new(OtrTrial { trial, moments }))
}

/// Build a trial from arm summaries.
///
/// `space_kind` is an [`OtrSpaceKind`]; `values`/`len` are read for finite
/// supports and `min`/`max` for ranges. `direction` is an [`OtrDirection`].
/// Free the result with [`otr_trial_free`].
///
/// # Safety
/// Pointers must be null or valid; `values` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn otr_trial_new(
    control: *const OtrArm,
    treatment: *const OtrArm,
    space_kind: c_int,
    values: *const f64,
    len: usize,
    min: f64,
    max: f64,
    direction: c_int,
    out: *mut *mut OtrTrial,
) -> OtrStatus {
    guard(|| {
        let (c, t) = (deref(control, "control")?, deref(treatment, "treatment")?);
        let space = match space_kind {
            0 => OutcomeSpace::Unbounded,
            1 => OutcomeSpace::BoundedRange { min, max },
            2 => {
                if values.is_null() {
                    return Err(Failure::new(OtrStatus::NullPointer, "values is null"));
                }
                OutcomeSpace::FiniteSupport { values: std::slice::from_raw_parts(values, len).to_vec() }
            }
            3 => OutcomeSpace::Binary,
            k => return Err(Failure::new(OtrStatus::InvalidInput, format!("unknown space kind {k}"))),
        };
        let direction = match direction {
            0 => Direction::HigherBetter,
            1 => Direction::LowerBetter,
            d => return Err(Failure::new(OtrStatus::InvalidInput, format!("unknown direction {d}"))),
        };
        let arm = |a: &OtrArm| ArmSummary { n: a.n, mean: a.mean, variance: a.variance };
        let trial = TrialSummary::new(arm(c), arm(t), space, direction);
        require_valid(structural_diagnostics(&trial))?;
        write(out, handle(trial, None))
    })
}

/// Build a trial from a study document (JSON). Stratified documents yield
/// their marginal trial.
///
/// # Safety
/// `json` must be a valid NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn otr_trial_from_json(json: *const c_char, out: *mut *mut OtrTrial) -> OtrStatus {
    guard(|| {
        let study = parse_study(c_str(json, "json")?.as_bytes())?;
        write(out, handle(study.trial, study.moments))
    })
}

/// # Safety
/// `trial` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn otr_trial_free(trial: *mut OtrTrial) {
    if !trial.is_null() {
        drop(Box::from_raw(trial));
    }
}

/// var(Y¹ − Y⁰) bounds from standard deviations alone.
///
/// # Safety
/// `trial` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn otr_het_bounds_general(trial: *const OtrTrial, out: *mut OtrInterval) -> OtrStatus {
    guard(|| write(out, interval(&het_bounds_general(&deref(trial, "trial")?.trial)?.interval)))
}

/// var(Y¹ − Y⁰) bounds using the outcome range.
///
/// # Safety
/// `trial` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn otr_het_bounds_bounded(trial: *const OtrTrial, out: *mut OtrInterval) -> OtrStatus {
    guard(|| write(out, interval(&het_bounds_bounded(&deref(trial, "trial")?.trial)?.interval)))
}

/// Sharp benefit bounds by linear programming.
///
/// # Safety
/// `trial` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn otr_benefit_bounds_lp(
    trial: *const OtrTrial,
    relax_eps: f64,
    out: *mut OtrInterval,
) -> OtrStatus {
    guard(|| {
        let b = benefit_bounds_lp(&deref(trial, "trial")?.trial, relax_eps)?;
        write(out, interval(&b.interval))
    })
}

/// Closed-form benefit bounds for binary outcomes.
///
/// # Safety
/// `trial` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn otr_benefit_bounds_binary(trial: *const OtrTrial, out: *mut OtrInterval) -> OtrStatus {
    guard(|| write(out, interval(&benefit_bounds_binary(&deref(trial, "trial")?.trial)?.interval)))
}

/// Closed-form upper bound on the benefit.
///
/// # Safety
/// `trial` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn otr_benefit_upper_closed(trial: *const OtrTrial, out: *mut f64) -> OtrStatus {
    guard(|| write(out, benefit_upper_closed(&deref(trial, "trial")?.trial)?))
}

fn moments_and_space(t: &OtrTrial) -> Result<(MomentSet, OutcomeSpace), Failure> {
    let moments = match t.moments {
        Some(m) => m,
        None => MomentSet::from_trial(&t.trial)?,
    };
    Ok((moments, normalize_direction(&t.trial).space))
}

/// Two-sided 1 − α interval for the var(Y¹ − Y⁰) bounds.
///
/// # Safety
/// `trial` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn otr_ci_heterogeneity(
    trial: *const OtrTrial,
    alpha: f64,
    out: *mut OtrInterval,
) -> OtrStatus {
    guard(|| {
        let (m, space) = moments_and_space(deref(trial, "trial")?)?;
        write(out, interval(&ci_heterogeneity(&m, &space, alpha)?.interval))
    })
}

/// One-sided 1 − α upper confidence bound for the closed-form benefit bound.
///
/// # Safety
/// `trial` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn otr_ucb_benefit_closed(trial: *const OtrTrial, alpha: f64, out: *mut f64) -> OtrStatus {
    guard(|| {
        let (m, space) = moments_and_space(deref(trial, "trial")?)?;
        write(out, ucb_benefit_closed(&m, &space, alpha)?.interval.upper)
    })
}

/// 1 − α confidence interval for the LP benefit bounds. `mean_se` is an [`OtrMeanSe`].
///
/// # Safety
/// `trial` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn otr_ci_benefit_lp(
    trial: *const OtrTrial,
    alpha: f64,
    mean_se: c_int,
    out: *mut OtrInterval,
) -> OtrStatus {
    guard(|| {
        let convention = match mean_se {
            0 => MeanSeConvention::Standard,
            1 => MeanSeConvention::AsPrinted,
            c => return Err(Failure::new(OtrStatus::InvalidInput, format!("unknown mean_se {c}"))),
        };
        let (m, space) = moments_and_space(deref(trial, "trial")?)?;
        write(out, interval(&ci_benefit_lp(&m, &space, alpha, convention)?.interval))
    })
}

/// Inverse standard normal CDF.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn otr_normal_quantile(p: f64, out: *mut f64) -> OtrStatus {
    guard(|| write(out, normal_quantile(p)?))
}

/// Run a command-line analysis (`heterogeneity`, `benefit`, `benefit-lp`,
/// `ci` or `validate`) on a study document and return the machine report as
/// JSON. Analysis failures are reported inside the document (its `exit_code`
/// and `diagnostics`), so the status is `OTR_STATUS_OK` whenever a report
/// was produced. Free the string with [`otr_string_free`].
///
/// # Safety
/// `command` and `json` must be valid NUL-terminated strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn otr_run_json(
    command: *const c_char,
    json: *const c_char,
    out: *mut *mut c_char,
) -> OtrStatus {
    guard(|| {
        let name = c_str(command, "command")?;
        let analysis = Analysis::from_name(name)
            .ok_or_else(|| Failure::new(OtrStatus::InvalidInput, format!("unknown command {name:?}")))?;
        let report = analyze_document(analysis, c_str(json, "json")?.as_bytes());
        let text = CString::new(report.to_machine()).expect("JSON output has no NUL bytes");
        write(out, text.into_raw())
    })
}

/// # Safety
/// `s` must come from [`otr_run_json`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn otr_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message for the last failed call on this thread, or NULL after a success.
/// Valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn otr_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn otr_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
