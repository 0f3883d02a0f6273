//! C ABI over `morphsynth`.
//!
//! Conventions:
//! * every fallible call returns an [`MsStatus`] and writes results through
//!   out-pointers only on `MS_STATUS_OK`;
//! * the message of the last failure on the calling thread is available from
//!   [`ms_last_error_message`];
//! * strings returned through out-pointers are owned by the caller and must be
//!   released with [`ms_string_free`]; handles with their own `_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use morphsynth::aggregation::{extend_kernel, subsolution, supersolution, AggregationDocument, SolutionSet};
use morphsynth::choice::{solve, ChoiceInstance};
use morphsynth::estimates::{
    dominates, generalized_median, multiset_coefficient, parse_estimate_list, proximity, set_median, Dominance,
    EstimateError, MultisetEstimate,
};
use morphsynth::improvement::{find_bottlenecks, plan_from_document, ActionsDocument};
use morphsynth::model::{builtin_dataset, parse_model, MorphModel};
use morphsynth::synthesis::{bottom_up, synthesize_component};
use morphsynth::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// Malformed or inconsistent input; see the last error message.
    InvalidInput = 3,
    /// No selection fits the budget.
    Infeasible = 4,
    /// A result does not fit the output type.
    Overflow = 5,
    /// The library panicked; the handle arguments are still valid.
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MsDominance {
    Better = 0,
    Worse = 1,
    Equal = 2,
    Incomparable = 3,
}

/// Opaque multiset estimate.
pub struct MsEstimate(MultisetEstimate);

/// Opaque morphological model.
pub struct MsModel(MorphModel);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Fail(MsStatus, String);

impl<E: Into<Error>> From<E> for Fail {
    fn from(e: E) -> Self {
        let e = e.into();
        let status = if e.name().ends_with("::Infeasible") {
            MsStatus::Infeasible
        } else {
            MsStatus::InvalidInput
        };
        Fail(status, format!("{}: {e}", e.name()))
    }
}

fn null(what: &str) -> Fail {
    Fail(MsStatus::NullPointer, format!("{what} is null"))
}

/// Runs `body`, recording failures and containing panics.
fn guard(body: impl FnOnce() -> Result<(), Fail>) -> MsStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => MsStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            MsStatus::Panic
        }
    }
}

/// # Safety
/// `p` is null or a valid NUL-terminated string.
unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(MsStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

/// # Safety
/// `p` is null or a valid NUL-terminated string.
unsafe fn opt_text<'a>(p: *const c_char, what: &str) -> Result<Option<&'a str>, Fail> {
    if p.is_null() {
        Ok(None)
    } else {
        text(p, what).map(Some)
    }
}

/// # Safety
/// `out` is null or valid for a write.
unsafe fn write<T>(out: *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

fn c_string(s: String) -> Result<*mut c_char, Fail> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Fail(MsStatus::InvalidInput, "output contains a NUL byte".into()))
}

fn json<T: serde::Serialize>(v: &T) -> Result<*mut c_char, Fail> {
    let s = serde_json::to_string(v).map_err(|e| Fail(MsStatus::InvalidInput, e.to_string()))?;
    c_string(s)
}

fn bad_json(e: serde_json::Error) -> Fail {
    Fail(MsStatus::InvalidInput, format!("SchemaError: {e}"))
}

/// Message of the last failure on this thread, or null. Valid until the next
/// failing call on the same thread; do not free.
#[no_mangle]
pub extern "C" fn ms_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` is null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ms_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Number of multisets of `eta` elements over `l` levels.
///
/// # Safety
/// `out` is valid for a write.
#[no_mangle]
pub unsafe extern "C" fn ms_multiset_coefficient(l: usize, eta: usize, out: *mut u64) -> MsStatus {
    guard(|| {
        let v = multiset_coefficient(l, eta).map_err(|e| match e {
            EstimateError::Overflow { .. } => Fail(MsStatus::Overflow, "multiset coefficient overflows u64".into()),
            other => Fail::from(other),
        })?;
        write(out, v)
    })
}

/// Parses `"(2,1,0,0)"` into a new handle.
///
/// # Safety
/// `s` is a NUL-terminated string; `out` is valid for a write.
#[no_mangle]
pub unsafe extern "C" fn ms_estimate_parse(s: *const c_char, out: *mut *mut MsEstimate) -> MsStatus {
    guard(|| {
        let e: MultisetEstimate = text(s, "estimate")?.parse()?;
        write(out, Box::into_raw(Box::new(MsEstimate(e))))
    })
}

/// # Safety
/// `e` is null or a handle from [`ms_estimate_parse`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ms_estimate_free(e: *mut MsEstimate) {
    if !e.is_null() {
        drop(Box::from_raw(e));
    }
}

/// # Safety
/// `e` is a live handle; `out` is valid for a write.
#[no_mangle]
pub unsafe extern "C" fn ms_estimate_to_string(e: *const MsEstimate, out: *mut *mut c_char) -> MsStatus {
    guard(|| {
        let e = e.as_ref().ok_or_else(|| null("estimate"))?;
        write(out, c_string(e.0.to_string())?)
    })
}

/// Poset relation of `a` to `b`.
///
/// # Safety
/// `a`, `b` are live handles; `out` is valid for a write.
#[no_mangle]
pub unsafe extern "C" fn ms_estimate_dominates(
    a: *const MsEstimate,
    b: *const MsEstimate,
    out: *mut MsDominance,
) -> MsStatus {
    guard(|| {
        let a = a.as_ref().ok_or_else(|| null("a"))?;
        let b = b.as_ref().ok_or_else(|| null("b"))?;
        let d = match dominates(&a.0, &b.0)? {
            Dominance::Better => MsDominance::Better,
            Dominance::Worse => MsDominance::Worse,
            Dominance::Equal => MsDominance::Equal,
            Dominance::Incomparable => MsDominance::Incomparable,
        };
        write(out, d)
    })
}

/// Improvement (`minus`) and degradation (`plus`) steps turning `a` into `b`.
///
/// # Safety
/// `a`, `b` are live handles; both out-pointers are valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ms_estimate_proximity(
    a: *const MsEstimate,
    b: *const MsEstimate,
    minus: *mut u64,
    plus: *mut u64,
) -> MsStatus {
    guard(|| {
        let a = a.as_ref().ok_or_else(|| null("a"))?;
        let b = b.as_ref().ok_or_else(|| null("b"))?;
        if minus.is_null() || plus.is_null() {
            return Err(null("output pointer"));
        }
        let d = proximity(&a.0, &b.0)?;
        write(minus, d.minus)?;
        write(plus, d.plus)
    })
}

/// Medians of `";"`-separated estimates as `{"generalized": .., "set": ..}`.
///
/// # Safety
/// `estimates` is a NUL-terminated string; `out` is valid for a write.
#[no_mangle]
pub unsafe extern "C" fn ms_median_json(estimates: *const c_char, out: *mut *mut c_char) -> MsStatus {
    guard(|| {
        let list = parse_estimate_list(text(estimates, "estimates")?)?;
        let scale = list.first().ok_or(EstimateError::EmptyInput)?.scale();
        let general = generalized_median(&list, scale)?;
        let set = set_median(&list)?;
        write(out, json(&serde_json::json!({ "generalized": general, "set": set }))?)
    })
}

/// # Safety
/// `doc` is a NUL-terminated JSON model; `out` is valid for a write.
#[no_mangle]
pub unsafe extern "C" fn ms_model_parse(doc: *const c_char, out: *mut *mut MsModel) -> MsStatus {
    guard(|| {
        let m = parse_model(text(doc, "model")?)?;
        write(out, Box::into_raw(Box::new(MsModel(m))))
    })
}

/// The embedded on-board telemetry model.
///
/// # Safety
/// `out` is valid for a write.
#[no_mangle]
pub unsafe extern "C" fn ms_model_builtin(out: *mut *mut MsModel) -> MsStatus {
    guard(|| write(out, Box::into_raw(Box::new(MsModel(builtin_dataset())))))
}

/// # Safety
/// `m` is null or a model handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ms_model_free(m: *mut MsModel) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// # Safety
/// `m` is a live handle; `out` is valid for a write.
#[no_mangle]
pub unsafe extern "C" fn ms_model_design_space_size(m: *const MsModel, out: *mut u64) -> MsStatus {
    guard(|| {
        let m = m.as_ref().ok_or_else(|| null("model"))?;
        let n = u64::try_from(m.0.design_space_size())
            .map_err(|_| Fail(MsStatus::Overflow, "design space exceeds u64".into()))?;
        write(out, n)
    })
}

/// Pareto fronts as a JSON array: every composite when `component` is null,
/// otherwise just that composite.
///
/// # Safety
/// `m` is a live handle; `component` is null or NUL-terminated; `out` is
/// valid for a write.
#[no_mangle]
pub unsafe extern "C" fn ms_synthesize_json(
    m: *const MsModel,
    component: *const c_char,
    out: *mut *mut c_char,
) -> MsStatus {
    guard(|| {
        let m = m.as_ref().ok_or_else(|| null("model"))?;
        let fronts = match opt_text(component, "component")? {
            Some(c) => vec![synthesize_component(&m.0, c)?],
            None => bottom_up(&m.0)?.fronts.into_values().collect(),
        };
        write(out, json(&fronts)?)
    })
}

/// Solves a choice instance `{scale, budget, groups}`; JSON array of results.
///
/// # Safety
/// `instance` is NUL-terminated; `out` is valid for a write.
#[no_mangle]
pub unsafe extern "C" fn ms_choice_solve_json(instance: *const c_char, out: *mut *mut c_char) -> MsStatus {
    guard(|| {
        let inst = ChoiceInstance::parse(text(instance, "instance")?)?;
        write(out, json(&solve(&inst)?)?)
    })
}

/// Bottlenecks and improvement plan. `actions` null selects the bundled
/// actions; `budget` null uses the document budget.
///
/// # Safety
/// `m` is a live handle; `actions` is null or NUL-terminated; `budget` is null
/// or readable; `out` is valid for a write.
#[no_mangle]
pub unsafe extern "C" fn ms_improve_json(
    m: *const MsModel,
    actions: *const c_char,
    budget: *const f64,
    out: *mut *mut c_char,
) -> MsStatus {
    guard(|| {
        let m = m.as_ref().ok_or_else(|| null("model"))?;
        let doc = match opt_text(actions, "actions")? {
            Some(t) => serde_json::from_str::<ActionsDocument>(t).map_err(bad_json)?,
            None => ActionsDocument::builtin(),
        };
        let plan = plan_from_document(&m.0, &doc, budget.as_ref().copied())?;
        let bottlenecks = find_bottlenecks(&m.0, &plan.before)?;
        write(
            out,
            json(&serde_json::json!({ "bottlenecks": bottlenecks, "plan": plan }))?,
        )
    })
}

/// Supersolution, kernel and kernel extension for
/// `{solutions, candidates, budget}`. `doc` null selects the bundled data;
/// `budget` null uses the document budget.
///
/// # Safety
/// `doc` is null or NUL-terminated; `budget` is null or readable; `out` is
/// valid for a write.
#[no_mangle]
pub unsafe extern "C" fn ms_aggregate_json(doc: *const c_char, budget: *const f64, out: *mut *mut c_char) -> MsStatus {
    guard(|| {
        let doc = match opt_text(doc, "document")? {
            Some(t) => serde_json::from_str::<AggregationDocument>(t).map_err(bad_json)?,
            None => AggregationDocument::builtin(),
        };
        let budget = budget
            .as_ref()
            .copied()
            .or(doc.budget)
            .ok_or_else(|| Fail(MsStatus::InvalidInput, "no budget given".into()))?;
        let set = SolutionSet::new(doc.solutions)?;
        let kernel = subsolution(&set);
        let result = extend_kernel(&kernel, &doc.candidates, budget)?;
        write(
            out,
            json(&serde_json::json!({
                "supersolution": supersolution(&set),
                "kernel": kernel,
                "aggregate": result,
            }))?,
        )
    })
}
