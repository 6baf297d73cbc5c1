//! C ABI over the `eprb` library.
//!
//! Objects are opaque handles created by `eprb_*_new`/`eprb_*_from_*` and
//! released with the matching `_free`. Every fallible call returns an
//! [`EprbStatus`]; on failure `eprb_last_error()` describes what went wrong.
//! Strings returned through `char **` are owned by the caller and must be
//! released with [`eprb_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use eprb::analyze::{analyze, chsh_block, AnalysisReport};
use eprb::hv::{polytope_membership, MembershipReport};
use eprb::model::ModelConfig;
use eprb::simulate::{simulate, Schedule, SimConfig};
use eprb::table::{Outcome, Setting, Table};
use eprb::Error;

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EprbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Validation = 3,
    NoData = 4,
    Io = 5,
    Panic = 6,
}

/// Measurement settings; `A`/`A'` are on the left, `B`/`B'` on the right.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EprbSetting {
    A = 0,
    APrime = 1,
    B = 2,
    BPrime = 3,
}

/// Settings cross the boundary as plain ints holding an `EprbSetting` value.
fn setting(v: c_int) -> Result<Setting, (EprbStatus, String)> {
    match v {
        0 => Ok(Setting::A),
        1 => Ok(Setting::APrime),
        2 => Ok(Setting::B),
        3 => Ok(Setting::BPrime),
        _ => Err((EprbStatus::Validation, format!("setting code {v} out of range"))),
    }
}

/// Opaque model handle.
pub struct EprbModel(ModelConfig);

/// Opaque table handle.
pub struct EprbTable(Table);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: EprbStatus, msg: impl Into<String>) -> EprbStatus {
    set_error(msg.into());
    status
}

fn status_of(e: &Error) -> EprbStatus {
    match e {
        Error::Io(_) => EprbStatus::Io,
        Error::NoDataInContext(_) => EprbStatus::NoData,
        _ => EprbStatus::Validation,
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (EprbStatus, String)>) -> EprbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => EprbStatus::Ok,
        Ok(Err((s, m))) => fail(s, m),
        Err(_) => fail(EprbStatus::Panic, "internal panic"),
    }
}

trait Lift<T> {
    fn lift(self) -> Result<T, (EprbStatus, String)>;
}

impl<T> Lift<T> for eprb::Result<T> {
    fn lift(self) -> Result<T, (EprbStatus, String)> {
        self.map_err(|e| (status_of(&e), e.to_string()))
    }
}

impl<T> Lift<T> for serde_json::Result<T> {
    fn lift(self) -> Result<T, (EprbStatus, String)> {
        self.map_err(|e| (EprbStatus::Validation, format!("json: {e}")))
    }
}

unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, (EprbStatus, String)> {
    if p.is_null() {
        return Err((EprbStatus::NullPointer, "null string argument".into()));
    }
    CStr::from_ptr(p).to_str().map_err(|_| (EprbStatus::InvalidUtf8, "string argument is not UTF-8".into()))
}

unsafe fn deref<'a, T>(p: *const T) -> Result<&'a T, (EprbStatus, String)> {
    p.as_ref().ok_or_else(|| (EprbStatus::NullPointer, "null handle".into()))
}

unsafe fn put<T>(out: *mut T, value: T) -> Result<(), (EprbStatus, String)> {
    if out.is_null() {
        return Err((EprbStatus::NullPointer, "null output pointer".into()));
    }
    out.write(value);
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), (EprbStatus, String)> {
    let c = CString::new(s).map_err(|_| (EprbStatus::Validation, "interior nul in output".to_string()))?;
    put(out, c.into_raw())
}

fn outcome(v: c_int) -> Result<Outcome, (EprbStatus, String)> {
    Outcome::from_value(v as i64).lift()
}

/// Message for the last failed call on this thread, or NULL. Valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn eprb_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn eprb_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Model with angles (0, 90, 45, 135) degrees, alpha 0.5 and unit normalization.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn eprb_model_default(out: *mut *mut EprbModel) -> EprbStatus {
    guard(|| put(out, Box::into_raw(Box::new(EprbModel(ModelConfig::default())))))
}

/// Model from angles in degrees, ordered A, A', B, B'.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn eprb_model_new(
    angle_a: f64,
    angle_a_prime: f64,
    angle_b: f64,
    angle_b_prime: f64,
    alpha: f64,
    norm: f64,
    out: *mut *mut EprbModel,
) -> EprbStatus {
    guard(|| {
        let m = ModelConfig::from_degrees([angle_a, angle_a_prime, angle_b, angle_b_prime], alpha, norm).lift()?;
        put(out, Box::into_raw(Box::new(EprbModel(m))))
    })
}

/// Model from `key=value` config text.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn eprb_model_from_config(text: *const c_char, out: *mut *mut EprbModel) -> EprbStatus {
    guard(|| {
        let m: ModelConfig = read_str(text)?.parse::<ModelConfig>().lift()?;
        put(out, Box::into_raw(Box::new(EprbModel(m))))
    })
}

/// # Safety
/// `model` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn eprb_model_free(model: *mut EprbModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Analytic `P(j, k)` for the joint context `(c, c2)`; `j`, `k` are +1 or -1.
///
/// # Safety
/// `model` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn eprb_model_joint_prob(
    model: *const EprbModel,
    c: c_int,
    j: c_int,
    c2: c_int,
    k: c_int,
    out: *mut f64,
) -> EprbStatus {
    guard(|| {
        let m = deref(model)?;
        let p = m.0.joint_prob(setting(c)?, outcome(j)?, setting(c2)?, outcome(k)?).lift()?;
        put(out, p)
    })
}

/// Analytic correlation for the joint context `(c, c2)`.
///
/// # Safety
/// `model` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn eprb_model_correlation(
    model: *const EprbModel,
    c: c_int,
    c2: c_int,
    out: *mut f64,
) -> EprbStatus {
    guard(|| {
        let m = deref(model)?;
        put(out, m.0.correlation(setting(c)?, setting(c2)?).lift()?)
    })
}

/// Analytic CHSH block (fixed pattern, all eight variants, maximum) as JSON.
///
/// # Safety
/// `model` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn eprb_model_chsh_json(model: *const EprbModel, out: *mut *mut c_char) -> EprbStatus {
    guard(|| {
        let m = deref(model)?;
        let block = chsh_block(&m.0.correlation_quad()).lift()?;
        put_string(out, serde_json::to_string(&block).lift()?)
    })
}

/// Seeded Monte Carlo run. `schedule` is `"random"` or `"fixed:AB"` etc.;
/// `threads` of 0 uses the default pool.
///
/// # Safety
/// `model` must be a live handle, `schedule` a NUL-terminated string and
/// `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn eprb_simulate(
    model: *const EprbModel,
    runs: usize,
    seed: u64,
    schedule: *const c_char,
    threads: usize,
    out: *mut *mut EprbTable,
) -> EprbStatus {
    guard(|| {
        let cfg = SimConfig {
            model: deref(model)?.0.clone(),
            runs,
            seed,
            schedule: Schedule::parse(read_str(schedule)?).lift()?,
        };
        let sim = simulate(&cfg, (threads > 0).then_some(threads)).lift()?;
        put(out, Box::into_raw(Box::new(EprbTable(sim.table))))
    })
}

/// Table from runs-CSV text.
///
/// # Safety
/// `csv` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn eprb_table_from_csv(csv: *const c_char, out: *mut *mut EprbTable) -> EprbStatus {
    guard(|| {
        let t = Table::read_csv(read_str(csv)?.as_bytes()).lift()?;
        put(out, Box::into_raw(Box::new(EprbTable(t))))
    })
}

/// # Safety
/// `table` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn eprb_table_free(table: *mut EprbTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// Number of runs, or 0 for NULL.
///
/// # Safety
/// `table` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn eprb_table_len(table: *const EprbTable) -> usize {
    table.as_ref().map_or(0, |t| t.0.len())
}

/// Table as runs-CSV text.
///
/// # Safety
/// `table` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn eprb_table_to_csv(table: *const EprbTable, out: *mut *mut c_char) -> EprbStatus {
    guard(|| {
        let mut buf = Vec::new();
        deref(table)?.0.write_csv(&mut buf).lift()?;
        let s = String::from_utf8(buf).map_err(|_| (EprbStatus::InvalidUtf8, "csv output".to_string()))?;
        put_string(out, s)
    })
}

/// Full analysis report as JSON.
///
/// # Safety
/// `table` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn eprb_table_analyze_json(table: *const EprbTable, out: *mut *mut c_char) -> EprbStatus {
    guard(|| {
        let report = analyze(&deref(table)?.0).lift()?;
        put_string(out, serde_json::to_string(&report).lift()?)
    })
}

/// Polytope membership for the contextual tables of an analysis report.
/// Writes `{"feasible": ..., "witness": ..., "certificate": ...}`.
///
/// # Safety
/// `report_json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn eprb_polytope_json(report_json: *const c_char, out: *mut *mut c_char) -> EprbStatus {
    guard(|| {
        let report: AnalysisReport = serde_json::from_str(read_str(report_json)?).lift()?;
        let m = polytope_membership(&report.context_tables().lift()?).lift()?;
        put_string(out, serde_json::to_string(&MembershipReport::from(&m)).lift()?)
    })
}
