//! C ABI over `qlb`.
//!
//! Objects are opaque handles created by `*_new`/`*_load`/`*_solve` functions
//! and released with the matching `*_free`. Every fallible call returns a
//! [`QlbStatus`]; on failure `qlb_last_error()` describes the cause until the
//! next failing call on the same thread. Panics are caught and reported as
//! `QLB_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qlb::dataset::{gen_lasso_hidden, gen_ridge_hidden, NormRegime, SampleSet};
use qlb::frank_wolfe::{lasso_solve, ridge_solve_baseline, SolveMode, SolveReport};
use qlb::kp_tree::KpTree;
use qlb::quantum::EmulatorConfig;
use qlb::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QlbStatus {
    Ok = 0,
    InvalidParameter = 1,
    DimensionMismatch = 2,
    IndexOutOfRange = 3,
    Precondition = 4,
    Csv = 5,
    Io = 6,
    Solver = 7,
    Json = 8,
    NullPointer = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QlbRegime {
    Linf = 0,
    L2 = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QlbMode {
    Classical = 0,
    /// Emulated quantum subroutines with the default constants.
    Quantum = 1,
}

/// Charged oracle queries.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct QlbLedger {
    pub q_x: u64,
    pub q_y: u64,
    pub q_tree: u64,
    pub gates: u64,
}

/// Opaque KP-tree.
pub struct QlbTree(KpTree);

/// Opaque sample set.
pub struct QlbSamples(SampleSet);

/// Opaque solver report.
pub struct QlbReport(SolveReport);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> QlbStatus {
    match e {
        Error::InvalidParameter { .. } => QlbStatus::InvalidParameter,
        Error::DimensionMismatch { .. } => QlbStatus::DimensionMismatch,
        Error::IndexOutOfRange { .. } => QlbStatus::IndexOutOfRange,
        Error::Precondition(_) => QlbStatus::Precondition,
        Error::Csv { .. } => QlbStatus::Csv,
        Error::Io(_) => QlbStatus::Io,
        Error::Solver { .. } => QlbStatus::Solver,
        Error::Json(_) => QlbStatus::Json,
    }
}

/// Runs `f`, converting errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), (QlbStatus, String)>) -> QlbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QlbStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("panic inside qlb");
            QlbStatus::Panic
        }
    }
}

fn lib<T>(r: qlb::Result<T>) -> Result<T, (QlbStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(name: &str) -> (QlbStatus, String) {
    (QlbStatus::NullPointer, format!("`{name}` is null"))
}

unsafe fn deref<'a, T>(p: *const T, name: &str) -> Result<&'a T, (QlbStatus, String)> {
    p.as_ref().ok_or_else(|| null(name))
}

unsafe fn deref_mut<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, (QlbStatus, String)> {
    p.as_mut().ok_or_else(|| null(name))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), (QlbStatus, String)> {
    let slot = deref_mut(out, "out")?;
    *slot = Box::into_raw(Box::new(value));
    Ok(())
}

/// Message of the last failing call on this thread. Valid until the next
/// failing call; never null.
#[no_mangle]
pub extern "C" fn qlb_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn qlb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Frees a string returned by this library.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn qlb_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

// KP-tree

/// An all-zero tree over `d` coordinates.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qlb_tree_new(d: usize, out: *mut *mut QlbTree) -> QlbStatus {
    guard(|| put(out, QlbTree(lib(KpTree::new_zero(d))?)))
}

/// # Safety
/// `tree` must come from `qlb_tree_new` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn qlb_tree_free(tree: *mut QlbTree) {
    if !tree.is_null() {
        drop(Box::from_raw(tree));
    }
}

/// `theta <- a * theta + b * e_j`.
///
/// # Safety
/// `tree` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn qlb_tree_update(tree: *mut QlbTree, a: f64, b: f64, j: usize) -> QlbStatus {
    guard(|| lib(deref_mut(tree, "tree")?.0.update(a, b, j)))
}

/// # Safety
/// `tree` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn qlb_tree_read(tree: *const QlbTree, j: usize, out: *mut f64) -> QlbStatus {
    guard(|| {
        let v = lib(deref(tree, "tree")?.0.read_entry(j))?;
        *deref_mut(out, "out")? = v;
        Ok(())
    })
}

/// Dimension of the tree, or 0 for a null handle.
///
/// # Safety
/// `tree` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qlb_tree_dim(tree: *const QlbTree) -> usize {
    tree.as_ref().map_or(0, |t| t.0.dim())
}

/// Number of nonzero coordinates, or 0 for a null handle.
///
/// # Safety
/// `tree` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qlb_tree_support_len(tree: *const QlbTree) -> usize {
    tree.as_ref().map_or(0, |t| t.0.support_len())
}

/// Writes all `d` coordinates to `out`, which must hold `len >= d` doubles.
///
/// # Safety
/// `tree` must be a live handle and `out` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn qlb_tree_to_dense(tree: *const QlbTree, out: *mut f64, len: usize) -> QlbStatus {
    guard(|| {
        let t = &deref(tree, "tree")?.0;
        write_slice(&t.to_dense(), out, len)
    })
}

unsafe fn write_slice(values: &[f64], out: *mut f64, len: usize) -> Result<(), (QlbStatus, String)> {
    if out.is_null() {
        return Err(null("out"));
    }
    if len < values.len() {
        return Err((
            QlbStatus::DimensionMismatch,
            format!("buffer holds {len} values, need {}", values.len()),
        ));
    }
    ptr::copy_nonoverlapping(values.as_ptr(), out, values.len());
    Ok(())
}

// Sample sets

/// Copies an `n x d` row-major matrix and `n` targets into a sample set.
///
/// # Safety
/// `x` must point to `n * d` doubles, `y` to `n`, and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn qlb_samples_new(
    x: *const f64,
    y: *const f64,
    n: usize,
    d: usize,
    regime: QlbRegime,
    out: *mut *mut QlbSamples,
) -> QlbStatus {
    guard(|| {
        if x.is_null() || y.is_null() {
            return Err(null("x or y"));
        }
        let cells = n.checked_mul(d).ok_or((QlbStatus::InvalidParameter, "n * d overflows".to_string()))?;
        let xs = std::slice::from_raw_parts(x, cells);
        let ys = std::slice::from_raw_parts(y, n);
        let rows: Vec<Vec<f64>> = (0..n).map(|i| xs[i * d..(i + 1) * d].to_vec()).collect();
        let regime = match regime {
            QlbRegime::Linf => NormRegime::LInf,
            QlbRegime::L2 => NormRegime::L2,
        };
        put(out, QlbSamples(lib(SampleSet::from_rows(&rows, ys, regime))?))
    })
}

/// Reads a sample file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn qlb_samples_load_csv(path: *const c_char, out: *mut *mut QlbSamples) -> QlbStatus {
    guard(|| {
        if path.is_null() {
            return Err(null("path"));
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| (QlbStatus::InvalidParameter, "path is not UTF-8".to_string()))?;
        put(out, QlbSamples(lib(SampleSet::load_csv(path))?))
    })
}

/// Planted Lasso (`ridge == false`) or Ridge samples. The planted set is
/// written to `planted`, which must hold `w` indices.
///
/// # Safety
/// `planted` must point to `w` slots (or be null to skip) and `out` be valid.
#[no_mangle]
pub unsafe extern "C" fn qlb_samples_gen_hidden(
    d: usize,
    w: usize,
    p: f64,
    m: usize,
    seed: u64,
    ridge: bool,
    planted: *mut usize,
    out: *mut *mut QlbSamples,
) -> QlbStatus {
    guard(|| {
        let (s, inst) = lib(if ridge { gen_ridge_hidden(d, w, p, m, seed) } else { gen_lasso_hidden(d, w, p, m, seed) })?;
        if !planted.is_null() {
            ptr::copy_nonoverlapping(inst.planted.as_ptr(), planted, inst.planted.len());
        }
        put(out, QlbSamples(s))
    })
}

/// # Safety
/// `samples` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn qlb_samples_free(samples: *mut QlbSamples) {
    if !samples.is_null() {
        drop(Box::from_raw(samples));
    }
}

/// # Safety
/// `samples` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qlb_samples_n(samples: *const QlbSamples) -> usize {
    samples.as_ref().map_or(0, |s| s.0.n())
}

/// # Safety
/// `samples` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qlb_samples_d(samples: *const QlbSamples) -> usize {
    samples.as_ref().map_or(0, |s| s.0.d())
}

/// Whether every sample obeys the set's normalisation; false for null.
///
/// # Safety
/// `samples` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qlb_samples_is_valid(samples: *const QlbSamples) -> bool {
    samples.as_ref().is_some_and(|s| s.0.is_valid())
}

// Solvers

/// An `eps`-minimizer of the Lasso loss.
///
/// # Safety
/// `samples` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn qlb_lasso_solve(
    samples: *const QlbSamples,
    eps: f64,
    mode: QlbMode,
    seed: u64,
    out: *mut *mut QlbReport,
) -> QlbStatus {
    guard(|| {
        let s = &deref(samples, "samples")?.0;
        let mode = match mode {
            QlbMode::Classical => SolveMode::ClassicalExact,
            QlbMode::Quantum => SolveMode::QuantumEmulated(EmulatorConfig::default()),
        };
        put(out, QlbReport(lib(lasso_solve(s, eps, mode, seed))?))
    })
}

/// Projected gradient descent over the unit l2 ball.
///
/// # Safety
/// `samples` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn qlb_ridge_solve(
    samples: *const QlbSamples,
    eps: f64,
    max_iter: usize,
    out: *mut *mut QlbReport,
) -> QlbStatus {
    guard(|| {
        let s = &deref(samples, "samples")?.0;
        put(out, QlbReport(lib(ridge_solve_baseline(s, eps, max_iter))?))
    })
}

/// # Safety
/// `report` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn qlb_report_free(report: *mut QlbReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Empirical loss of the returned iterate; NaN for null.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qlb_report_objective(report: *const QlbReport) -> f64 {
    report.as_ref().map_or(f64::NAN, |r| r.0.objective)
}

/// Writes the dense iterate to `out`, which must hold `len >= d` doubles.
///
/// # Safety
/// `report` must be a live handle and `out` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn qlb_report_theta(report: *const QlbReport, out: *mut f64, len: usize) -> QlbStatus {
    guard(|| write_slice(&deref(report, "report")?.0.theta_dense(), out, len))
}

/// # Safety
/// `report` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn qlb_report_ledger(report: *const QlbReport, out: *mut QlbLedger) -> QlbStatus {
    guard(|| {
        let l = &deref(report, "report")?.0.ledger;
        *deref_mut(out, "out")? = QlbLedger { q_x: l.q_x, q_y: l.q_y, q_tree: l.q_tree, gates: l.gates };
        Ok(())
    })
}

/// The report as JSON. Free the string with `qlb_string_free`.
///
/// # Safety
/// `report` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn qlb_report_json(report: *const QlbReport, out: *mut *mut c_char) -> QlbStatus {
    guard(|| {
        let text = lib(deref(report, "report")?.0.to_json())?;
        let c = CString::new(text).map_err(|_| (QlbStatus::Json, "JSON contains NUL".to_string()))?;
        *deref_mut(out, "out")? = c.into_raw();
        Ok(())
    })
}
