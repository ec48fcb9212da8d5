//! C ABI over the carbon-tax incidence engine.
//!
//! Every fallible call returns an [`MzStatus`]; on failure a human-readable
//! message is stored per thread and can be read with [`mz_last_error`].
//! Results travel through the opaque [`MzResult`] handle, released with
//! [`mz_result_free`]. The generated header lives at `include/miyazawa.h`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;

use miyazawa::fiscal::ImpactResult;
use miyazawa::inequality::{self, GroupedDistribution, Scope};
use miyazawa::report::{Precision, RunConfig};
use miyazawa::{report, Error};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MzStatus {
    /// Success.
    Ok = 0,
    /// Input data failed validation (schema, balance, group set, scenario).
    Validation = 1,
    /// The system is numerically unusable (non-productive or singular).
    Numerical = 2,
    /// A file could not be read.
    Io = 3,
    /// A required pointer argument was null.
    NullArgument = 4,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 5,
    /// An index or buffer length was out of range.
    Range = 6,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = CString::new(sanitized).unwrap());
}

fn status_of(err: &Error) -> MzStatus {
    match err.exit_code() {
        2 => MzStatus::Numerical,
        3 => MzStatus::Io,
        _ => MzStatus::Validation,
    }
}

/// Opaque result handle. Allocate with [`mz_run`], free with
/// [`mz_result_free`]; never dereference from C. The header declares it
/// as a forward-declared struct.
/// cbindgen:ignore
#[repr(C)]
pub struct MzResult {
    _private: [u8; 0],
}

struct ResultBox {
    inner: ImpactResult,
    group_ids: Vec<CString>,
}

fn result_ref<'a>(handle: *const MzResult) -> Option<&'a ResultBox> {
    unsafe { (handle as *const ResultBox).as_ref() }
}

/// Message of the most recent failure on this thread, empty when the last
/// call succeeded. The pointer stays valid until the next failing call.
#[no_mangle]
pub extern "C" fn mz_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

unsafe fn path_arg(ptr: *const c_char) -> Result<PathBuf, MzStatus> {
    if ptr.is_null() {
        set_error("null path argument");
        return Err(MzStatus::NullArgument);
    }
    match CStr::from_ptr(ptr).to_str() {
        Ok(s) => Ok(PathBuf::from(s)),
        Err(_) => {
            set_error("path is not valid UTF-8");
            Err(MzStatus::InvalidUtf8)
        }
    }
}

/// Runs the full pipeline on the given input files and hands back a result.
///
/// `out_dir` may be null to skip writing report files. On success `*out`
/// owns the handle and `MzStatus::Ok` is returned.
///
/// # Safety
/// Path arguments must be null-terminated strings; `out` must be a valid
/// pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn mz_run(
    sectors_path: *const c_char,
    households_path: *const c_char,
    scenario_path: *const c_char,
    out_dir: *const c_char,
    open_model: bool,
    out: *mut *mut MzResult,
) -> MzStatus {
    if out.is_null() {
        set_error("null output handle");
        return MzStatus::NullArgument;
    }
    let (sectors, households, scenario) = match (
        path_arg(sectors_path),
        path_arg(households_path),
        path_arg(scenario_path),
    ) {
        (Ok(a), Ok(b), Ok(c)) => (a, b, c),
        (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => return e,
    };
    let output_dir = if out_dir.is_null() {
        None
    } else {
        match path_arg(out_dir) {
            Ok(p) => Some(p),
            Err(e) => return e,
        }
    };

    let config = RunConfig {
        sectors_file: sectors,
        households_file: households,
        scenario_file: scenario,
        output_dir: output_dir.unwrap_or_else(std::env::temp_dir),
        population_weights: None,
        open_model,
        scope: Scope::All,
        precision: Precision::default(),
    };
    let run = if out_dir.is_null() {
        report::run_in_memory(&config)
    } else {
        report::run(&config)
    };
    match run {
        Ok(result) => {
            let group_ids = result
                .groups
                .iter()
                .map(|g| CString::new(g.group_id.clone()).unwrap_or_default())
                .collect();
            let boxed = Box::new(ResultBox {
                inner: result,
                group_ids,
            });
            *out = Box::into_raw(boxed) as *mut MzResult;
            MzStatus::Ok
        }
        Err(err) => {
            set_error(&err.to_string());
            status_of(&err)
        }
    }
}

/// Number of household groups in the result.
#[no_mangle]
pub extern "C" fn mz_result_group_count(result: *const MzResult) -> usize {
    result_ref(result).map_or(0, |r| r.inner.groups.len())
}

unsafe fn copy_vector(
    result: *const MzResult,
    buf: *mut f64,
    len: usize,
    pick: impl Fn(&ImpactResult) -> &[f64],
) -> MzStatus {
    let Some(boxed) = result_ref(result) else {
        set_error("null result handle");
        return MzStatus::NullArgument;
    };
    if buf.is_null() {
        set_error("null output buffer");
        return MzStatus::NullArgument;
    }
    let source = pick(&boxed.inner);
    if len < source.len() {
        set_error("output buffer too small");
        return MzStatus::Range;
    }
    std::ptr::copy_nonoverlapping(source.as_ptr(), buf, source.len());
    MzStatus::Ok
}

/// Baseline income per group, million Rp. `len` must be at least the
/// group count.
///
/// # Safety
/// `buf` must point to at least `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn mz_result_baseline_income(
    result: *const MzResult,
    buf: *mut f64,
    len: usize,
) -> MzStatus {
    copy_vector(result, buf, len, |r| r.y1.as_slice())
}

/// Income decline per group (positive values), million Rp.
///
/// # Safety
/// `buf` must point to at least `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn mz_result_income_decline(
    result: *const MzResult,
    buf: *mut f64,
    len: usize,
) -> MzStatus {
    copy_vector(result, buf, len, |r| r.dy.as_slice())
}

/// Post-tax income per group, million Rp.
///
/// # Safety
/// `buf` must point to at least `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn mz_result_post_tax_income(
    result: *const MzResult,
    buf: *mut f64,
    len: usize,
) -> MzStatus {
    copy_vector(result, buf, len, |r| r.y2.as_slice())
}

/// Relative decline per group (fraction of baseline income).
///
/// # Safety
/// `buf` must point to at least `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn mz_result_relative_decline(
    result: *const MzResult,
    buf: *mut f64,
    len: usize,
) -> MzStatus {
    copy_vector(result, buf, len, |r| r.pct_dy.as_slice())
}

/// Share of the total decline per group (fraction).
///
/// # Safety
/// `buf` must point to at least `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn mz_result_contribution_share(
    result: *const MzResult,
    buf: *mut f64,
    len: usize,
) -> MzStatus {
    copy_vector(result, buf, len, |r| r.pct_cy.as_slice())
}

/// Group identifier at `index`; the pointer stays valid while the handle
/// lives.
///
/// # Safety
/// `out` must be a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn mz_result_group_id(
    result: *const MzResult,
    index: usize,
    out: *mut *const c_char,
) -> MzStatus {
    let Some(boxed) = result_ref(result) else {
        set_error("null result handle");
        return MzStatus::NullArgument;
    };
    if out.is_null() {
        set_error("null output pointer");
        return MzStatus::NullArgument;
    }
    match boxed.group_ids.get(index) {
        Some(id) => {
            *out = id.as_ptr();
            MzStatus::Ok
        }
        None => {
            set_error("group index out of range");
            MzStatus::Range
        }
    }
}

/// Gross tax revenue, million Rp.
///
/// # Safety
/// `out` must be a valid pointer to a writable double.
#[no_mangle]
pub unsafe extern "C" fn mz_result_tax_revenue(
    result: *const MzResult,
    out: *mut f64,
) -> MzStatus {
    let Some(boxed) = result_ref(result) else {
        set_error("null result handle");
        return MzStatus::NullArgument;
    };
    if out.is_null() {
        set_error("null output pointer");
        return MzStatus::NullArgument;
    }
    *out = boxed.inner.tax_revenue;
    MzStatus::Ok
}

/// Sum of all group income declines, million Rp.
///
/// # Safety
/// `out` must be a valid pointer to a writable double.
#[no_mangle]
pub unsafe extern "C" fn mz_result_total_decline(
    result: *const MzResult,
    out: *mut f64,
) -> MzStatus {
    let Some(boxed) = result_ref(result) else {
        set_error("null result handle");
        return MzStatus::NullArgument;
    };
    if out.is_null() {
        set_error("null output pointer");
        return MzStatus::NullArgument;
    }
    *out = boxed.inner.total_decline();
    MzStatus::Ok
}

/// Releases a result handle. Passing null is a no-op.
///
/// # Safety
/// `result` must come from [`mz_run`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn mz_result_free(result: *mut MzResult) {
    if !result.is_null() {
        drop(Box::from_raw(result as *mut ResultBox));
    }
}

/// Trapezoidal Gini of a grouped distribution. `shares` are population
/// shares summing to 1, `incomes` group totals, both of length `len`.
///
/// # Safety
/// `shares` and `incomes` must point to `len` readable doubles and `out`
/// to a writable double.
#[no_mangle]
pub unsafe extern "C" fn mz_gini(
    shares: *const f64,
    incomes: *const f64,
    len: usize,
    out: *mut f64,
) -> MzStatus {
    if shares.is_null() || incomes.is_null() || out.is_null() {
        set_error("null argument");
        return MzStatus::NullArgument;
    }
    if len == 0 {
        set_error("empty distribution");
        return MzStatus::Range;
    }
    let shares = std::slice::from_raw_parts(shares, len);
    let incomes = std::slice::from_raw_parts(incomes, len);
    let points = shares.iter().copied().zip(incomes.iter().copied()).collect();
    match GroupedDistribution::new(points, Scope::All).and_then(|d| inequality::lorenz(&d)) {
        Ok(curve) => {
            *out = inequality::gini(&curve);
            MzStatus::Ok
        }
        Err(err) => {
            set_error(&err.to_string());
            status_of(&err)
        }
    }
}
