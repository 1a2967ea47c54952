//! C interface to `besselreg`.
//!
//! Datasets and fits are opaque handles created by `br_*_new`/`br_fit` and
//! released with the matching `*_free`. Every fallible call returns a
//! [`BrStatus`]; on failure `br_last_error` describes the problem for the
//! calling thread. Matrices are passed row-major.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use besselreg::cli::datasets::Preset;
use besselreg::dbb::dbb_test;
use besselreg::diagnostics::pearson_residuals;
use besselreg::regression::fit;
use besselreg::{Dataset, Error, Family, FitResult};
use nalgebra::DMatrix;

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidData = 3,
    RankDeficient = 4,
    Domain = 5,
    Solver = 6,
    SingularInformation = 7,
    Io = 8,
    Panic = 99,
}

/// Regression family.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BrModel {
    Bessel = 0,
    Beta = 1,
}

impl From<BrModel> for Family {
    fn from(m: BrModel) -> Family {
        match m {
            BrModel::Bessel => Family::Bessel,
            BrModel::Beta => Family::Beta,
        }
    }
}

/// Opaque dataset handle.
pub struct BrDataset(Dataset);

/// Opaque fit handle.
pub struct BrFit(FitResult);

/// DBB test summary. `d_bessel` and `d_beta` are NaN when the pre-check
/// already selects beta.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct BrDbbResult {
    pub mean_sq_response: f64,
    pub variance_bound_sum: f64,
    pub d_bessel: f64,
    pub d_beta: f64,
    pub decision: BrModel,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(s).ok());
}

fn status_of(e: &Error) -> BrStatus {
    match e {
        Error::Domain(_) => BrStatus::Domain,
        Error::InvalidData(_) | Error::NonFinite(_) => BrStatus::InvalidData,
        Error::RankDeficient { .. } => BrStatus::RankDeficient,
        Error::SingularInformation { .. } => BrStatus::SingularInformation,
        Error::Solver(_) => BrStatus::Solver,
        Error::Config(_) => BrStatus::InvalidArgument,
        Error::Input { .. } | Error::Io(_) | Error::Csv(_) | Error::Json(_) => BrStatus::Io,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (BrStatus, String)>) -> BrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            BrStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            BrStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (BrStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (BrStatus, String) {
    (BrStatus::NullPointer, format!("{what} is null"))
}

/// Message for the last failed call on this thread, or NULL. The pointer
/// stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn br_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn br_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], (BrStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

/// Build a dataset from `z` (length `n`), `x` (`n x p`) and `v` (`n x q`).
///
/// # Safety
/// The arrays must hold at least `n`, `n * p` and `n * q` doubles and `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn br_dataset_new(
    z: *const f64,
    n: usize,
    x: *const f64,
    p: usize,
    v: *const f64,
    q: usize,
    out: *mut *mut BrDataset,
) -> BrStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let total_x = n.checked_mul(p).ok_or((BrStatus::InvalidArgument, "n * p overflows".into()))?;
        let total_v = n.checked_mul(q).ok_or((BrStatus::InvalidArgument, "n * q overflows".into()))?;
        let z = slice(z, n, "z")?.to_vec();
        let xm = DMatrix::from_row_slice(n, p, slice(x, total_x, "x")?);
        let vm = DMatrix::from_row_slice(n, q, slice(v, total_v, "v")?);
        let xn = (1..=p).map(|j| format!("x{j}")).collect();
        let vn = (1..=q).map(|j| format!("v{j}")).collect();
        let d = Dataset::new(z, xm, vm, xn, vn).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(BrDataset(d)));
        Ok(())
    })
}

/// Load a bundled dataset: "stress-anxiety", "weather-task" or "bodyfat".
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn br_dataset_preset(name: *const c_char, out: *mut *mut BrDataset) -> BrStatus {
    guard(|| {
        if name.is_null() {
            return Err(null("name"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let s = CStr::from_ptr(name)
            .to_str()
            .map_err(|_| (BrStatus::InvalidArgument, "name is not UTF-8".to_string()))?;
        let preset: Preset = s.parse().map_err(lib_err)?;
        let d = preset.load().map_err(lib_err)?.dataset;
        *out = Box::into_raw(Box::new(BrDataset(d)));
        Ok(())
    })
}

/// # Safety
/// `d` must come from a `br_dataset_*` constructor (or be NULL) and must
/// not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn br_dataset_free(d: *mut BrDataset) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// Writes `n`, `p` and `q` of a dataset.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn br_dataset_dims(d: *const BrDataset, n: *mut usize, p: *mut usize, q: *mut usize) -> BrStatus {
    guard(|| {
        let d = d.as_ref().ok_or_else(|| null("dataset"))?;
        if n.is_null() || p.is_null() || q.is_null() {
            return Err(null("output"));
        }
        *n = d.0.n();
        *p = d.0.p();
        *q = d.0.q();
        Ok(())
    })
}

/// Fit `model` to `d`.
///
/// # Safety
/// `d` must be a live dataset handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn br_fit(d: *const BrDataset, model: BrModel, out: *mut *mut BrFit) -> BrStatus {
    guard(|| {
        let d = d.as_ref().ok_or_else(|| null("dataset"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let f = fit(model.into(), &d.0, None).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(BrFit(f)));
        Ok(())
    })
}

/// # Safety
/// `f` must come from `br_fit` (or be NULL) and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn br_fit_free(f: *mut BrFit) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Number of coefficients (`p + q`), or 0 for NULL.
///
/// # Safety
/// `f` must be a live fit handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn br_fit_len(f: *const BrFit) -> usize {
    f.as_ref().map_or(0, |f| f.0.theta.kappa.len() + f.0.theta.lambda.len())
}

/// Copy estimates (mean block first) and standard errors into arrays of
/// length `len`, which must equal `br_fit_len`. Either array may be NULL.
///
/// # Safety
/// Non-NULL arrays must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn br_fit_coefficients(f: *const BrFit, estimates: *mut f64, std_errors: *mut f64, len: usize) -> BrStatus {
    guard(|| {
        let f = f.as_ref().ok_or_else(|| null("fit"))?;
        let est: Vec<f64> = f.0.theta.kappa.iter().chain(&f.0.theta.lambda).copied().collect();
        if len != est.len() {
            return Err((BrStatus::InvalidArgument, format!("len {len} != {} coefficients", est.len())));
        }
        if !estimates.is_null() {
            ptr::copy_nonoverlapping(est.as_ptr(), estimates, len);
        }
        if !std_errors.is_null() {
            ptr::copy_nonoverlapping(f.0.std_errors.as_ptr(), std_errors, len);
        }
        Ok(())
    })
}

/// Log-likelihood at the estimate, NaN for NULL.
///
/// # Safety
/// `f` must be a live fit handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn br_fit_loglik(f: *const BrFit) -> f64 {
    f.as_ref().map_or(f64::NAN, |f| f.0.loglik)
}

/// 1 when the fit converged, 0 otherwise (including NULL).
///
/// # Safety
/// `f` must be a live fit handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn br_fit_converged(f: *const BrFit) -> c_int {
    f.as_ref().map_or(0, |f| f.0.converged as c_int)
}

/// Pearson residuals of `f` evaluated on `d` into `out` (length `n`).
///
/// # Safety
/// Handles must be live and `out` must hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn br_pearson_residuals(f: *const BrFit, d: *const BrDataset, out: *mut f64, n: usize) -> BrStatus {
    guard(|| {
        let f = f.as_ref().ok_or_else(|| null("fit"))?;
        let d = d.as_ref().ok_or_else(|| null("dataset"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        if d.0.p() != f.0.theta.kappa.len() || d.0.q() != f.0.theta.lambda.len() {
            return Err((BrStatus::InvalidArgument, "dataset dimensions do not match the fit".into()));
        }
        if n != d.0.n() {
            return Err((BrStatus::InvalidArgument, format!("n {n} != {} rows", d.0.n())));
        }
        let r = pearson_residuals(&f.0, &d.0);
        ptr::copy_nonoverlapping(r.as_ptr(), out, n);
        Ok(())
    })
}

/// Run the DBB test on `d`.
///
/// # Safety
/// `d` must be a live dataset handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn br_dbb(d: *const BrDataset, out: *mut BrDbbResult) -> BrStatus {
    guard(|| {
        let d = d.as_ref().ok_or_else(|| null("dataset"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let r = dbb_test(&d.0).map_err(lib_err)?;
        *out = BrDbbResult {
            mean_sq_response: r.mean_sq_response,
            variance_bound_sum: r.variance_bound_sum,
            d_bessel: r.d_bessel.unwrap_or(f64::NAN),
            d_beta: r.d_beta.unwrap_or(f64::NAN),
            decision: match r.decision {
                Family::Bessel => BrModel::Bessel,
                Family::Beta => BrModel::Beta,
            },
        };
        Ok(())
    })
}
