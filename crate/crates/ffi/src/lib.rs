//! C ABI over `gjb-core`.
//!
//! Every fallible function returns a [`GjbStatus`]; on failure a message is
//! kept per thread and can be read with [`gjb_last_error_message`]. Handles
//! are opaque and must be released with their `*_free` function. Panics
//! never cross the boundary; they surface as `GJB_STATUS_INTERNAL`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, UnwindSafe};
use std::ptr;

use gjb::gjb::{chi2_survival, sigma_analytic_with, Calibration};
use gjb::moments::sn_raw_moments;
use gjb::testing::{Hypothesis, SigmaRoute, TestOutcome};
use gjb::{distributions, Error};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GjbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    EmptySample = 3,
    ZeroVariance = 4,
    SingularCovariance = 5,
    DegenerateLaw = 6,
    Internal = 99,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GjbCalibration {
    Exact = 0,
    Legacy = 1,
}

impl From<GjbCalibration> for Calibration {
    fn from(c: GjbCalibration) -> Self {
        match c {
            GjbCalibration::Exact => Calibration::Exact,
            GjbCalibration::Legacy => Calibration::Legacy,
        }
    }
}

/// Asymptotic covariance of the (kurtosis, skewness) pair.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct GjbSigma {
    pub s11: f64,
    pub s22: f64,
    pub s12: f64,
    pub det: f64,
}

/// A prepared null hypothesis `SN(alpha)`.
pub struct GjbHypothesis(Hypothesis);

/// Result of one test.
pub struct GjbOutcome(TestOutcome);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let message = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(message));
}

fn status_of(error: &Error) -> GjbStatus {
    match error {
        Error::EmptySample => GjbStatus::EmptySample,
        Error::ZeroVariance => GjbStatus::ZeroVariance,
        Error::SingularCovariance { .. } => GjbStatus::SingularCovariance,
        Error::DegenerateLaw(_) => GjbStatus::DegenerateLaw,
        _ => GjbStatus::InvalidArgument,
    }
}

fn guard<F>(body: F) -> GjbStatus
where
    F: FnOnce() -> Result<(), GjbStatus> + UnwindSafe,
{
    match catch_unwind(body) {
        Ok(Ok(())) => GjbStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => {
            set_last_error("internal panic".into());
            GjbStatus::Internal
        }
    }
}

fn check<T>(result: gjb::Result<T>) -> Result<T, GjbStatus> {
    result.map_err(|e| {
        set_last_error(e.to_string());
        status_of(&e)
    })
}

fn non_null<T>(p: *const T, what: &str) -> Result<(), GjbStatus> {
    if p.is_null() {
        set_last_error(format!("{what} is null"));
        return Err(GjbStatus::NullPointer);
    }
    Ok(())
}

unsafe fn sample_slice<'a>(data: *const f64, len: usize) -> Result<&'a [f64], GjbStatus> {
    if len == 0 {
        set_last_error("sample is empty".into());
        return Err(GjbStatus::EmptySample);
    }
    non_null(data, "data")?;
    Ok(std::slice::from_raw_parts(data, len))
}

/// Message of the last failure on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn gjb_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn gjb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Writes the raw moments of orders 0..=8 of `SN(alpha)` into `out[9]`.
///
/// # Safety
/// `out` must point to 9 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn gjb_raw_moments(alpha: f64, out: *mut f64) -> GjbStatus {
    guard(|| {
        non_null(out, "out")?;
        let shape = check(distributions::SkewNormalShape::new(alpha))?;
        let raw = sn_raw_moments(shape);
        ptr::copy_nonoverlapping(raw.entries().as_ptr(), out, 9);
        Ok(())
    })
}

/// Analytic covariance for `SN(alpha)`.
///
/// # Safety
/// `out` must point to a writable `GjbSigma`.
#[no_mangle]
pub unsafe extern "C" fn gjb_sigma_analytic(
    alpha: f64,
    calibration: GjbCalibration,
    out: *mut GjbSigma,
) -> GjbStatus {
    guard(|| {
        non_null(out, "out")?;
        let shape = check(distributions::SkewNormalShape::new(alpha))?;
        let s = check(sigma_analytic_with(
            &sn_raw_moments(shape),
            calibration.into(),
        ))?;
        *out = GjbSigma {
            s11: s.s11,
            s22: s.s22,
            s12: s.s12,
            det: s.det,
        };
        Ok(())
    })
}

/// Upper tail of the chi-squared law with `dof` degrees of freedom.
///
/// # Safety
/// `out` must point to a writable double.
#[no_mangle]
pub unsafe extern "C" fn gjb_chi2_survival(x: f64, dof: u32, out: *mut f64) -> GjbStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = check(chi2_survival(x, dof))?;
        Ok(())
    })
}

/// Fills `out[0..n]` with a seeded `SN(alpha)` sample. The values equal
/// those written by `gjb sample` with the same arguments.
///
/// # Safety
/// `out` must point to `n` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn gjb_sample(alpha: f64, n: usize, seed: u64, out: *mut f64) -> GjbStatus {
    guard(|| {
        non_null(out, "out")?;
        let shape = check(distributions::SkewNormalShape::new(alpha))?;
        let values = check(distributions::sample_sn(shape, n, seed))?;
        ptr::copy_nonoverlapping(values.as_ptr(), out, n);
        Ok(())
    })
}

/// Prepares the null hypothesis `SN(alpha)` with the analytic covariance.
///
/// # Safety
/// `out` must point to a writable handle pointer. On success it receives a
/// handle to release with `gjb_hypothesis_free`.
#[no_mangle]
pub unsafe extern "C" fn gjb_hypothesis_new(
    alpha: f64,
    calibration: GjbCalibration,
    out: *mut *mut GjbHypothesis,
) -> GjbStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = ptr::null_mut();
        let h = check(Hypothesis::new(
            alpha,
            SigmaRoute::Analytic,
            calibration.into(),
        ))?;
        *out = Box::into_raw(Box::new(GjbHypothesis(h)));
        Ok(())
    })
}

/// Kurtosis and skewness under the hypothesis.
///
/// # Safety
/// `h` must be a live handle; `kurtosis` and `skewness` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gjb_hypothesis_shape(
    h: *const GjbHypothesis,
    kurtosis: *mut f64,
    skewness: *mut f64,
) -> GjbStatus {
    guard(|| {
        non_null(h, "hypothesis")?;
        non_null(kurtosis, "kurtosis")?;
        non_null(skewness, "skewness")?;
        *kurtosis = (*h).0.a;
        *skewness = (*h).0.b;
        Ok(())
    })
}

/// Tests `data[0..len]`, repeated `k` times, against the hypothesis.
///
/// # Safety
/// `h` must be a live handle, `data` must point to `len` readable doubles
/// and `out` to a writable handle pointer. Release the result with
/// `gjb_outcome_free`.
#[no_mangle]
pub unsafe extern "C" fn gjb_hypothesis_test(
    h: *const GjbHypothesis,
    data: *const f64,
    len: usize,
    k: usize,
    out: *mut *mut GjbOutcome,
) -> GjbStatus {
    guard(|| {
        non_null(h, "hypothesis")?;
        non_null(out, "out")?;
        *out = ptr::null_mut();
        let sample = sample_slice(data, len)?;
        let outcome = check((*h).0.test(sample, k))?;
        *out = Box::into_raw(Box::new(GjbOutcome(outcome)));
        Ok(())
    })
}

/// Releases a hypothesis handle. NULL is ignored.
///
/// # Safety
/// `h` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gjb_hypothesis_free(h: *mut GjbHypothesis) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Test statistic.
///
/// # Safety
/// `o` must be NULL or a live handle. NULL yields NaN.
#[no_mangle]
pub unsafe extern "C" fn gjb_outcome_statistic(o: *const GjbOutcome) -> f64 {
    o.as_ref().map_or(f64::NAN, |o| o.0.j_n)
}

/// p-value.
///
/// # Safety
/// `o` must be NULL or a live handle. NULL yields NaN.
#[no_mangle]
pub unsafe extern "C" fn gjb_outcome_p_value(o: *const GjbOutcome) -> f64 {
    o.as_ref().map_or(f64::NAN, |o| o.0.p_value)
}

/// Effective sample size (observations times duplication factor).
///
/// # Safety
/// `o` must be NULL or a live handle. NULL yields 0.
#[no_mangle]
pub unsafe extern "C" fn gjb_outcome_n(o: *const GjbOutcome) -> usize {
    o.as_ref().map_or(0, |o| o.0.n)
}

/// Empirical kurtosis and skewness of the tested sample.
///
/// # Safety
/// `o` must be a live handle; `kurtosis` and `skewness` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gjb_outcome_empirical_shape(
    o: *const GjbOutcome,
    kurtosis: *mut f64,
    skewness: *mut f64,
) -> GjbStatus {
    guard(|| {
        non_null(o, "outcome")?;
        non_null(kurtosis, "kurtosis")?;
        non_null(skewness, "skewness")?;
        *kurtosis = (*o).0.a_n;
        *skewness = (*o).0.b_n;
        Ok(())
    })
}

/// Covariance used by the test.
///
/// # Safety
/// `o` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gjb_outcome_sigma(o: *const GjbOutcome, out: *mut GjbSigma) -> GjbStatus {
    guard(|| {
        non_null(o, "outcome")?;
        non_null(out, "out")?;
        let s = (*o).0.sigma;
        *out = GjbSigma {
            s11: s.s11,
            s22: s.s22,
            s12: s.s12,
            det: s.det,
        };
        Ok(())
    })
}

/// Releases an outcome handle. NULL is ignored.
///
/// # Safety
/// `o` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gjb_outcome_free(o: *mut GjbOutcome) {
    if !o.is_null() {
        drop(Box::from_raw(o));
    }
}
