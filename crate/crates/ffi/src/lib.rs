//! C ABI for the chainprobe accountability library.
//!
//! Every function returns a [`ChainprobeStatus`]; results travel through out
//! pointers. On any non-`Ok` status a thread-local message describing the
//! failure is retrievable with [`chainprobe_last_error_message`]. The AROC
//! curve is exposed as an opaque handle created by
//! [`chainprobe_aroc_curve_new`] and released by
//! [`chainprobe_aroc_curve_free`]; handles are plain boxed pointers, so a
//! handle must be freed exactly once and never used afterwards.
//!
//! Rust panics are caught at the boundary and reported as
//! `ChainprobeStatus::Panic` instead of unwinding into the caller.

// FFI entry points inherently dereference raw pointers; every dereference is
// null-checked first and documented on the helper that performs it.
#![allow(clippy::not_unsafe_ptr_arg_deref)]

use std::cell::RefCell;
use std::ffi::{CStr, CString, c_char};
use std::panic::{AssertUnwindSafe, catch_unwind};
use std::path::Path;

use chainprobe::Error;
use chainprobe::aroc::{
    ArocCurve, aroc_curve_gaussian, auc_bounds, auc_numeric, validate_aroc_properties,
};
use chainprobe::domain::{Reputation, bayes_threshold};
use chainprobe::econ::{
    BuyerEconomics, CoverageBounds, InsurancePolicy, RiskModel, coverage_bounds, insurer_profit,
    max_premium_full_coverage, optimal_test_count,
};
use chainprobe::hypotest::{NpConfig, accountability_gaussian, np_binomial_test};
use chainprobe::platoon::{GaussianScenario, closed_form_threshold, monte_carlo_accountability};
use chainprobe::scenario::{ScenarioError, run_scenario};

/// Result codes of every `chainprobe_*` call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainprobeStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// An argument was outside its admissible range.
    InvalidArgument = 2,
    /// The request is well-formed but degenerate (e.g. zero sensor bias).
    DegenerateInput = 3,
    /// The operation is not supported for these inputs.
    Unsupported = 4,
    /// A solver or simulation failed at runtime.
    RuntimeError = 5,
    /// An I/O failure while reading configs or writing artifacts.
    IoError = 6,
    /// A scenario config failed to parse.
    ConfigParse = 7,
    /// A scenario config parsed but failed validation.
    ConfigInvalid = 8,
    /// The config path was not valid UTF-8.
    InvalidUtf8 = 9,
    /// A panic was caught at the FFI boundary.
    Panic = 10,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|cell| {
        *cell.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn clear_last_error() {
    LAST_ERROR.with(|cell| {
        *cell.borrow_mut() = CString::default();
    });
}

fn status_of(err: &Error) -> ChainprobeStatus {
    match err {
        Error::DegeneratePrior(_) | Error::Degenerate(_) => ChainprobeStatus::DegenerateInput,
        Error::Parameter { .. }
        | Error::InvalidModel(_)
        | Error::Support { .. }
        | Error::MismatchedSpaces(_)
        | Error::EmptyBatch
        | Error::Graph(_) => ChainprobeStatus::InvalidArgument,
        Error::EnumerationCap { .. } | Error::UnsupportedModel(_) => ChainprobeStatus::Unsupported,
        Error::Solver { .. } | Error::Divergence { .. } => ChainprobeStatus::RuntimeError,
        Error::Io(_) => ChainprobeStatus::IoError,
    }
}

fn fail(err: Error) -> ChainprobeStatus {
    let status = status_of(&err);
    set_last_error(&err.to_string());
    status
}

fn fail_null() -> ChainprobeStatus {
    set_last_error("null pointer argument");
    ChainprobeStatus::NullPointer
}

/// Run `body` with a panic guard; panics become `ChainprobeStatus::Panic`.
fn guarded(body: impl FnOnce() -> ChainprobeStatus) -> ChainprobeStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| (*s).to_owned())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(&message);
            ChainprobeStatus::Panic
        }
    }
}

/// Write `value` through `ptr`, or report a null pointer.
///
/// # Safety
/// `ptr` must be null or valid for a single write.
unsafe fn write_out<T>(ptr: *mut T, value: T) -> Result<(), ChainprobeStatus> {
    if ptr.is_null() {
        return Err(fail_null());
    }
    unsafe { ptr.write(value) };
    Ok(())
}

macro_rules! out {
    ($ptr:expr, $value:expr) => {
        match unsafe { write_out($ptr, $value) } {
            Ok(()) => {}
            Err(status) => return status,
        }
    };
}

/// Library version as a static null-terminated string.
#[unsafe(no_mangle)]
pub extern "C" fn chainprobe_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Copy the last error message for this thread into `buf` (truncated,
/// null-terminated). Returns the full message length in bytes; zero means no
/// error has been recorded. A null `buf` only queries the length.
#[unsafe(no_mangle)]
pub extern "C" fn chainprobe_last_error_message(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|cell| {
        let message = cell.borrow();
        let bytes = message.as_bytes();
        if bytes.is_empty() || buf.is_null() || cap == 0 {
            return bytes.len();
        }
        let copy_len = bytes.len().min(cap - 1);
        // SAFETY: caller guarantees `buf` points to at least `cap` bytes.
        unsafe {
            std::ptr::copy_nonoverlapping(bytes.as_ptr(), buf as *mut u8, copy_len);
            *buf.add(copy_len) = 0;
        }
        bytes.len()
    })
}

/// Bayesian LRT threshold `tau = pi0 / pi1` for a binary reputation prior.
#[unsafe(no_mangle)]
pub extern "C" fn chainprobe_bayes_threshold(
    pi0: f64,
    pi1: f64,
    out_tau: *mut f64,
) -> ChainprobeStatus {
    guarded(|| {
        let rep = match Reputation::binary(pi0, pi1) {
            Ok(rep) => rep,
            Err(err) => return fail(err),
        };
        match bayes_threshold(&rep) {
            Ok(tau) => {
                out!(out_tau, tau);
                clear_last_error();
                ChainprobeStatus::Ok
            }
            Err(err) => fail(err),
        }
    })
}

/// Closed-form Gaussian accountability `(P_A, P_U)` at detectability `d`
/// and reputation ratio `tau`.
#[unsafe(no_mangle)]
pub extern "C" fn chainprobe_accountability_gaussian(
    d: f64,
    tau: f64,
    out_p_a: *mut f64,
    out_p_u: *mut f64,
) -> ChainprobeStatus {
    guarded(|| match accountability_gaussian(d, tau) {
        Ok(outcome) => {
            out!(out_p_a, outcome.accountability);
            out!(out_p_u, outcome.wronged);
            clear_last_error();
            ChainprobeStatus::Ok
        }
        Err(err) => fail(err),
    })
}

/// Closed-form testing threshold `eta = e_d/2 + sigma^2 ln(tau) / (N e_d)`.
#[unsafe(no_mangle)]
pub extern "C" fn chainprobe_closed_form_threshold(
    sensor_bias: f64,
    noise_sigma: f64,
    n_tests: u64,
    tau: f64,
    out_eta: *mut f64,
) -> ChainprobeStatus {
    guarded(|| {
        let sc = match GaussianScenario::new(sensor_bias, noise_sigma, n_tests, tau) {
            Ok(sc) => sc,
            Err(err) => return fail(err),
        };
        match closed_form_threshold(&sc) {
            Ok(eta) => {
                out!(out_eta, eta);
                clear_last_error();
                ChainprobeStatus::Ok
            }
            Err(err) => fail(err),
        }
    })
}

/// Neyman-Pearson binomial design: quantile threshold and achieved
/// false-alarm probability for `Binomial(n_trials, mu0)` at level `alpha`.
#[unsafe(no_mangle)]
pub extern "C" fn chainprobe_np_binomial_threshold(
    mu0: f64,
    alpha: f64,
    n_trials: u64,
    out_threshold: *mut u64,
    out_achieved_false_alarm: *mut f64,
) -> ChainprobeStatus {
    guarded(|| {
        let cfg = match NpConfig::new(alpha, n_trials) {
            Ok(cfg) => cfg,
            Err(err) => return fail(err),
        };
        match np_binomial_test(mu0, &cfg) {
            Ok(design) => {
                out!(out_threshold, design.threshold);
                out!(out_achieved_false_alarm, design.achieved_false_alarm);
                clear_last_error();
                ChainprobeStatus::Ok
            }
            Err(err) => fail(err),
        }
    })
}

/// Shapiro AUC bounds `(1 - P_e, 1 - 2 P_e^2)` from the error probability.
#[unsafe(no_mangle)]
pub extern "C" fn chainprobe_auc_bounds(
    p_e: f64,
    out_lower: *mut f64,
    out_upper: *mut f64,
) -> ChainprobeStatus {
    guarded(|| match auc_bounds(p_e) {
        Ok((lo, hi)) => {
            out!(out_lower, lo);
            out!(out_upper, hi);
            clear_last_error();
            ChainprobeStatus::Ok
        }
        Err(err) => fail(err),
    })
}

/// Monte Carlo accountability estimate for the Gaussian sensor scenario.
#[unsafe(no_mangle)]
pub extern "C" fn chainprobe_monte_carlo_accountability(
    sensor_bias: f64,
    noise_sigma: f64,
    n_tests: u64,
    tau: f64,
    trials: u64,
    seed: u64,
    out_p_a_hat: *mut f64,
    out_p_u_hat: *mut f64,
) -> ChainprobeStatus {
    guarded(|| {
        let sc = match GaussianScenario::new(sensor_bias, noise_sigma, n_tests, tau) {
            Ok(sc) => sc,
            Err(err) => return fail(err),
        };
        match monte_carlo_accountability(&sc, trials, seed) {
            Ok(est) => {
                out!(out_p_a_hat, est.p_a_hat);
                out!(out_p_u_hat, est.p_u_hat);
                clear_last_error();
                ChainprobeStatus::Ok
            }
            Err(err) => fail(err),
        }
    })
}

/// Unbiased expected buyer loss `(1 - P_A) * delta_u`.
#[unsafe(no_mangle)]
pub extern "C" fn chainprobe_expected_loss(
    delta_u: f64,
    p_a: f64,
    out_loss: *mut f64,
) -> ChainprobeStatus {
    guarded(|| {
        let be = match BuyerEconomics::new(0.0, delta_u, p_a) {
            Ok(be) => be,
            Err(err) => return fail(err),
        };
        out!(out_loss, chainprobe::econ::expected_loss(&be));
        clear_last_error();
        ChainprobeStatus::Ok
    })
}

/// Maximum acceptable premium under full coverage for a prospect-theory
/// buyer: `C_I* = (1 - P_A) * lambda * delta_u^beta`.
#[unsafe(no_mangle)]
pub extern "C" fn chainprobe_max_premium_prospect(
    delta_u: f64,
    p_a: f64,
    lambda: f64,
    beta: f64,
    zeta: f64,
    out_premium: *mut f64,
) -> ChainprobeStatus {
    guarded(|| {
        let rm = match RiskModel::prospect(lambda, beta, zeta) {
            Ok(rm) => rm,
            Err(err) => return fail(err),
        };
        let be = match BuyerEconomics::new(0.0, delta_u, p_a) {
            Ok(be) => be,
            Err(err) => return fail(err),
        };
        match max_premium_full_coverage(&be, &rm) {
            Ok((_, premium)) => {
                out!(out_premium, premium);
                clear_last_error();
                ChainprobeStatus::Ok
            }
            Err(err) => fail(err),
        }
    })
}

/// Shape of a coverage-bounds result.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainprobeCoverage {
    /// `[lo, hi]` is a nonempty admissible interval.
    Interval = 0,
    /// No coverage level satisfies both sides at this premium.
    Empty = 1,
    /// There is no residual risk to insure.
    NoRisk = 2,
}

/// Coverage interval for a prospect-theory buyer at a given premium.
/// `out_lo`/`out_hi` are written only when the result is an interval.
#[unsafe(no_mangle)]
pub extern "C" fn chainprobe_coverage_bounds_prospect(
    premium: f64,
    delta_u: f64,
    p_a: f64,
    lambda: f64,
    beta: f64,
    zeta: f64,
    out_kind: *mut ChainprobeCoverage,
    out_lo: *mut f64,
    out_hi: *mut f64,
) -> ChainprobeStatus {
    guarded(|| {
        let rm = match RiskModel::prospect(lambda, beta, zeta) {
            Ok(rm) => rm,
            Err(err) => return fail(err),
        };
        let be = match BuyerEconomics::new(0.0, delta_u, p_a) {
            Ok(be) => be,
            Err(err) => return fail(err),
        };
        match coverage_bounds(premium, &be, &rm) {
            Ok(CoverageBounds::Interval { lo, hi }) => {
                out!(out_kind, ChainprobeCoverage::Interval);
                out!(out_lo, lo);
                out!(out_hi, hi);
                clear_last_error();
                ChainprobeStatus::Ok
            }
            Ok(CoverageBounds::Empty) => {
                out!(out_kind, ChainprobeCoverage::Empty);
                clear_last_error();
                ChainprobeStatus::Ok
            }
            Ok(CoverageBounds::NoRisk) => {
                out!(out_kind, ChainprobeCoverage::NoRisk);
                clear_last_error();
                ChainprobeStatus::Ok
            }
            Err(err) => fail(err),
        }
    })
}

/// Insurer profit `C_I - r * (1 - P_A) * delta_u`.
#[unsafe(no_mangle)]
pub extern "C" fn chainprobe_insurer_profit(
    premium: f64,
    coverage: f64,
    delta_u: f64,
    p_a: f64,
    out_profit: *mut f64,
) -> ChainprobeStatus {
    guarded(|| {
        let policy = match InsurancePolicy::new(premium, coverage) {
            Ok(p) => p,
            Err(err) => return fail(err),
        };
        let be = match BuyerEconomics::new(0.0, delta_u, p_a) {
            Ok(be) => be,
            Err(err) => return fail(err),
        };
        out!(out_profit, insurer_profit(&policy, &be));
        clear_last_error();
        ChainprobeStatus::Ok
    })
}

/// Optimal number of accountability tests for a CARA buyer under full
/// coverage at the maximum premium.
#[unsafe(no_mangle)]
pub extern "C" fn chainprobe_optimal_test_count(
    sensor_bias: f64,
    noise_sigma: f64,
    tau: f64,
    cost_per_test: f64,
    procurement_cost: f64,
    delta_u: f64,
    cara_beta: f64,
    n_max: u64,
    out_n: *mut u64,
    out_payoff: *mut f64,
) -> ChainprobeStatus {
    guarded(|| {
        let sc = match GaussianScenario::new(sensor_bias, noise_sigma, 1, tau) {
            Ok(sc) => sc,
            Err(err) => return fail(err),
        };
        let be = match BuyerEconomics::new(procurement_cost, delta_u, 0.0) {
            Ok(be) => be,
            Err(err) => return fail(err),
        };
        let rm = match RiskModel::cara(cara_beta) {
            Ok(rm) => rm,
            Err(err) => return fail(err),
        };
        match optimal_test_count(cost_per_test, &sc, &be, &rm, n_max) {
            Ok(curve) => {
                out!(out_n, curve.optimal_n);
                out!(out_payoff, curve.optimal_payoff);
                clear_last_error();
                ChainprobeStatus::Ok
            }
            Err(err) => fail(err),
        }
    })
}

/// Opaque handle to an analytic AROC curve.
pub struct ChainprobeArocCurve {
    inner: ArocCurve,
}

/// Build the analytic Gaussian AROC curve at detectability `d` with
/// `grid_size` threshold points. The returned handle must be released with
/// [`chainprobe_aroc_curve_free`].
#[unsafe(no_mangle)]
pub extern "C" fn chainprobe_aroc_curve_new(
    d: f64,
    grid_size: u64,
    out_curve: *mut *mut ChainprobeArocCurve,
) -> ChainprobeStatus {
    guarded(|| {
        let grid = match usize::try_from(grid_size) {
            Ok(g) => g,
            Err(_) => {
                set_last_error("grid_size does not fit in usize");
                return ChainprobeStatus::InvalidArgument;
            }
        };
        match aroc_curve_gaussian(d, grid) {
            Ok(curve) => {
                let handle = Box::into_raw(Box::new(ChainprobeArocCurve { inner: curve }));
                out!(out_curve, handle);
                clear_last_error();
                ChainprobeStatus::Ok
            }
            Err(err) => fail(err),
        }
    })
}

/// # Safety
/// `curve` must be a live handle from [`chainprobe_aroc_curve_new`].
unsafe fn curve_ref<'a>(
    curve: *const ChainprobeArocCurve,
) -> Result<&'a ChainprobeArocCurve, ChainprobeStatus> {
    if curve.is_null() {
        return Err(fail_null());
    }
    Ok(unsafe { &*curve })
}

/// Number of points on the curve (grid points plus the two exact endpoints).
#[unsafe(no_mangle)]
pub extern "C" fn chainprobe_aroc_curve_len(
    curve: *const ChainprobeArocCurve,
    out_len: *mut u64,
) -> ChainprobeStatus {
    guarded(|| {
        let handle = match unsafe { curve_ref(curve) } {
            Ok(h) => h,
            Err(status) => return status,
        };
        out!(out_len, handle.inner.points().len() as u64);
        clear_last_error();
        ChainprobeStatus::Ok
    })
}

/// Read one curve point. Points are ordered by nondecreasing `P_U`.
#[unsafe(no_mangle)]
pub extern "C" fn chainprobe_aroc_curve_point(
    curve: *const ChainprobeArocCurve,
    index: u64,
    out_tau: *mut f64,
    out_p_u: *mut f64,
    out_p_a: *mut f64,
) -> ChainprobeStatus {
    guarded(|| {
        let handle = match unsafe { curve_ref(curve) } {
            Ok(h) => h,
            Err(status) => return status,
        };
        let points = handle.inner.points();
        let Some(point) = usize::try_from(index).ok().and_then(|i| points.get(i)) else {
            set_last_error("curve point index out of range");
            return ChainprobeStatus::InvalidArgument;
        };
        out!(out_tau, point.tau);
        out!(out_p_u, point.p_u);
        out!(out_p_a, point.p_a);
        clear_last_error();
        ChainprobeStatus::Ok
    })
}

/// Trapezoidal area under the curve.
#[unsafe(no_mangle)]
pub extern "C" fn chainprobe_aroc_curve_auc(
    curve: *const ChainprobeArocCurve,
    out_auc: *mut f64,
) -> ChainprobeStatus {
    guarded(|| {
        let handle = match unsafe { curve_ref(curve) } {
            Ok(h) => h,
            Err(status) => return status,
        };
        match auc_numeric(&handle.inner) {
            Ok(auc) => {
                out!(out_auc, auc);
                clear_last_error();
                ChainprobeStatus::Ok
            }
            Err(err) => fail(err),
        }
    })
}

/// Run the four curve property checks (endpoints, slope, concavity,
/// dominance); writes 1 when all pass, 0 otherwise.
#[unsafe(no_mangle)]
pub extern "C" fn chainprobe_aroc_curve_properties_pass(
    curve: *const ChainprobeArocCurve,
    out_pass: *mut u8,
) -> ChainprobeStatus {
    guarded(|| {
        let handle = match unsafe { curve_ref(curve) } {
            Ok(h) => h,
            Err(status) => return status,
        };
        let report = validate_aroc_properties(&handle.inner);
        out!(out_pass, report.all_pass() as u8);
        clear_last_error();
        ChainprobeStatus::Ok
    })
}

/// Release a curve handle. A null pointer is a no-op.
#[unsafe(no_mangle)]
pub extern "C" fn chainprobe_aroc_curve_free(curve: *mut ChainprobeArocCurve) {
    if curve.is_null() {
        return;
    }
    // SAFETY: the caller promises this is an unfreed handle from
    // chainprobe_aroc_curve_new.
    drop(unsafe { Box::from_raw(curve) });
}

/// Run a scenario config file, writing its CSV artifacts and manifest.
///
/// `seed_override` may be null to use the config's seed; `out_dir_override`
/// may be null to use the config's output directory. On success writes the
/// number of emitted artifacts.
#[unsafe(no_mangle)]
pub extern "C" fn chainprobe_run_scenario(
    config_path: *const c_char,
    seed_override: *const u64,
    out_dir_override: *const c_char,
    out_artifact_count: *mut u64,
) -> ChainprobeStatus {
    guarded(|| {
        if config_path.is_null() {
            return fail_null();
        }
        let Ok(config) = unsafe { CStr::from_ptr(config_path) }.to_str() else {
            set_last_error("config path is not valid UTF-8");
            return ChainprobeStatus::InvalidUtf8;
        };
        let out_dir = if out_dir_override.is_null() {
            None
        } else {
            match unsafe { CStr::from_ptr(out_dir_override) }.to_str() {
                Ok(dir) => Some(dir.to_owned()),
                Err(_) => {
                    set_last_error("output directory is not valid UTF-8");
                    return ChainprobeStatus::InvalidUtf8;
                }
            }
        };
        let seed = if seed_override.is_null() {
            None
        } else {
            Some(unsafe { *seed_override })
        };
        match run_scenario(Path::new(config), seed, out_dir.as_deref().map(Path::new)) {
            Ok(paths) => {
                out!(out_artifact_count, paths.len() as u64);
                clear_last_error();
                ChainprobeStatus::Ok
            }
            Err(err) => {
                let status = match &err {
                    ScenarioError::Parse(_) => ChainprobeStatus::ConfigParse,
                    ScenarioError::Invalid(_) => ChainprobeStatus::ConfigInvalid,
                    ScenarioError::Runtime(Error::Io(_)) => ChainprobeStatus::IoError,
                    ScenarioError::Runtime(_) => ChainprobeStatus::RuntimeError,
                };
                set_last_error(&err.to_string());
                status
            }
        }
    })
}
