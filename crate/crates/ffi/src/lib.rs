//! C ABI over the `tradecurrency` engine.
//!
//! Every object is an opaque handle created by a `tc_*_from_*` or
//! `tc_config_default` call and released by the matching `tc_*_free`.
//! Functions that can fail return a [`TcStatus`]; the message of the last
//! failure on the calling thread is available from [`tc_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use tradecurrency::commands::Prepared;
use tradecurrency::config::RunConfig;
use tradecurrency::wtn::{load_trade_flows, read_flow_file};
use tradecurrency::{CountryIndex, EnsembleResult, Error, TradeMatrix};

/// Status codes. The nonzero values match the CLI exit codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TcStatus {
    Ok = 0,
    DataError = 1,
    ParamError = 2,
    NonConvergence = 3,
    NullPointer = 4,
    Panic = 5,
}

/// Trade matrix of one year.
pub struct TcMatrix(TradeMatrix);

/// Run configuration plus the strict flag.
pub struct TcConfig {
    config: RunConfig,
    strict: bool,
}

/// Ensemble statistics.
pub struct TcResult {
    result: EnsembleResult,
    codes: Vec<String>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn fail(e: Error) -> TcStatus {
    let status = match e.exit_code() {
        1 => TcStatus::DataError,
        3 => TcStatus::NonConvergence,
        _ => TcStatus::ParamError,
    };
    set_error(e.to_string());
    status
}

fn null(what: &str) -> TcStatus {
    set_error(format!("{what} is null"));
    TcStatus::NullPointer
}

fn guard(f: impl FnOnce() -> TcStatus) -> TcStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| {
        set_error("internal panic");
        TcStatus::Panic
    })
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, TcStatus> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error(format!("{what} is not valid UTF-8"));
        TcStatus::ParamError
    })
}

fn emit<T>(out: *mut *mut T, value: T) -> TcStatus {
    // SAFETY: callers check `out` for null first.
    unsafe { *out = Box::into_raw(Box::new(value)) };
    TcStatus::Ok
}

/// Message of the last failure on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn tc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Release a string returned by this library.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn tc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Load `year` from a flow CSV.
///
/// # Safety
/// `path` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tc_matrix_from_csv(
    path: *const c_char,
    year: i32,
    out: *mut *mut TcMatrix,
) -> TcStatus {
    guard(|| {
        if out.is_null() {
            return null("out");
        }
        let path = match str_arg(path, "path") {
            Ok(p) => p,
            Err(s) => return s,
        };
        match read_flow_file(Path::new(path)).and_then(|r| load_trade_flows(&r, year)) {
            Ok((m, _)) => emit(out, TcMatrix(m)),
            Err(e) => fail(e),
        }
    })
}

/// Build a matrix from `n` ISO codes and a row-major `n * n` array where
/// `flows[i * n + e]` is the money exported from `e` to `i`.
///
/// # Safety
/// `codes` must hold `n` nul-terminated strings, `flows` `n * n` doubles,
/// and `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tc_matrix_from_dense(
    year: i32,
    codes: *const *const c_char,
    n: usize,
    flows: *const f64,
    out: *mut *mut TcMatrix,
) -> TcStatus {
    guard(|| {
        if out.is_null() {
            return null("out");
        }
        if codes.is_null() {
            return null("codes");
        }
        if flows.is_null() {
            return null("flows");
        }
        let mut names = Vec::with_capacity(n);
        for i in 0..n {
            match str_arg(*codes.add(i), "country code") {
                Ok(s) => names.push(s.to_string()),
                Err(s) => return s,
            }
        }
        if let Some(bad) = names
            .iter()
            .find(|c| !tradecurrency::country::is_known_code(c))
        {
            set_error(format!("unknown country code {bad}"));
            return TcStatus::DataError;
        }
        let values = std::slice::from_raw_parts(flows, n * n).to_vec();
        match CountryIndex::new(names).and_then(|idx| TradeMatrix::from_dense(year, idx, values)) {
            Ok(m) => emit(out, TcMatrix(m)),
            Err(e) => fail(e),
        }
    })
}

/// Number of countries, 0 for a null handle.
///
/// # Safety
/// `m` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tc_matrix_len(m: *const TcMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.0.len())
}

/// Total trade volume M, 0 for a null handle.
///
/// # Safety
/// `m` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tc_matrix_total_volume(m: *const TcMatrix) -> f64 {
    m.as_ref().map_or(0.0, |m| m.0.total_volume())
}

/// ISO code of country `i`. Free the string with [`tc_string_free`].
///
/// # Safety
/// `m` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tc_matrix_country_code(
    m: *const TcMatrix,
    i: usize,
    out: *mut *mut c_char,
) -> TcStatus {
    guard(|| {
        let Some(m) = m.as_ref() else {
            return null("matrix");
        };
        if out.is_null() {
            return null("out");
        }
        if i >= m.0.len() {
            set_error(format!("country {i} out of range"));
            return TcStatus::ParamError;
        }
        *out = CString::new(m.0.index().code(i))
            .expect("ascii code")
            .into_raw();
        TcStatus::Ok
    })
}

/// # Safety
/// `m` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tc_matrix_free(m: *mut TcMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Default configuration: USD/EUR/BRI with the built-in seed groups.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tc_config_default(out: *mut *mut TcConfig) -> TcStatus {
    guard(|| {
        if out.is_null() {
            return null("out");
        }
        emit(
            out,
            TcConfig {
                config: RunConfig::default(),
                strict: false,
            },
        )
    })
}

/// Parse a TOML configuration (same keys as the CLI `--config` file).
///
/// # Safety
/// `text` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tc_config_from_toml(
    text: *const c_char,
    out: *mut *mut TcConfig,
) -> TcStatus {
    guard(|| {
        if out.is_null() {
            return null("out");
        }
        let text = match str_arg(text, "text") {
            Ok(t) => t,
            Err(s) => return s,
        };
        match RunConfig::from_toml_str(text) {
            Ok(config) => emit(
                out,
                TcConfig {
                    config,
                    strict: false,
                },
            ),
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `c` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn tc_config_set_runs(c: *mut TcConfig, n_runs: usize) -> TcStatus {
    guard(|| {
        let Some(c) = c.as_mut() else {
            return null("config");
        };
        if n_runs == 0 {
            set_error("n_runs must be at least 1");
            return TcStatus::ParamError;
        }
        c.config.n_runs = n_runs;
        TcStatus::Ok
    })
}

/// # Safety
/// `c` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn tc_config_set_seed(c: *mut TcConfig, master_seed: u64) -> TcStatus {
    guard(|| {
        let Some(c) = c.as_mut() else {
            return null("config");
        };
        c.config.master_seed = master_seed;
        TcStatus::Ok
    })
}

/// When set, [`tc_run_ensemble`] fails with `TC_STATUS_NON_CONVERGENCE` if
/// any run misses a fixed point.
///
/// # Safety
/// `c` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn tc_config_set_strict(c: *mut TcConfig, strict: bool) -> TcStatus {
    guard(|| {
        let Some(c) = c.as_mut() else {
            return null("config");
        };
        c.strict = strict;
        TcStatus::Ok
    })
}

/// Number of currencies, 0 for a null handle.
///
/// # Safety
/// `c` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tc_config_currency_count(c: *const TcConfig) -> usize {
    c.as_ref().map_or(0, |c| c.config.currencies.len())
}

/// # Safety
/// `c` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tc_config_free(c: *mut TcConfig) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Run the ensemble described by `c` on `m`. `workers` = 0 uses the
/// default thread pool; the result does not depend on it.
///
/// # Safety
/// `m` and `c` must be live handles and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tc_run_ensemble(
    m: *const TcMatrix,
    c: *const TcConfig,
    workers: usize,
    out: *mut *mut TcResult,
) -> TcStatus {
    guard(|| {
        let Some(m) = m.as_ref() else {
            return null("matrix");
        };
        let Some(c) = c.as_ref() else {
            return null("config");
        };
        if out.is_null() {
            return null("out");
        }
        let run = || -> tradecurrency::Result<TcResult> {
            let prepared = Prepared::new(m.0.clone(), &c.config)?;
            let result = prepared.ensemble(&c.config, (workers > 0).then_some(workers))?;
            if c.strict && result.non_converged_runs() > 0 {
                return Err(Error::RunsNotConverged {
                    runs: result.non_converged_runs(),
                    total: result.n_runs,
                });
            }
            Ok(TcResult {
                result,
                codes: prepared.currencies.currencies.clone(),
            })
        };
        match run() {
            Ok(r) => emit(out, r),
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `r` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tc_result_currency_count(r: *const TcResult) -> usize {
    r.as_ref().map_or(0, |r| r.codes.len())
}

/// # Safety
/// `r` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tc_result_country_count(r: *const TcResult) -> usize {
    r.as_ref().map_or(0, |r| r.result.modal_tcp.len())
}

/// # Safety
/// `r` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tc_result_convergence_rate(r: *const TcResult) -> f64 {
    r.as_ref().map_or(0.0, |r| r.result.convergence_rate)
}

unsafe fn copy_out<T: Copy>(src: &[T], out: *mut T, len: usize) -> TcStatus {
    if out.is_null() {
        return null("out");
    }
    if len != src.len() {
        set_error(format!("buffer holds {len} values, {} needed", src.len()));
        return TcStatus::ParamError;
    }
    ptr::copy_nonoverlapping(src.as_ptr(), out, len);
    TcStatus::Ok
}

/// Copy the mean final fraction per currency into `out[0..len]`; `len`
/// must equal the currency count.
///
/// # Safety
/// `r` must be a live handle and `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn tc_result_mean_fractions(
    r: *const TcResult,
    out: *mut f64,
    len: usize,
) -> TcStatus {
    guard(|| match r.as_ref() {
        Some(r) => copy_out(&r.result.mean_final_fractions, out, len),
        None => null("result"),
    })
}

/// Standard errors of [`tc_result_mean_fractions`].
///
/// # Safety
/// `r` must be a live handle and `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn tc_result_standard_errors(
    r: *const TcResult,
    out: *mut f64,
    len: usize,
) -> TcStatus {
    guard(|| match r.as_ref() {
        Some(r) => copy_out(&r.result.standard_errors, out, len),
        None => null("result"),
    })
}

/// Modal currency id per country, in matrix order; `len` must equal the
/// country count.
///
/// # Safety
/// `r` must be a live handle and `out` must hold `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn tc_result_modal_tcp(
    r: *const TcResult,
    out: *mut u8,
    len: usize,
) -> TcStatus {
    guard(|| match r.as_ref() {
        Some(r) => {
            let ids: Vec<u8> = r.result.modal_tcp.iter().map(|c| c.0).collect();
            copy_out(&ids, out, len)
        }
        None => null("result"),
    })
}

/// Code of currency `j`. Free the string with [`tc_string_free`].
///
/// # Safety
/// `r` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tc_result_currency_code(
    r: *const TcResult,
    j: usize,
    out: *mut *mut c_char,
) -> TcStatus {
    guard(|| {
        let Some(r) = r.as_ref() else {
            return null("result");
        };
        if out.is_null() {
            return null("out");
        }
        let Some(code) = r.codes.get(j) else {
            set_error(format!("currency {j} out of range"));
            return TcStatus::ParamError;
        };
        match CString::new(code.as_str()) {
            Ok(s) => {
                *out = s.into_raw();
                TcStatus::Ok
            }
            Err(_) => {
                set_error("currency code contains a nul byte");
                TcStatus::ParamError
            }
        }
    })
}

/// # Safety
/// `r` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tc_result_free(r: *mut TcResult) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}
