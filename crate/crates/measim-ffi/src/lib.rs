//! C ABI for the measurement compression toolkit: opaque problem handles,
//! status codes, and JSON-document entry points mirroring the CLI.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use libc::c_char;

use measim::cli::{
    cmd_verify, rates_report, simulate_report, ProblemFile, SimulateArgs, VerifyArgs,
};
use measim::error::Error;
use measim::qcore::{trace_distance, von_neumann_entropy, DensityOperator, Operator, C64};

/// Result of every fallible call. Values mirror the CLI exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasimStatus {
    Ok = 0,
    ParseError = 1,
    VerificationFailure = 2,
    SizeLimit = 3,
    InvalidArgument = 4,
    InternalError = 5,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message).unwrap_or_else(|_| CString::new("invalid error").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn status_for(err: &Error) -> MeasimStatus {
    match err {
        Error::Parse(_) => MeasimStatus::ParseError,
        Error::SizeLimit(_) => MeasimStatus::SizeLimit,
        _ => MeasimStatus::VerificationFailure,
    }
}

fn guard<F: FnOnce() -> MeasimStatus>(f: F) -> MeasimStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic".into());
            MeasimStatus::InternalError
        }
    }
}

unsafe fn required_str<'a>(ptr: *const c_char, name: &str) -> Result<&'a str, MeasimStatus> {
    if ptr.is_null() {
        set_error(format!("{name} is null"));
        return Err(MeasimStatus::InvalidArgument);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error(format!("{name} is not valid UTF-8"));
        MeasimStatus::InvalidArgument
    })
}

fn hand_out_string(text: String, out: *mut *mut c_char) -> MeasimStatus {
    match CString::new(text) {
        Ok(c) => {
            unsafe { *out = c.into_raw() };
            MeasimStatus::Ok
        }
        Err(_) => {
            set_error("output contained an interior NUL".into());
            MeasimStatus::InternalError
        }
    }
}

/// Opaque handle to a loaded problem file.
pub struct MeasimProblem {
    file: ProblemFile,
}

/// Library version as a static string; do not free.
#[no_mangle]
pub extern "C" fn measim_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Last error detail for the calling thread, or NULL. Free with
/// `measim_string_free`.
#[no_mangle]
pub extern "C" fn measim_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|slot| match slot.borrow().as_ref() {
        Some(c) => c.clone().into_raw(),
        None => std::ptr::null_mut(),
    })
}

/// Free a string returned by this library. NULL is accepted.
///
/// # Safety
/// `s` must have been returned by a `measim_*` function and not freed before.
#[no_mangle]
pub unsafe extern "C" fn measim_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parse a problem document (the CLI's JSON schema) into a handle.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn measim_problem_from_json(
    json: *const c_char,
    out: *mut *mut MeasimProblem,
) -> MeasimStatus {
    guard(|| {
        if out.is_null() {
            set_error("out is null".into());
            return MeasimStatus::InvalidArgument;
        }
        let text = match required_str(json, "json") {
            Ok(t) => t,
            Err(s) => return s,
        };
        match ProblemFile::from_json(text) {
            Ok(file) => {
                *out = Box::into_raw(Box::new(MeasimProblem { file }));
                MeasimStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                status_for(&e)
            }
        }
    })
}

/// Destroy a problem handle. NULL is accepted.
///
/// # Safety
/// `p` must have come from `measim_problem_from_json` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn measim_problem_free(p: *mut MeasimProblem) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Compute a rate region; `theorem` is one of the CLI names (`mc`,
/// `mc-instr`, `nonfeedback`, `cdcqsi`, `mcqsi`, `mcqsi-nonfeedback`,
/// `uncertainty`). The JSON report is returned through `out_json`.
///
/// # Safety
/// `p` must be a live handle; `theorem` NUL-terminated; `out_json` valid.
#[no_mangle]
pub unsafe extern "C" fn measim_rates_json(
    p: *const MeasimProblem,
    theorem: *const c_char,
    out_json: *mut *mut c_char,
) -> MeasimStatus {
    guard(|| {
        if p.is_null() || out_json.is_null() {
            set_error("null handle or output pointer".into());
            return MeasimStatus::InvalidArgument;
        }
        let theorem = match required_str(theorem, "theorem") {
            Ok(t) => t,
            Err(s) => return s,
        };
        let problem = &(*p).file;
        match rates_over_handle(problem, theorem) {
            Ok(json) => hand_out_string(json, out_json),
            Err(e) => {
                set_error(e.to_string());
                status_for(&e)
            }
        }
    })
}

fn rates_over_handle(problem: &ProblemFile, theorem: &str) -> Result<String, Error> {
    rates_report(problem, theorem, vec!["measim-ffi".into(), theorem.into()]).map(|r| r.to_json())
}

/// Simulation parameters as JSON, mirroring the CLI flags:
/// `{"protocol": "mc", "n": 3, "l_size": 64, "m_size": 4, "rate": 1.5,
///   "hash_rate": 1.0, "delta": 0.3, "eps": 0.3, "trials": 50, "seed": 7}`.
/// Missing numeric fields take the CLI defaults.
///
/// # Safety
/// `p` must be a live handle; `params_json` NUL-terminated; `out_json` valid.
#[no_mangle]
pub unsafe extern "C" fn measim_simulate_json(
    p: *const MeasimProblem,
    params_json: *const c_char,
    out_json: *mut *mut c_char,
) -> MeasimStatus {
    guard(|| {
        if p.is_null() || out_json.is_null() {
            set_error("null handle or output pointer".into());
            return MeasimStatus::InvalidArgument;
        }
        let params = match required_str(params_json, "params_json") {
            Ok(t) => t,
            Err(s) => return s,
        };
        let problem = &(*p).file;
        match simulate_over_handle(problem, params) {
            Ok(json) => hand_out_string(json, out_json),
            Err(e) => {
                set_error(e.to_string());
                status_for(&e)
            }
        }
    })
}

#[derive(serde::Deserialize)]
struct FfiSimulateParams {
    protocol: String,
    #[serde(default = "default_n")]
    n: usize,
    l_size: Option<usize>,
    m_size: Option<usize>,
    #[serde(default = "default_rate")]
    rate: f64,
    #[serde(default = "default_rate")]
    hash_rate: f64,
    #[serde(default = "default_delta")]
    delta: f64,
    #[serde(default = "default_delta")]
    eps: f64,
    #[serde(default = "default_trials")]
    trials: usize,
    #[serde(default = "default_seed")]
    seed: u64,
}

fn default_n() -> usize {
    2
}
fn default_rate() -> f64 {
    1.0
}
fn default_delta() -> f64 {
    0.3
}
fn default_trials() -> usize {
    50
}
fn default_seed() -> u64 {
    7
}

fn simulate_over_handle(problem: &ProblemFile, params: &str) -> Result<String, Error> {
    let params: FfiSimulateParams =
        serde_json::from_str(params).map_err(|e| Error::Parse(format!("params: {e}")))?;
    let args = SimulateArgs {
        protocol: params.protocol,
        n: params.n,
        l_size: params.l_size,
        m_size: params.m_size,
        rate: params.rate,
        hash_rate: params.hash_rate,
        delta: params.delta,
        eps: params.eps,
        trials: params.trials,
        seed: params.seed,
        series: None,
    };
    simulate_report(problem, &args, vec!["measim-ffi".into()], 1).map(|(r, _)| r.to_json())
}

/// Run a lemma verification suite (`gentle`, `gentle-ensemble`, `trace-ineq`,
/// `sen`, `chernoff`, `entropy-close`, `equivalence`). Returns
/// `VerificationFailure` when violations were found; the report still lands
/// in `out_json`.
///
/// # Safety
/// `suite` must be NUL-terminated and `out_json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn measim_verify_json(
    suite: *const c_char,
    instances: usize,
    seed: u64,
    out_json: *mut *mut c_char,
) -> MeasimStatus {
    guard(|| {
        if out_json.is_null() {
            set_error("out_json is null".into());
            return MeasimStatus::InvalidArgument;
        }
        let suite = match required_str(suite, "suite") {
            Ok(t) => t,
            Err(s) => return s,
        };
        let args = VerifyArgs {
            suite: suite.into(),
            instances,
            seed,
            threads: 1,
        };
        match cmd_verify(&args, vec!["measim-ffi".into(), suite.into()]) {
            Ok(report) => {
                let pass = report.all_checks_pass();
                let status = hand_out_string(report.to_json(), out_json);
                if status != MeasimStatus::Ok {
                    return status;
                }
                if pass {
                    MeasimStatus::Ok
                } else {
                    set_error("suite reported violations".into());
                    MeasimStatus::VerificationFailure
                }
            }
            Err(e) => {
                set_error(e.to_string());
                status_for(&e)
            }
        }
    })
}

unsafe fn density_from_raw(
    entries: *const f64,
    dim: usize,
    name: &str,
) -> Result<DensityOperator, MeasimStatus> {
    if entries.is_null() {
        set_error(format!("{name} is null"));
        return Err(MeasimStatus::InvalidArgument);
    }
    if dim == 0 || dim > 4096 {
        set_error(format!("{name}: dimension {dim} out of range"));
        return Err(MeasimStatus::InvalidArgument);
    }
    let raw = std::slice::from_raw_parts(entries, dim * dim * 2);
    let op = Operator::from_fn(dim, |i, j| {
        let k = 2 * (i * dim + j);
        C64::new(raw[k], raw[k + 1])
    });
    DensityOperator::new(op).map_err(|e| {
        set_error(e.to_string());
        MeasimStatus::VerificationFailure
    })
}

/// Von Neumann entropy in bits of a density matrix given as row-major
/// interleaved `re, im` doubles (`2 * dim * dim` values).
///
/// # Safety
/// `entries` must point to `2 * dim * dim` readable doubles; `out_bits` must
/// be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn measim_von_neumann_entropy(
    entries: *const f64,
    dim: usize,
    out_bits: *mut f64,
) -> MeasimStatus {
    guard(|| {
        if out_bits.is_null() {
            set_error("out_bits is null".into());
            return MeasimStatus::InvalidArgument;
        }
        match density_from_raw(entries, dim, "entries") {
            Ok(rho) => {
                *out_bits = von_neumann_entropy(&rho);
                MeasimStatus::Ok
            }
            Err(s) => s,
        }
    })
}

/// Trace distance between two density matrices in the same layout as
/// `measim_von_neumann_entropy`.
///
/// # Safety
/// `a` and `b` must each point to `2 * dim * dim` readable doubles; `out`
/// must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn measim_trace_distance(
    a: *const f64,
    b: *const f64,
    dim: usize,
    out: *mut f64,
) -> MeasimStatus {
    guard(|| {
        if out.is_null() {
            set_error("out is null".into());
            return MeasimStatus::InvalidArgument;
        }
        let rho = match density_from_raw(a, dim, "a") {
            Ok(r) => r,
            Err(s) => return s,
        };
        let sigma = match density_from_raw(b, dim, "b") {
            Ok(r) => r,
            Err(s) => return s,
        };
        match trace_distance(&rho, &sigma) {
            Ok(d) => {
                *out = d;
                MeasimStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                MeasimStatus::VerificationFailure
            }
        }
    })
}
