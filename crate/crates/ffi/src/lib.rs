//! C ABI over the ctglab core.
//!
//! MDPs and policies cross the boundary as opaque handles created by the
//! `*_from_json` / `ctg_make_*` functions and released with the matching
//! `*_free`. Every entry point returns a [`CtgStatus`]; on failure a message
//! is kept per thread and read with [`ctg_last_error_message`]. Panics never
//! unwind into C.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use ctglab::envs::{make_cliff_corridor, CliffParams};
use ctglab::harness::{run_to_dir, ExperimentConfig};
use ctglab::mdp::{
    exact_q, exact_state_distributions, finite_horizon_optimal_policy, policy_value, validate_mdp, MdpSpec, Policy,
};
use ctglab::Error;

/// Result of every call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CtgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidSpec = 4,
    DimensionMismatch = 5,
    BufferTooSmall = 6,
    Incompatible = 7,
    Config = 8,
    MissingData = 9,
    Io = 10,
    Panic = 11,
    Internal = 12,
}

/// Opaque MDP handle.
pub struct CtgMdp {
    spec: MdpSpec,
}

/// Opaque policy handle.
pub struct CtgPolicy {
    policy: Policy,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(CtgStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::InvalidSpec(_) => CtgStatus::InvalidSpec,
            Error::DimensionMismatch(_) | Error::ShapeMismatch { .. } => CtgStatus::DimensionMismatch,
            Error::Incompatible(_) | Error::NonMarkov(_) => CtgStatus::Incompatible,
            Error::Config(_) | Error::InvalidArgument(_) | Error::OutOfRange { .. } => CtgStatus::Config,
            Error::MissingData(_) => CtgStatus::MissingData,
            Error::Json(_) => CtgStatus::Parse,
            Error::Io(_) => CtgStatus::Io,
            Error::Empty(_) | Error::NonFinite(_) => CtgStatus::Internal,
        };
        Failure(status, e.to_string())
    }
}

type FfiResult<T> = Result<T, Failure>;

fn null(what: &str) -> Failure {
    Failure(CtgStatus::NullPointer, format!("null pointer: {what}"))
}

/// Runs `f`, converting errors and panics into a status and a stored message.
fn guard(f: impl FnOnce() -> FfiResult<()>) -> CtgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CtgStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(&format!("panic: {msg}"));
            CtgStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> FfiResult<&'a str> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(CtgStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> FfiResult<&'a T> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> FfiResult<()> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn into_c_string(s: String) -> FfiResult<*mut c_char> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Failure(CtgStatus::Internal, "string contains a NUL byte".into()))
}

/// Copies `values` into `buf` if it fits; always reports the needed length.
unsafe fn fill_buffer(values: &[f64], buf: *mut f64, len: usize, required: *mut usize) -> FfiResult<()> {
    write_out(required, values.len(), "required")?;
    if len < values.len() {
        return Err(Failure(
            CtgStatus::BufferTooSmall,
            format!("buffer holds {len} values, {} needed", values.len()),
        ));
    }
    if buf.is_null() {
        return Err(null("buf"));
    }
    ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len());
    Ok(())
}

/// Message for the last failed call on this thread, or NULL. Valid until the
/// next failing call on the same thread; do not free.
#[no_mangle]
pub extern "C" fn ctg_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses and validates an MDP from JSON.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ctg_mdp_from_json(json: *const c_char, out: *mut *mut CtgMdp) -> CtgStatus {
    guard(|| {
        let text = read_str(json, "json")?;
        let spec = MdpSpec::from_json(text)?;
        spec.ensure_valid()?;
        write_out(out, Box::into_raw(Box::new(CtgMdp { spec })), "out")
    })
}

/// Releases an MDP handle. NULL is ignored.
///
/// # Safety
/// `mdp` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ctg_mdp_free(mdp: *mut CtgMdp) {
    if !mdp.is_null() {
        drop(Box::from_raw(mdp));
    }
}

/// Counts structural violations in an MDP given as JSON; 0 means valid.
///
/// # Safety
/// `json` must be a NUL-terminated string; `num_violations` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ctg_mdp_validate(json: *const c_char, num_violations: *mut usize) -> CtgStatus {
    guard(|| {
        let text = read_str(json, "json")?;
        let spec = MdpSpec::from_json(text)?;
        let report = validate_mdp(&spec);
        if let Some(first) = report.violations.first() {
            set_last_error(&first.to_string());
        }
        write_out(num_violations, report.violations.len(), "num_violations")
    })
}

/// Number of states, actions and steps.
///
/// # Safety
/// `mdp` must be a live handle; the out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn ctg_mdp_dims(
    mdp: *const CtgMdp,
    num_states: *mut usize,
    num_actions: *mut usize,
    horizon: *mut usize,
) -> CtgStatus {
    guard(|| {
        let spec = &deref(mdp, "mdp")?.spec;
        write_out(num_states, spec.num_states, "num_states")?;
        write_out(num_actions, spec.num_actions, "num_actions")?;
        write_out(horizon, spec.horizon, "horizon")
    })
}

/// Builds the cliff corridor with default costs; returns the MDP and its expert.
///
/// # Safety
/// Both out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn ctg_make_cliff_corridor(
    width: usize,
    height: usize,
    slip: f64,
    horizon: usize,
    out_mdp: *mut *mut CtgMdp,
    out_expert: *mut *mut CtgPolicy,
) -> CtgStatus {
    guard(|| {
        if out_mdp.is_null() || out_expert.is_null() {
            return Err(null("out"));
        }
        let env = make_cliff_corridor(&CliffParams {
            width,
            height,
            slip,
            horizon,
            ..CliffParams::default()
        })?;
        write_out(out_mdp, Box::into_raw(Box::new(CtgMdp { spec: env.spec })), "out_mdp")?;
        write_out(out_expert, Box::into_raw(Box::new(CtgPolicy { policy: env.expert })), "out_expert")
    })
}

/// Optimal deterministic policy by backward induction.
///
/// # Safety
/// `mdp` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ctg_optimal_policy(mdp: *const CtgMdp, out: *mut *mut CtgPolicy) -> CtgStatus {
    guard(|| {
        let (policy, _) = finite_horizon_optimal_policy(&deref(mdp, "mdp")?.spec);
        write_out(out, Box::into_raw(Box::new(CtgPolicy { policy })), "out")
    })
}

/// Parses a policy from JSON.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ctg_policy_from_json(json: *const c_char, out: *mut *mut CtgPolicy) -> CtgStatus {
    guard(|| {
        let policy: Policy = serde_json::from_str(read_str(json, "json")?).map_err(Error::from)?;
        write_out(out, Box::into_raw(Box::new(CtgPolicy { policy })), "out")
    })
}

/// Serializes a policy; free the result with [`ctg_string_free`].
///
/// # Safety
/// `policy` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ctg_policy_to_json(policy: *const CtgPolicy, out: *mut *mut c_char) -> CtgStatus {
    guard(|| {
        let text = serde_json::to_string(&deref(policy, "policy")?.policy).map_err(Error::from)?;
        write_out(out, into_c_string(text)?, "out")
    })
}

/// Releases a policy handle. NULL is ignored.
///
/// # Safety
/// `policy` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ctg_policy_free(policy: *mut CtgPolicy) {
    if !policy.is_null() {
        drop(Box::from_raw(policy));
    }
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ctg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Exact expected total cost of `policy` on `mdp`.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ctg_policy_value(mdp: *const CtgMdp, policy: *const CtgPolicy, out: *mut f64) -> CtgStatus {
    guard(|| {
        let j = policy_value(&deref(mdp, "mdp")?.spec, &deref(policy, "policy")?.policy)?;
        write_out(out, j, "out")
    })
}

/// Exact Q table, `T * S * A` values laid out as `[k - 1][s][a]` where `k`
/// is the number of steps remaining. `required` always receives the length;
/// a short buffer yields `CTG_STATUS_BUFFER_TOO_SMALL` and is left untouched.
///
/// # Safety
/// Handles must be live; `buf` must hold `len` doubles; `required` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ctg_exact_q(
    mdp: *const CtgMdp,
    policy: *const CtgPolicy,
    buf: *mut f64,
    len: usize,
    required: *mut usize,
) -> CtgStatus {
    guard(|| {
        let q = exact_q(&deref(mdp, "mdp")?.spec, &deref(policy, "policy")?.policy)?;
        fill_buffer(q.q_values(), buf, len, required)
    })
}

/// Exact state distribution at every step, `T * S` values laid out as
/// `[t - 1][s]`. Buffer protocol as in [`ctg_exact_q`].
///
/// # Safety
/// Handles must be live; `buf` must hold `len` doubles; `required` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ctg_state_distributions(
    mdp: *const CtgMdp,
    policy: *const CtgPolicy,
    buf: *mut f64,
    len: usize,
    required: *mut usize,
) -> CtgStatus {
    guard(|| {
        let d = exact_state_distributions(&deref(mdp, "mdp")?.spec, &deref(policy, "policy")?.policy)?;
        let flat: Vec<f64> = d.per_time.into_iter().flatten().collect();
        fill_buffer(&flat, buf, len, required)
    })
}

/// Runs an experiment from TOML text, writes its report files under
/// `out_dir`, and returns the summary document as JSON (free with
/// [`ctg_string_free`]). `out_summary` may be NULL.
///
/// # Safety
/// Strings must be NUL-terminated; `out_summary` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn ctg_run_experiment(
    config_toml: *const c_char,
    out_dir: *const c_char,
    out_summary: *mut *mut c_char,
) -> CtgStatus {
    guard(|| {
        let cfg = ExperimentConfig::from_toml(read_str(config_toml, "config_toml")?)?;
        let dir = read_str(out_dir, "out_dir")?;
        let art = run_to_dir(&cfg, Path::new(dir))?;
        if !out_summary.is_null() {
            let text = serde_json::to_string(&art.summary).map_err(Error::from)?;
            out_summary.write(into_c_string(text)?);
        }
        Ok(())
    })
}
