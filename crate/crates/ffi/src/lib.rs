//! C interface to the `merisc` simulator.
//!
//! Objects cross the boundary as opaque handles created by `merisc_*_load`
//! or `merisc_*_run` and released with the matching `_free`. Every fallible
//! call returns a [`MeriscStatus`]; on failure the message is available from
//! [`merisc_last_error`] on the same thread until the next failing call.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::fs::File;
use std::io::BufWriter;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use merisc::config::Setup;
use merisc::em::RisConfiguration;
use merisc::qos::{evaluate_cost, EvalContext};
use merisc::scenario::{run, write_results, RunResult, Variant};
use merisc::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeriscStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ConfigError = 3,
    RuntimeError = 4,
    IoError = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeriscVariant {
    MeRisc = 0,
    GaRisc = 1,
    NoRis = 2,
    RisOnly = 3,
}

impl From<MeriscVariant> for Variant {
    fn from(v: MeriscVariant) -> Self {
        match v {
            MeriscVariant::MeRisc => Variant::MeRisc,
            MeriscVariant::GaRisc => Variant::GaRisc,
            MeriscVariant::NoRis => Variant::NoRis,
            MeriscVariant::RisOnly => Variant::RisOnly,
        }
    }
}

/// Parsed configuration, geometry, state table and user trajectory.
pub struct MeriscSetup(Setup);

/// Per-step outcome of simulating one variant.
pub struct MeriscRun(RunResult);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn fail(status: MeriscStatus, msg: impl Into<String>) -> MeriscStatus {
    set_error(msg);
    status
}

fn from_error(e: Error) -> MeriscStatus {
    let status = match e {
        Error::Config(_) => MeriscStatus::ConfigError,
        Error::Io(_) | Error::Csv(_) => MeriscStatus::IoError,
        Error::Param(_) | Error::StateOutOfRange { .. } | Error::Dimension(_) => MeriscStatus::InvalidArgument,
        _ => MeriscStatus::RuntimeError,
    };
    fail(status, e.to_string())
}

fn guard(f: impl FnOnce() -> MeriscStatus) -> MeriscStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(MeriscStatus::Panic, format!("panic: {msg}"))
        }
    }
}

unsafe fn path_arg<'a>(p: *const c_char) -> Result<&'a Path, MeriscStatus> {
    if p.is_null() {
        return Err(fail(MeriscStatus::NullPointer, "path is null"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(Path::new)
        .map_err(|_| fail(MeriscStatus::InvalidArgument, "path is not valid UTF-8"))
}

/// Message of the last failure on this thread, or null. Valid until the next failing call.
#[no_mangle]
pub extern "C" fn merisc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn merisc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Loads a TOML run configuration and builds the trajectory for `seed`.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn merisc_setup_load(path: *const c_char, seed: u64, out: *mut *mut MeriscSetup) -> MeriscStatus {
    guard(|| {
        if out.is_null() {
            return fail(MeriscStatus::NullPointer, "out is null");
        }
        *out = ptr::null_mut();
        let path = match path_arg(path) {
            Ok(p) => p,
            Err(s) => return s,
        };
        match Setup::load(path, seed) {
            Ok(setup) => {
                *out = Box::into_raw(Box::new(MeriscSetup(setup)));
                MeriscStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `setup` must come from [`merisc_setup_load`] and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn merisc_setup_free(setup: *mut MeriscSetup) {
    if !setup.is_null() {
        drop(Box::from_raw(setup));
    }
}

/// # Safety
/// `setup` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn merisc_setup_num_steps(setup: *const MeriscSetup) -> usize {
    setup.as_ref().map_or(0, |s| s.0.trajectory.num_steps())
}

/// # Safety
/// `setup` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn merisc_setup_num_users(setup: *const MeriscSetup) -> usize {
    setup.as_ref().map_or(0, |s| s.0.trajectory.num_users())
}

/// Number of RIS meta-atoms, the length of a configuration.
///
/// # Safety
/// `setup` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn merisc_setup_num_patches(setup: *const MeriscSetup) -> usize {
    setup.as_ref().map_or(0, |s| s.0.scene.num_ris())
}

/// Number of states per meta-atom; states are numbered from 1.
///
/// # Safety
/// `setup` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn merisc_setup_num_states(setup: *const MeriscSetup) -> u16 {
    setup.as_ref().map_or(0, |s| s.0.table.num_states())
}

/// Worst-user throughput (bit/s/Hz) of `states` at time step `step` (1-based).
///
/// # Safety
/// `setup` must be a live handle, `states` must point to `len` readable values
/// and `worst` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn merisc_setup_evaluate(
    setup: *const MeriscSetup,
    step: usize,
    states: *const u16,
    len: usize,
    worst: *mut f64,
) -> MeriscStatus {
    guard(|| {
        let Some(setup) = setup.as_ref() else {
            return fail(MeriscStatus::NullPointer, "setup is null");
        };
        if states.is_null() || worst.is_null() {
            return fail(MeriscStatus::NullPointer, "states or worst is null");
        }
        let s = &setup.0;
        let Some(snap) = s.trajectory.snapshots.iter().find(|snap| snap.step == step) else {
            return fail(MeriscStatus::InvalidArgument, format!("no time step {step}"));
        };
        let config = RisConfiguration(std::slice::from_raw_parts(states, len).to_vec());
        let report = EvalContext::new(&s.scene, &s.table, snap, s.config.total_power, s.config.noise_power)
            .and_then(|ctx| evaluate_cost(&config, &ctx));
        match report {
            Ok(r) => {
                *worst = r.worst;
                MeriscStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Simulates every step of the trajectory with one variant.
///
/// # Safety
/// `setup` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn merisc_run(
    setup: *const MeriscSetup,
    variant: MeriscVariant,
    seed: u64,
    out: *mut *mut MeriscRun,
) -> MeriscStatus {
    guard(|| {
        if out.is_null() {
            return fail(MeriscStatus::NullPointer, "out is null");
        }
        *out = ptr::null_mut();
        let Some(setup) = setup.as_ref() else {
            return fail(MeriscStatus::NullPointer, "setup is null");
        };
        let s = &setup.0;
        match run(variant.into(), &s.experiment(s.config.noise_power), seed) {
            Ok(r) => {
                *out = Box::into_raw(Box::new(MeriscRun(r)));
                MeriscStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `run` must come from [`merisc_run`] and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn merisc_run_free(run: *mut MeriscRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// # Safety
/// `run` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn merisc_run_num_steps(run: *const MeriscRun) -> usize {
    run.as_ref().map_or(0, |r| r.0.steps.len())
}

/// Time-averaged worst-user throughput (bit/s/Hz), NaN for a null handle.
///
/// # Safety
/// `run` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn merisc_run_mean_worst(run: *const MeriscRun) -> f64 {
    run.as_ref().map_or(f64::NAN, |r| r.0.mean_worst())
}

/// Worst-user throughput of step `index` (0-based), NaN when out of range.
///
/// # Safety
/// `run` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn merisc_run_worst(run: *const MeriscRun, index: usize) -> f64 {
    run.as_ref()
        .and_then(|r| r.0.steps.get(index))
        .map_or(f64::NAN, |s| s.report.worst)
}

/// Copies the configuration chosen at step `index` (0-based) into `states`.
///
/// Writes the configuration length to `written`; fails with `InvalidArgument`
/// when `len` is too small, in which case `written` holds the required length.
///
/// # Safety
/// `run` must be a live handle, `states` must point to `len` writable values
/// and `written` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn merisc_run_config(
    run: *const MeriscRun,
    index: usize,
    states: *mut u16,
    len: usize,
    written: *mut usize,
) -> MeriscStatus {
    guard(|| {
        let Some(run) = run.as_ref() else {
            return fail(MeriscStatus::NullPointer, "run is null");
        };
        if written.is_null() {
            return fail(MeriscStatus::NullPointer, "written is null");
        }
        let Some(step) = run.0.steps.get(index) else {
            return fail(MeriscStatus::InvalidArgument, format!("step index {index} out of range"));
        };
        let config = step.config.states();
        *written = config.len();
        if len < config.len() {
            return fail(MeriscStatus::InvalidArgument, format!("buffer holds {len} states, {} needed", config.len()));
        }
        if states.is_null() {
            return fail(MeriscStatus::NullPointer, "states is null");
        }
        ptr::copy_nonoverlapping(config.as_ptr(), states, config.len());
        MeriscStatus::Ok
    })
}

/// Writes the per-step results table as CSV.
///
/// # Safety
/// `run` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn merisc_run_write_csv(run: *const MeriscRun, path: *const c_char) -> MeriscStatus {
    guard(|| {
        let Some(run) = run.as_ref() else {
            return fail(MeriscStatus::NullPointer, "run is null");
        };
        let path = match path_arg(path) {
            Ok(p) => p,
            Err(s) => return s,
        };
        let file = match File::create(path) {
            Ok(f) => f,
            Err(e) => return fail(MeriscStatus::IoError, format!("cannot create {}: {e}", path.display())),
        };
        match write_results(BufWriter::new(file), std::slice::from_ref(&run.0)) {
            Ok(()) => MeriscStatus::Ok,
            Err(e) => from_error(e),
        }
    })
}
