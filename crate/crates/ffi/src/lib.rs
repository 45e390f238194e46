//! C ABI over the `labhh` library.
//!
//! Instances and run results are opaque heap handles owned by the caller and
//! released with the matching `*_free` function. Every fallible function
//! returns a [`LabhhStatus`]; on failure a description is available from
//! [`labhh_last_error_message`] on the same thread. Panics never cross the
//! boundary; they are reported as [`LabhhStatus::Panic`].
//!
//! Enum-typed arguments and struct fields must hold one of the declared
//! values; anything else is undefined behavior.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use labhh::bench::{BenchmarkConfig, Solver};
use labhh::controller::{ControllerParams, FeatureMask};
use labhh::instance::distance_matrix;
use labhh::landscape::static_features;
use labhh::search::{run_prepared, AnnealingSchedule, PreparedInstance};
use labhh::{Acceptance, ControllerKind, Error, Family, Instance, Operator, Point, RunConfig, RunResult};

/// Status code returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabhhStatus {
    Ok = 0,
    InvalidArgument = 1,
    NullPointer = 2,
    Io = 3,
    Parse = 4,
    BufferTooSmall = 5,
    Internal = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabhhFamily {
    Uniform = 0,
    Clustered = 1,
    Corridor = 2,
    GridJitter = 3,
    MixedDensity = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabhhController {
    LinUcb = 0,
    Ucb1 = 1,
    Random = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabhhAcceptance {
    Greedy = 0,
    Annealing = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabhhFeatureMask {
    Full = 0,
    NoStatic = 1,
    NoDynamic = 2,
    NoContext = 3,
}

/// Bit for each operator in [`LabhhRunConfig::operator_mask`].
pub const LABHH_OP_TWO_OPT: u32 = 1;
pub const LABHH_OP_SWAP: u32 = 2;
pub const LABHH_OP_RELOCATE: u32 = 4;
pub const LABHH_OP_OR_OPT2: u32 = 8;
pub const LABHH_OP_ALL: u32 = 15;

/// Hyper-heuristic run configuration; start from [`labhh_run_config_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabhhRunConfig {
    pub budget: u64,
    pub controller: LabhhController,
    pub acceptance: LabhhAcceptance,
    pub gate_enabled: bool,
    pub feature_mask: LabhhFeatureMask,
    /// Bitwise OR of `LABHH_OP_*`; operators run in the fixed order
    /// two-opt, swap, relocate, or-opt2.
    pub operator_mask: u32,
    pub seed: u64,
    pub alpha: f64,
    pub window: u64,
    pub stagnation_window: u64,
    pub p_gate: f64,
    pub annealing_start_fraction: f64,
    pub annealing_end_fraction: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LabhhStaticFeatures {
    pub size_norm: f64,
    pub nn_mean: f64,
    pub nn_dispersion: f64,
    pub anisotropy: f64,
    pub radial_dispersion: f64,
    pub mst_per_node: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LabhhTracePoint {
    pub iteration: u64,
    pub best_length: f64,
}

/// Opaque instance handle.
pub struct LabhhInstance {
    inner: Instance,
}

/// Opaque run result handle.
pub struct LabhhRunResult {
    inner: RunResult,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(LabhhStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::InvalidArgument(_) => LabhhStatus::InvalidArgument,
            Error::Io { .. } => LabhhStatus::Io,
            Error::Json { .. } | Error::Csv { .. } => LabhhStatus::Parse,
            Error::Internal(_) => LabhhStatus::Internal,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(LabhhStatus::NullPointer, format!("{what} is NULL"))
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(LabhhStatus::InvalidArgument, msg.into())
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> LabhhStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LabhhStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            LabhhStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| invalid(format!("{what} is not valid UTF-8")))
}

unsafe fn put<T>(out: *mut *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Copies `src` into `out[..cap]`; fails with `BufferTooSmall` if it does not fit.
unsafe fn copy_out<T: Copy>(src: &[T], out: *mut T, cap: usize) -> Result<(), Failure> {
    if src.len() > cap {
        return Err(Failure(
            LabhhStatus::BufferTooSmall,
            format!("buffer holds {cap} elements, {} needed", src.len()),
        ));
    }
    if src.is_empty() {
        return Ok(());
    }
    if out.is_null() {
        return Err(null("output buffer"));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), out, src.len());
    Ok(())
}

fn to_family(f: LabhhFamily) -> Family {
    match f {
        LabhhFamily::Uniform => Family::Uniform,
        LabhhFamily::Clustered => Family::Clustered,
        LabhhFamily::Corridor => Family::Corridor,
        LabhhFamily::GridJitter => Family::GridJitter,
        LabhhFamily::MixedDensity => Family::MixedDensity,
    }
}

fn to_u64(v: usize) -> u64 {
    v as u64
}

fn to_usize(v: u64, what: &str) -> Result<usize, Failure> {
    usize::try_from(v).map_err(|_| invalid(format!("{what} {v} does not fit in usize")))
}

impl LabhhRunConfig {
    fn to_config(self) -> Result<RunConfig, Failure> {
        let operators: Vec<Operator> = Operator::ALL
            .into_iter()
            .zip([LABHH_OP_TWO_OPT, LABHH_OP_SWAP, LABHH_OP_RELOCATE, LABHH_OP_OR_OPT2])
            .filter(|&(_, bit)| self.operator_mask & bit != 0)
            .map(|(op, _)| op)
            .collect();
        if self.operator_mask & !LABHH_OP_ALL != 0 {
            return Err(invalid(format!("unknown operator bits in mask {:#x}", self.operator_mask)));
        }
        Ok(RunConfig {
            budget: to_usize(self.budget, "budget")?,
            controller: match self.controller {
                LabhhController::LinUcb => ControllerKind::LinUcb,
                LabhhController::Ucb1 => ControllerKind::Ucb1,
                LabhhController::Random => ControllerKind::Random,
            },
            acceptance: match self.acceptance {
                LabhhAcceptance::Greedy => Acceptance::Greedy,
                LabhhAcceptance::Annealing => Acceptance::Annealing,
            },
            gate_enabled: self.gate_enabled,
            feature_mask: match self.feature_mask {
                LabhhFeatureMask::Full => FeatureMask::Full,
                LabhhFeatureMask::NoStatic => FeatureMask::NoStatic,
                LabhhFeatureMask::NoDynamic => FeatureMask::NoDynamic,
                LabhhFeatureMask::NoContext => FeatureMask::NoContext,
            },
            operators,
            seed: self.seed,
            params: ControllerParams {
                alpha: self.alpha,
                window: to_usize(self.window, "window")?,
                stagnation_window: to_usize(self.stagnation_window, "stagnation window")?,
                p_gate: self.p_gate,
            },
            annealing: AnnealingSchedule {
                start_fraction: self.annealing_start_fraction,
                end_fraction: self.annealing_end_fraction,
            },
        })
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn labhh_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failure on this thread, or NULL if none. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn labhh_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Generates a seeded instance.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn labhh_instance_generate(
    family: LabhhFamily,
    n: usize,
    seed: u64,
    out: *mut *mut LabhhInstance,
) -> LabhhStatus {
    guard(|| {
        let inner = labhh::generate(to_family(family), n, seed)?;
        put(out, LabhhInstance { inner }, "out")
    })
}

/// Builds an instance from `n` interleaved `x, y` pairs in the unit square.
///
/// # Safety
/// `xy` must point to `2 * n` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn labhh_instance_from_points(
    xy: *const f64,
    n: usize,
    out: *mut *mut LabhhInstance,
) -> LabhhStatus {
    guard(|| {
        if xy.is_null() {
            return Err(null("xy"));
        }
        let len = n.checked_mul(2).ok_or_else(|| invalid("n is too large"))?;
        let coords = std::slice::from_raw_parts(xy, len);
        let points = coords.chunks_exact(2).map(|c| Point::new(c[0], c[1])).collect();
        let inner = Instance::from_points("custom", Family::Uniform, 0, points)?;
        put(out, LabhhInstance { inner }, "out")
    })
}

/// Loads an instance JSON file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn labhh_instance_load(path: *const c_char, out: *mut *mut LabhhInstance) -> LabhhStatus {
    guard(|| {
        let inner = Instance::load(c_str(path, "path")?)?;
        put(out, LabhhInstance { inner }, "out")
    })
}

/// Writes an instance JSON file.
///
/// # Safety
/// `inst` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn labhh_instance_save(inst: *const LabhhInstance, path: *const c_char) -> LabhhStatus {
    guard(|| {
        let inst = deref(inst, "inst")?;
        inst.inner.save(c_str(path, "path")?)?;
        Ok(())
    })
}

/// Number of sites, 0 for NULL.
///
/// # Safety
/// `inst` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn labhh_instance_len(inst: *const LabhhInstance) -> usize {
    inst.as_ref().map_or(0, |i| i.inner.n)
}

/// Copies the coordinates as interleaved `x, y` pairs into `out_xy`.
///
/// # Safety
/// `inst` must be a live handle; `out_xy` must have room for `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn labhh_instance_points(
    inst: *const LabhhInstance,
    out_xy: *mut f64,
    cap: usize,
) -> LabhhStatus {
    guard(|| {
        let inst = deref(inst, "inst")?;
        let flat: Vec<f64> = inst.inner.points.iter().flat_map(|p| [p.x, p.y]).collect();
        copy_out(&flat, out_xy, cap)
    })
}

/// # Safety
/// `inst` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn labhh_instance_free(inst: *mut LabhhInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Computes the six static landscape features (needs at least 3 sites).
///
/// # Safety
/// `inst` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn labhh_static_features(
    inst: *const LabhhInstance,
    out: *mut LabhhStaticFeatures,
) -> LabhhStatus {
    guard(|| {
        let inst = deref(inst, "inst")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let f = static_features(&inst.inner, &distance_matrix(&inst.inner))?;
        *out = LabhhStaticFeatures {
            size_norm: f.size_norm,
            nn_mean: f.nn_mean,
            nn_dispersion: f.nn_dispersion,
            anisotropy: f.anisotropy,
            radial_dispersion: f.radial_dispersion,
            mst_per_node: f.mst_per_node,
        };
        Ok(())
    })
}

/// Default LA-BHH configuration.
#[no_mangle]
pub extern "C" fn labhh_run_config_default() -> LabhhRunConfig {
    let d = RunConfig::default();
    LabhhRunConfig {
        budget: to_u64(d.budget),
        controller: LabhhController::LinUcb,
        acceptance: LabhhAcceptance::Greedy,
        gate_enabled: d.gate_enabled,
        feature_mask: LabhhFeatureMask::Full,
        operator_mask: LABHH_OP_ALL,
        seed: d.seed,
        alpha: d.params.alpha,
        window: to_u64(d.params.window),
        stagnation_window: to_u64(d.params.stagnation_window),
        p_gate: d.params.p_gate,
        annealing_start_fraction: d.annealing.start_fraction,
        annealing_end_fraction: d.annealing.end_fraction,
    }
}

/// Runs the configured hyper-heuristic (needs at least 5 sites).
///
/// # Safety
/// `inst` must be a live handle, `cfg` readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn labhh_run(
    inst: *const LabhhInstance,
    cfg: *const LabhhRunConfig,
    out: *mut *mut LabhhRunResult,
) -> LabhhStatus {
    guard(|| {
        let inst = deref(inst, "inst")?;
        let cfg = deref(cfg, "cfg")?.to_config()?;
        let prepared = PreparedInstance::new(inst.inner.clone())?;
        let inner = run_prepared(&prepared, &cfg)?;
        put(out, LabhhRunResult { inner }, "out")
    })
}

/// Runs a method or variant by its benchmark name (`labhh`, `ucb-hh`,
/// `random-hh`, `nn`, `two-opt`, `sa`, `ils`, `ga`, `labhh-<variant>`) with
/// default hyperparameters.
///
/// # Safety
/// `inst` must be a live handle, `method` NUL-terminated and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn labhh_run_method(
    inst: *const LabhhInstance,
    method: *const c_char,
    budget: u64,
    seed: u64,
    out: *mut *mut LabhhRunResult,
) -> LabhhStatus {
    guard(|| {
        let inst = deref(inst, "inst")?;
        let solver: Solver = c_str(method, "method")?.parse()?;
        let cfg = BenchmarkConfig { budget: to_usize(budget, "budget")?, ..BenchmarkConfig::default() };
        if cfg.budget == 0 {
            return Err(invalid("budget must be at least 1 iteration"));
        }
        let prepared = PreparedInstance::new(inst.inner.clone())?;
        let inner = cfg.run_one(&prepared, solver, seed)?;
        put(out, LabhhRunResult { inner }, "out")
    })
}

/// # Safety
/// `res` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn labhh_result_free(res: *mut LabhhRunResult) {
    if !res.is_null() {
        drop(Box::from_raw(res));
    }
}

/// Best tour length, NaN for NULL.
///
/// # Safety
/// `res` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn labhh_result_best_length(res: *const LabhhRunResult) -> f64 {
    res.as_ref().map_or(f64::NAN, |r| r.inner.best_length)
}

/// Multi-start nearest-neighbour length the run started from, NaN for NULL.
///
/// # Safety
/// `res` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn labhh_result_initial_length(res: *const LabhhRunResult) -> f64 {
    res.as_ref().map_or(f64::NAN, |r| r.inner.initial_length)
}

/// Number of sites in the best tour, 0 for NULL.
///
/// # Safety
/// `res` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn labhh_result_len(res: *const LabhhRunResult) -> usize {
    res.as_ref().map_or(0, |r| r.inner.best_order.len())
}

/// Copies the best tour into `out[..cap]`.
///
/// # Safety
/// `res` must be a live handle; `out` must have room for `cap` elements.
#[no_mangle]
pub unsafe extern "C" fn labhh_result_best_order(
    res: *const LabhhRunResult,
    out: *mut usize,
    cap: usize,
) -> LabhhStatus {
    guard(|| copy_out(&deref(res, "res")?.inner.best_order, out, cap))
}

/// Number of trace checkpoints, 0 for NULL.
///
/// # Safety
/// `res` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn labhh_result_trace_len(res: *const LabhhRunResult) -> usize {
    res.as_ref().map_or(0, |r| r.inner.trace.len())
}

/// Copies the best-so-far trace into `out[..cap]`.
///
/// # Safety
/// `res` must be a live handle; `out` must have room for `cap` elements.
#[no_mangle]
pub unsafe extern "C" fn labhh_result_trace(
    res: *const LabhhRunResult,
    out: *mut LabhhTracePoint,
    cap: usize,
) -> LabhhStatus {
    guard(|| {
        let trace: Vec<LabhhTracePoint> = deref(res, "res")?
            .inner
            .trace
            .iter()
            .map(|p| LabhhTracePoint { iteration: to_u64(p.iteration), best_length: p.best_length })
            .collect();
        copy_out(&trace, out, cap)
    })
}

/// Writes per-operator selection counts (two-opt, swap, relocate, or-opt2)
/// into `out[0..4]`.
///
/// # Safety
/// `res` must be a live handle; `out` must have room for 4 elements.
#[no_mangle]
pub unsafe extern "C" fn labhh_result_operator_counts(res: *const LabhhRunResult, out: *mut u64) -> LabhhStatus {
    guard(|| copy_out(&deref(res, "res")?.inner.operator_counts, out, 4))
}

/// Serializes the result to JSON; free the string with [`labhh_string_free`].
///
/// # Safety
/// `res` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn labhh_result_to_json(res: *const LabhhRunResult, out: *mut *mut c_char) -> LabhhStatus {
    guard(|| {
        let res = deref(res, "res")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let text = serde_json::to_string(&res.inner).map_err(|e| Failure(LabhhStatus::Internal, e.to_string()))?;
        *out = CString::new(text).map_err(|e| Failure(LabhhStatus::Internal, e.to_string()))?.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must be NULL or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn labhh_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
