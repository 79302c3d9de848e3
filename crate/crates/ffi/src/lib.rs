//! C ABI for `cgvf-core`.
//!
//! Objects are opaque handles created by `cgvf_*_new`/`cgvf_*_from_*` and
//! released with the matching `*_free`. Every fallible call returns a
//! [`CgvfStatus`]; on failure the message is available from
//! [`cgvf_last_error_message`] on the same thread.
//!
//! The header `include/cgvf.h` is regenerated by the build script.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use cgvf_core::engine::{self, SimulationState};
use cgvf_core::field::repulsion_weight;
use cgvf_core::scenario::{load_scenario, parse_scenario, Scenario};
use cgvf_core::surfaces::{BuiltinSurface, Surface};
use cgvf_core::swarm::SwarmConfig;
use cgvf_core::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CgvfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    SeparationViolation = 4,
    Config = 5,
    Io = 6,
    Panic = 7,
}

/// A builtin parametric surface.
pub struct CgvfSurface {
    inner: BuiltinSurface,
}

/// A running simulation loaded from a scenario.
pub struct CgvfSimulation {
    surface: BuiltinSurface,
    config: SwarmConfig,
    state: SimulationState,
    dt: f64,
}

/// Snapshot of the run metrics. Pair quantities are NaN when undefined.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CgvfMetrics {
    pub time: f64,
    pub phi_max: f64,
    pub eps_max: f64,
    pub mean_offset: f64,
    pub min_sep: f64,
    pub max_neighbor_sep: f64,
    pub lyapunov: f64,
    pub maneuver_max: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_last_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Failure(CgvfStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::DimensionMismatch { .. } => CgvfStatus::DimensionMismatch,
            Error::SeparationViolation { .. } => CgvfStatus::SeparationViolation,
            Error::InvalidConfig(_) | Error::Parse { .. } => CgvfStatus::Config,
            Error::Io { .. } => CgvfStatus::Io,
        };
        Failure(status, e.to_string())
    }
}

fn null(name: &str) -> Failure {
    Failure(CgvfStatus::NullPointer, format!("{name} is null"))
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(CgvfStatus::InvalidArgument, msg.into())
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> CgvfStatus {
    clear_last_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CgvfStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(format!("internal panic: {msg}"));
            CgvfStatus::Panic
        }
    }
}

unsafe fn out_slice<'a>(ptr: *mut f64, len: usize, name: &str) -> Result<&'a mut [f64], Failure> {
    if ptr.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts_mut(ptr, len))
}

unsafe fn c_str<'a>(ptr: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if ptr.is_null() {
        return Err(null(name));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| invalid(format!("{name} is not valid UTF-8")))
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length including the NUL,
/// or 0 when there is no error. `buf` may be null to query the length.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn cgvf_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| match &*e.borrow() {
        None => 0,
        Some(msg) => {
            let bytes = msg.as_bytes_with_nul();
            if !buf.is_null() && len > 0 {
                let n = bytes.len().min(len);
                ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
                *buf.add(n - 1) = 0;
            }
            bytes.len()
        }
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cgvf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Repulsion weight `alpha(s)` for safe radius `r` and sensing radius `big_r`.
///
/// # Safety
/// `out` must be null or a valid pointer to one `double`.
#[no_mangle]
pub unsafe extern "C" fn cgvf_repulsion_weight(s: f64, r: f64, big_r: f64, out: *mut f64) -> CgvfStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if !(r < big_r) {
            return Err(invalid("sensing radius must exceed safe radius"));
        }
        *out = repulsion_weight(s, r, big_r)?;
        Ok(())
    })
}

unsafe fn new_surface(surface: BuiltinSurface, out: *mut *mut CgvfSurface) -> CgvfStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        surface.validate()?;
        *out = Box::into_raw(Box::new(CgvfSurface { inner: surface }));
        Ok(())
    })
}

/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn cgvf_surface_new_torus(major: f64, minor: f64, out: *mut *mut CgvfSurface) -> CgvfStatus {
    new_surface(BuiltinSurface::Torus { major, minor }, out)
}

/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn cgvf_surface_new_plane(out: *mut *mut CgvfSurface) -> CgvfStatus {
    new_surface(BuiltinSurface::Plane, out)
}

/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn cgvf_surface_new_wave(
    amplitude: f64,
    freq1: f64,
    freq2: f64,
    out: *mut *mut CgvfSurface,
) -> CgvfStatus {
    new_surface(
        BuiltinSurface::Wave {
            amplitude,
            freq1,
            freq2,
        },
        out,
    )
}

/// # Safety
/// `surface` must be null or a handle from `cgvf_surface_new_*` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cgvf_surface_free(surface: *mut CgvfSurface) {
    if !surface.is_null() {
        drop(Box::from_raw(surface));
    }
}

/// Ambient dimension, or 0 for a null handle.
///
/// # Safety
/// `surface` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cgvf_surface_dim(surface: *const CgvfSurface) -> usize {
    surface.as_ref().map_or(0, |s| s.inner.dim_ambient())
}

/// Writes `f(w1, w2)` into `out` (`len` must equal the ambient dimension).
///
/// # Safety
/// `surface` must be a live handle and `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn cgvf_surface_eval(
    surface: *const CgvfSurface,
    w1: f64,
    w2: f64,
    out: *mut f64,
    len: usize,
) -> CgvfStatus {
    guard(|| {
        let s = surface.as_ref().ok_or_else(|| null("surface"))?;
        let dim = s.inner.dim_ambient();
        if len != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: len,
            }
            .into());
        }
        out_slice(out, len, "out")?.copy_from_slice(&s.inner.eval([w1, w2]));
        Ok(())
    })
}

/// Writes the two Jacobian columns into `d1` and `d2`, each of length `len`.
///
/// # Safety
/// `surface` must be a live handle; `d1` and `d2` must each hold `len`
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn cgvf_surface_jacobian(
    surface: *const CgvfSurface,
    w1: f64,
    w2: f64,
    d1: *mut f64,
    d2: *mut f64,
    len: usize,
) -> CgvfStatus {
    guard(|| {
        let s = surface.as_ref().ok_or_else(|| null("surface"))?;
        let dim = s.inner.dim_ambient();
        if len != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: len,
            }
            .into());
        }
        let jac = s.inner.jacobian([w1, w2]);
        out_slice(d1, len, "d1")?.copy_from_slice(&jac.d1);
        out_slice(d2, len, "d2")?.copy_from_slice(&jac.d2);
        Ok(())
    })
}

fn simulation_from(scenario: Scenario) -> Result<CgvfSimulation, Failure> {
    let prepared = scenario.prepare()?;
    let mut state = prepared.initial;
    engine::validate_initial_state(&state, &prepared.config, &prepared.surface)?;
    if prepared.config.estimator == cgvf_core::swarm::EstimatorMode::Broadcast {
        for robot in &mut state.robots {
            robot.omega_hat = state.target.omega_star;
        }
    }
    Ok(CgvfSimulation {
        surface: prepared.surface,
        config: prepared.config,
        state,
        dt: prepared.settings.dt,
    })
}

unsafe fn store(out: *mut *mut CgvfSimulation, sim: CgvfSimulation) {
    *out = Box::into_raw(Box::new(sim));
}

/// Loads a scenario file and prepares its initial state.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn cgvf_simulation_from_file(
    path: *const c_char,
    out: *mut *mut CgvfSimulation,
) -> CgvfStatus {
    guard(|| {
        let path = c_str(path, "path")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let sim = simulation_from(load_scenario(path)?)?;
        store(out, sim);
        Ok(())
    })
}

/// Parses scenario TOML text and prepares its initial state.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn cgvf_simulation_from_toml(
    text: *const c_char,
    out: *mut *mut CgvfSimulation,
) -> CgvfStatus {
    guard(|| {
        let text = c_str(text, "text")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let sim = simulation_from(parse_scenario(text, Path::new("<string>"))?)?;
        store(out, sim);
        Ok(())
    })
}

/// # Safety
/// `sim` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cgvf_simulation_free(sim: *mut CgvfSimulation) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Number of robots, or 0 for a null handle.
///
/// # Safety
/// `sim` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cgvf_simulation_robot_count(sim: *const CgvfSimulation) -> usize {
    sim.as_ref().map_or(0, |s| s.state.robots.len())
}

/// Ambient dimension of the robots' positions, or 0 for a null handle.
///
/// # Safety
/// `sim` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cgvf_simulation_dim(sim: *const CgvfSimulation) -> usize {
    sim.as_ref().map_or(0, |s| s.surface.dim_ambient())
}

/// Current simulation time, or NaN for a null handle.
///
/// # Safety
/// `sim` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cgvf_simulation_time(sim: *const CgvfSimulation) -> f64 {
    sim.as_ref().map_or(f64::NAN, |s| s.state.time)
}

/// Advances `steps` RK4 steps of the scenario's `dt`. On failure the state
/// stays at the last completed step.
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cgvf_simulation_step(sim: *mut CgvfSimulation, steps: usize) -> CgvfStatus {
    guard(|| {
        let s = sim.as_mut().ok_or_else(|| null("sim"))?;
        for _ in 0..steps {
            s.state = engine::rk4_step(&s.state, &s.config, &s.surface, s.dt)?;
        }
        Ok(())
    })
}

/// Metrics of the current state.
///
/// # Safety
/// `sim` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cgvf_simulation_metrics(
    sim: *const CgvfSimulation,
    out: *mut CgvfMetrics,
) -> CgvfStatus {
    guard(|| {
        let s = sim.as_ref().ok_or_else(|| null("sim"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let m = engine::metrics(&s.state, &s.config, &s.surface)?;
        *out = CgvfMetrics {
            time: m.time,
            phi_max: m.phi_max,
            eps_max: m.eps_max,
            mean_offset: m.mean_offset,
            min_sep: m.min_sep.unwrap_or(f64::NAN),
            max_neighbor_sep: m.max_neighbor_sep.unwrap_or(f64::NAN),
            lyapunov: m.lyapunov,
            maneuver_max: m.maneuver_max,
        };
        Ok(())
    })
}

/// Copies robot `index`'s position (`x_len` must equal the dimension),
/// virtual coordinates and target estimate. `omega` and `omega_hat` may be
/// null; otherwise each must hold two doubles.
///
/// # Safety
/// Pointers must be null where allowed or valid for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn cgvf_simulation_robot(
    sim: *const CgvfSimulation,
    index: usize,
    x: *mut f64,
    x_len: usize,
    omega: *mut f64,
    omega_hat: *mut f64,
) -> CgvfStatus {
    guard(|| {
        let s = sim.as_ref().ok_or_else(|| null("sim"))?;
        let robot = s.state.robots.get(index).ok_or_else(|| {
            invalid(format!(
                "robot index {index} out of range ({} robots)",
                s.state.robots.len()
            ))
        })?;
        if x_len != robot.x.len() {
            return Err(Error::DimensionMismatch {
                expected: robot.x.len(),
                actual: x_len,
            }
            .into());
        }
        out_slice(x, x_len, "x")?.copy_from_slice(&robot.x);
        if !omega.is_null() {
            out_slice(omega, 2, "omega")?.copy_from_slice(&robot.omega);
        }
        if !omega_hat.is_null() {
            out_slice(omega_hat, 2, "omega_hat")?.copy_from_slice(&robot.omega_hat);
        }
        Ok(())
    })
}
