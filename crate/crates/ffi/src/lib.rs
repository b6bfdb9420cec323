//! C ABI for the bohmsim simulator.
//!
//! Objects are opaque handles created from TOML experiment configs (the
//! same schema the CLI reads; see `docs/config.md`). Every function returns
//! a [`BohmStatus`] code; on failure `bohm_last_error_message` returns a
//! thread-local description valid until the next failing call on that
//! thread. The generated header lives at `include/bohmsim.h`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use bohmsim::config::ExperimentConfig;
use bohmsim::ensemble::EnsembleSpec;
use bohmsim::error::SimError;
use bohmsim::foliation::Foliation;
use bohmsim::hbd::{integrate_hbd, HbdParams, Trajectory};
use bohmsim::nolaw::{family_runs, p_star_with_runs};
use bohmsim::spacetime::TwoVector;

/// Result codes of every FFI call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BohmStatus {
    Ok = 0,
    NullPointer = 1,
    /// invalid configuration, precondition or argument
    InvalidArgument = 2,
    /// numerical failure during the run
    NumericalFailure = 3,
    /// a string argument was not valid UTF-8
    InvalidUtf8 = 4,
    /// an internal panic was caught at the boundary
    Panic = 5,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<Vec<u8>>) {
    let c = CString::new(msg).unwrap_or_else(|_| CString::new("invalid error message").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn status_of(err: &SimError) -> BohmStatus {
    match err.exit_code() {
        2 => BohmStatus::InvalidArgument,
        _ => BohmStatus::NumericalFailure,
    }
}

/// Message of the last failing call on this thread, or null. The pointer is
/// valid until the next failing call on the same thread; do not free it.
#[no_mangle]
pub extern "C" fn bohm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| match &*slot.borrow() {
        Some(c) => c.as_ptr(),
        None => ptr::null(),
    })
}

/// Wave function handle (Dirac sector, normalized on the rest leaf).
pub struct BohmWaveFunction {
    inner: bohmsim::dirac::MultiTimeWaveFunction,
}

/// Foliation handle.
pub struct BohmFoliation {
    inner: Foliation,
}

/// Trajectory handle: N world lines sampled leaf by leaf.
pub struct BohmTrajectory {
    inner: Trajectory,
}

unsafe fn read_str<'a>(ptr: *const c_char) -> Result<&'a str, BohmStatus> {
    if ptr.is_null() {
        set_error("null string argument");
        return Err(BohmStatus::NullPointer);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("string argument is not valid UTF-8");
        BohmStatus::InvalidUtf8
    })
}

fn guard<F: FnOnce() -> BohmStatus>(f: F) -> BohmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic caught at the FFI boundary");
            BohmStatus::Panic
        }
    }
}

fn parse_config(text: &str) -> Result<ExperimentConfig, BohmStatus> {
    match ExperimentConfig::from_toml(text, &[]) {
        Ok((config, _)) => Ok(config),
        Err(e) => {
            set_error(e.to_string());
            Err(status_of(&e))
        }
    }
}

/// Build a Dirac-sector wave function from a TOML experiment config.
///
/// # Safety
/// `config_toml` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bohm_wavefunction_from_toml(
    config_toml: *const c_char,
    out: *mut *mut BohmWaveFunction,
) -> BohmStatus {
    guard(|| {
        if out.is_null() {
            set_error("null output pointer");
            return BohmStatus::NullPointer;
        }
        let text = match read_str(config_toml) {
            Ok(t) => t,
            Err(s) => return s,
        };
        let config = match parse_config(text) {
            Ok(c) => c,
            Err(s) => return s,
        };
        match config.build_dirac() {
            Ok(wf) => {
                *out = Box::into_raw(Box::new(BohmWaveFunction { inner: wf }));
                BohmStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Build the `[foliation]` of a TOML experiment config (the rest frame when
/// the section is absent).
///
/// # Safety
/// `config_toml` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bohm_foliation_from_toml(
    config_toml: *const c_char,
    out: *mut *mut BohmFoliation,
) -> BohmStatus {
    guard(|| {
        if out.is_null() {
            set_error("null output pointer");
            return BohmStatus::NullPointer;
        }
        let text = match read_str(config_toml) {
            Ok(t) => t,
            Err(s) => return s,
        };
        let config = match parse_config(text) {
            Ok(c) => c,
            Err(s) => return s,
        };
        match config.foliation() {
            Ok(fol) => {
                *out = Box::into_raw(Box::new(BohmFoliation { inner: fol }));
                BohmStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Integrate the hypersurface guiding law from a spatial configuration on
/// `leaf(s0)` to `leaf(s1)`.
///
/// # Safety
/// `initial_xs` must point to `particles` doubles; handles must be live.
#[no_mangle]
pub unsafe extern "C" fn bohm_trajectory_integrate(
    wf: *const BohmWaveFunction,
    foliation: *const BohmFoliation,
    initial_xs: *const f64,
    particles: usize,
    s0: f64,
    s1: f64,
    ds: f64,
    out: *mut *mut BohmTrajectory,
) -> BohmStatus {
    guard(|| {
        if wf.is_null() || foliation.is_null() || initial_xs.is_null() || out.is_null() {
            set_error("null argument");
            return BohmStatus::NullPointer;
        }
        let wf = &(*wf).inner;
        let fol = &(*foliation).inner;
        let xs = std::slice::from_raw_parts(initial_xs, particles);
        let leaf = fol.leaf(s0);
        let initial: Vec<TwoVector> = xs.iter().map(|x| leaf.point_at(*x)).collect();
        let params = HbdParams { s0, s1, ds, velocity_scale: 1.0, eps_rho: None };
        match integrate_hbd(wf, fol, &initial, &params) {
            Ok(traj) => {
                *out = Box::into_raw(Box::new(BohmTrajectory { inner: traj }));
                BohmStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Number of recorded leaves.
///
/// # Safety
/// `trajectory` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn bohm_trajectory_leaf_count(
    trajectory: *const BohmTrajectory,
    out: *mut usize,
) -> BohmStatus {
    if trajectory.is_null() || out.is_null() {
        set_error("null argument");
        return BohmStatus::NullPointer;
    }
    *out = (*trajectory).inner.leaf_params.len();
    BohmStatus::Ok
}

/// # Safety
/// `trajectory` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn bohm_trajectory_particle_count(
    trajectory: *const BohmTrajectory,
    out: *mut usize,
) -> BohmStatus {
    if trajectory.is_null() || out.is_null() {
        set_error("null argument");
        return BohmStatus::NullPointer;
    }
    *out = (*trajectory).inner.particle_count();
    BohmStatus::Ok
}

/// 1 when the trajectory was integrated to the end, 0 when it aborted near
/// a node (the recorded prefix is still readable).
///
/// # Safety
/// `trajectory` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn bohm_trajectory_is_valid(
    trajectory: *const BohmTrajectory,
    out: *mut i32,
) -> BohmStatus {
    if trajectory.is_null() || out.is_null() {
        set_error("null argument");
        return BohmStatus::NullPointer;
    }
    *out = i32::from((*trajectory).inner.valid);
    BohmStatus::Ok
}

/// Crossing point of one particle with one recorded leaf.
///
/// # Safety
/// Pointers must be valid; `leaf` and `particle` are bounds-checked.
#[no_mangle]
pub unsafe extern "C" fn bohm_trajectory_point(
    trajectory: *const BohmTrajectory,
    leaf: usize,
    particle: usize,
    t_out: *mut f64,
    x_out: *mut f64,
) -> BohmStatus {
    if trajectory.is_null() || t_out.is_null() || x_out.is_null() {
        set_error("null argument");
        return BohmStatus::NullPointer;
    }
    let traj = &(*trajectory).inner;
    if leaf >= traj.points.len() || particle >= traj.particle_count() {
        set_error(format!(
            "index out of range: leaf {leaf} of {}, particle {particle} of {}",
            traj.points.len(),
            traj.particle_count()
        ));
        return BohmStatus::InvalidArgument;
    }
    let p = traj.points[leaf][particle];
    *t_out = p.t;
    *x_out = p.x;
    BohmStatus::Ok
}

/// Hypersurface density at a spatial configuration on `leaf(s)`.
///
/// # Safety
/// `xs` must point to `particles` doubles; handles must be live.
#[no_mangle]
pub unsafe extern "C" fn bohm_density_on_leaf(
    wf: *const BohmWaveFunction,
    foliation: *const BohmFoliation,
    s: f64,
    xs: *const f64,
    particles: usize,
    out: *mut f64,
) -> BohmStatus {
    guard(|| {
        if wf.is_null() || foliation.is_null() || xs.is_null() || out.is_null() {
            set_error("null argument");
            return BohmStatus::NullPointer;
        }
        let leaf = (*foliation).inner.leaf(s);
        let coords = std::slice::from_raw_parts(xs, particles);
        let config: Vec<TwoVector> = coords.iter().map(|x| leaf.point_at(*x)).collect();
        match (*wf).inner.rho_sigma(&leaf, &config) {
            Ok(rho) => {
                *out = rho;
                BohmStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Lower probability of the `[event]` over the `[family]` of a full TOML
/// experiment config. Writes the minimum estimate, its conservative lower
/// confidence bound, and the arg-min foliation label (free it with
/// `bohm_string_free`).
///
/// # Safety
/// `config_toml` must be a NUL-terminated string; output pointers valid.
#[no_mangle]
pub unsafe extern "C" fn bohm_pstar_from_toml(
    config_toml: *const c_char,
    value_out: *mut f64,
    lower_bound_out: *mut f64,
    argmin_out: *mut *mut c_char,
) -> BohmStatus {
    guard(|| {
        if value_out.is_null() || lower_bound_out.is_null() || argmin_out.is_null() {
            set_error("null output pointer");
            return BohmStatus::NullPointer;
        }
        let text = match read_str(config_toml) {
            Ok(t) => t,
            Err(s) => return s,
        };
        let config = match parse_config(text) {
            Ok(c) => c,
            Err(s) => return s,
        };
        let run = || -> bohmsim::error::Result<(f64, f64, String)> {
            let wf = config.build_dirac()?;
            let family = config.family()?;
            let event = config.build_event()?;
            let spec: EnsembleSpec = config.ensemble_spec();
            let runs = family_runs(&family, &wf, &spec)?;
            let est = p_star_with_runs(&event, &runs)?;
            Ok((est.value, est.lower_bound, est.argmin))
        };
        match run() {
            Ok((value, lower, argmin)) => {
                *value_out = value;
                *lower_bound_out = lower;
                let label = CString::new(argmin).unwrap_or_default();
                *argmin_out = label.into_raw();
                BohmStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                status_of(&e)
            }
        }
    })
}

/// # Safety
/// `s` must come from this library (e.g. `bohm_pstar_from_toml`) and not
/// have been freed already. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn bohm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `wf` must come from `bohm_wavefunction_from_toml`; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn bohm_wavefunction_free(wf: *mut BohmWaveFunction) {
    if !wf.is_null() {
        drop(Box::from_raw(wf));
    }
}

/// # Safety
/// `foliation` must come from `bohm_foliation_from_toml`; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn bohm_foliation_free(foliation: *mut BohmFoliation) {
    if !foliation.is_null() {
        drop(Box::from_raw(foliation));
    }
}

/// # Safety
/// `trajectory` must come from `bohm_trajectory_integrate`; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn bohm_trajectory_free(trajectory: *mut BohmTrajectory) {
    if !trajectory.is_null() {
        drop(Box::from_raw(trajectory));
    }
}

/// Number of particles the wave-function handle describes.
///
/// # Safety
/// `wf` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn bohm_wavefunction_particle_count(
    wf: *const BohmWaveFunction,
    out: *mut usize,
) -> BohmStatus {
    if wf.is_null() || out.is_null() {
        set_error("null argument");
        return BohmStatus::NullPointer;
    }
    *out = (*wf).inner.particle_count();
    BohmStatus::Ok
}
