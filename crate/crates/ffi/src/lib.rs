//! C interface to the tdgauge simulator.
//!
//! Every fallible function returns a [`TdgStatus`]; on failure the message
//! is kept per thread and can be copied out with [`tdg_last_error`].
//! Objects are opaque handles created by `*_new`/`tdg_evolve*` and released
//! with the matching `*_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use tdgauge::config::RunConfig;
use tdgauge::dynamics::{thermal_product_state, uniform_grid, vacuum_state};
use tdgauge::ground_state::{
    ground_state_mutual_information, ground_state_photon_number, ground_state_renormalized_number,
};
use tdgauge::model::jc_gauge;
use tdgauge::observables::{energy_report, mutual_information, photon_number};
use tdgauge::run::{run_groundstate, run_simulate, run_sweep};
use tdgauge::transit::{transit_envelope, TransitScenario};
use tdgauge::{
    evolve, CouplingEnvelope, Error, GaussianState, Mode, ModelParams, TrajectoryRecord, Variant,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TdgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Numerical = 4,
    Io = 5,
    Panic = 6,
}

/// Model parameters together with the coupling envelope and Hamiltonian
/// family used for evolution.
pub struct TdgModel {
    params: ModelParams,
    envelope: CouplingEnvelope,
    variant: Variant,
    t_end: f64,
}

pub struct TdgTrajectory {
    record: TrajectoryRecord,
    initial: GaussianState,
}

/// Observables of one trajectory sample.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct TdgSample {
    pub t: f64,
    pub mu: f64,
    pub n_a: f64,
    pub n_b: f64,
    pub mutual_information: f64,
    pub e_c: f64,
    pub e_m: f64,
    pub work: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct TdgGroundState {
    pub mutual_information: f64,
    pub n_a: f64,
    pub n_c: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> TdgStatus {
    match e {
        Error::InvalidParameter { .. } => TdgStatus::InvalidArgument,
        Error::Config(_) => TdgStatus::Config,
        Error::Io(_) => TdgStatus::Io,
        _ if e.is_numerical() => TdgStatus::Numerical,
        _ => TdgStatus::InvalidArgument,
    }
}

/// Runs `f`, turning errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (TdgStatus, String)>) -> TdgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TdgStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            TdgStatus::Panic
        }
    }
}

fn lift<T>(r: tdgauge::Result<T>) -> Result<T, (TdgStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (TdgStatus, String) {
    (TdgStatus::NullPointer, format!("`{what}` is null"))
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length, or 0 if none.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn tdg_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| match &*e.borrow() {
        None => 0,
        Some(msg) => {
            let bytes = msg.as_bytes();
            if !buf.is_null() && len > 0 {
                let n = bytes.len().min(len - 1);
                ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
                *buf.add(n) = 0;
            }
            bytes.len()
        }
    })
}

/// Gauge in which the counter-rotating terms vanish, 1/(1 + δ).
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tdg_jc_gauge(delta: f64, out: *mut f64) -> TdgStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = lift(jc_gauge(delta))?;
        Ok(())
    })
}

/// New model with a smoothed-box envelope (switch-on `t0`, duration `tau`,
/// steepness `s`) and the standard Hamiltonian family. Evolution runs to
/// 2·t0 + tau.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tdg_model_new_box(
    delta: f64,
    eta_max: f64,
    alpha: f64,
    t0: f64,
    tau: f64,
    s: f64,
    out: *mut *mut TdgModel,
) -> TdgStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let model = TdgModel {
            params: lift(ModelParams::new(delta, eta_max, alpha))?,
            envelope: lift(CouplingEnvelope::smoothed_box(t0, tau, s))?,
            variant: Variant::Standard,
            t_end: 2.0 * t0 + tau,
        };
        *out = Box::into_raw(Box::new(model));
        Ok(())
    })
}

/// New model for a dipole crossing a Gaussian mode profile. `ratio_wc` is
/// w_c/ν in units of 1/ω_m, `offset_h` is h/w_c and `theta` the dipole
/// angle to the direction of motion. With `tilde` set the motion-corrected
/// Hamiltonian family is used. Evolution runs to the exit time.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn tdg_model_new_transit(
    delta: f64,
    eta_max: f64,
    alpha: f64,
    ratio_wc: f64,
    offset_h: f64,
    theta: f64,
    tilde: bool,
    out: *mut *mut TdgModel,
) -> TdgStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let sc = lift(TransitScenario::new(ratio_wc, offset_h, theta))?;
        let model = TdgModel {
            params: lift(ModelParams::new(delta, eta_max, alpha))?,
            envelope: lift(transit_envelope(&sc))?,
            variant: if tilde {
                Variant::Tilde { theta }
            } else {
                Variant::Standard
            },
            t_end: sc.exit_time(),
        };
        *out = Box::into_raw(Box::new(model));
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a handle from a `tdg_model_new*` call that has
/// not been freed.
#[no_mangle]
pub unsafe extern "C" fn tdg_model_free(model: *mut TdgModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

unsafe fn evolve_from(
    model: *const TdgModel,
    initial: tdgauge::Result<GaussianState>,
    samples: usize,
    tol: f64,
    out: *mut *mut TdgTrajectory,
) -> TdgStatus {
    guard(|| {
        let model = model.as_ref().ok_or_else(|| null("model"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let initial = lift(initial)?;
        let grid = lift(uniform_grid(0.0, model.t_end, samples))?;
        let record = lift(evolve(
            &initial,
            &model.params,
            &model.envelope,
            model.variant,
            &grid,
            tol,
        ))?;
        *out = Box::into_raw(Box::new(TdgTrajectory { record, initial }));
        Ok(())
    })
}

/// Evolves the vacuum on `samples` equally spaced times.
///
/// # Safety
/// `model` must be a live handle; `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tdg_evolve_vacuum(
    model: *const TdgModel,
    samples: usize,
    tol: f64,
    out: *mut *mut TdgTrajectory,
) -> TdgStatus {
    evolve_from(model, Ok(vacuum_state()), samples, tol, out)
}

/// Evolves a product of Gibbs states at β·ω_c and β·ω_m.
///
/// # Safety
/// `model` must be a live handle; `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tdg_evolve_thermal(
    model: *const TdgModel,
    beta_omega_c: f64,
    beta_omega_m: f64,
    samples: usize,
    tol: f64,
    out: *mut *mut TdgTrajectory,
) -> TdgStatus {
    evolve_from(
        model,
        thermal_product_state(beta_omega_c, beta_omega_m),
        samples,
        tol,
        out,
    )
}

/// Number of samples, or 0 for a null handle.
///
/// # Safety
/// `traj` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tdg_trajectory_len(traj: *const TdgTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.record.states.len())
}

/// # Safety
/// `traj` must be a live handle; `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tdg_trajectory_sample(
    traj: *const TdgTrajectory,
    index: usize,
    out: *mut TdgSample,
) -> TdgStatus {
    guard(|| {
        let traj = traj.as_ref().ok_or_else(|| null("traj"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let rec = &traj.record;
        let s = rec.states.get(index).ok_or_else(|| {
            (
                TdgStatus::InvalidArgument,
                format!("index {index} out of range 0..{}", rec.states.len()),
            )
        })?;
        let t = rec.times[index];
        let e = energy_report(s, &traj.initial, &rec.params);
        *out = TdgSample {
            t,
            mu: rec.envelope.value(t),
            n_a: photon_number(s, Mode::Cavity),
            n_b: photon_number(s, Mode::Matter),
            mutual_information: lift(mutual_information(s))?,
            e_c: e.e_c,
            e_m: e.e_m,
            work: e.work,
        };
        Ok(())
    })
}

/// # Safety
/// `traj` must be null or a live handle from `tdg_evolve*`.
#[no_mangle]
pub unsafe extern "C" fn tdg_trajectory_free(traj: *mut TdgTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// Closed-form ground-state correlations and photon numbers in gauge
/// `alpha` at full coupling.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tdg_ground_state(
    delta: f64,
    eta_max: f64,
    alpha: f64,
    out: *mut TdgGroundState,
) -> TdgStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let p = lift(ModelParams::new(delta, eta_max, alpha))?;
        if !alpha.is_finite() {
            return Err((TdgStatus::InvalidArgument, "alpha must be finite".into()));
        }
        *out = TdgGroundState {
            mutual_information: ground_state_mutual_information(&p, alpha),
            n_a: ground_state_photon_number(&p, alpha),
            n_c: ground_state_renormalized_number(&p, alpha),
        };
        Ok(())
    })
}

/// Runs `command` ("simulate", "sweep" or "groundstate") on a TOML
/// configuration and returns the CSV in `*out`; release it with
/// [`tdg_string_free`].
///
/// # Safety
/// `command` and `config_toml` must be null or NUL-terminated strings;
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tdg_run_csv(
    command: *const c_char,
    config_toml: *const c_char,
    out: *mut *mut c_char,
) -> TdgStatus {
    guard(|| {
        if command.is_null() {
            return Err(null("command"));
        }
        if config_toml.is_null() {
            return Err(null("config_toml"));
        }
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let text = |p: *const c_char, what: &str| {
            CStr::from_ptr(p)
                .to_str()
                .map_err(|_| (TdgStatus::InvalidArgument, format!("`{what}` is not UTF-8")))
        };
        let cfg = lift(RunConfig::from_toml(text(config_toml, "config_toml")?))?;
        let table = match text(command, "command")? {
            "simulate" => lift(run_simulate(&cfg))?,
            "sweep" => lift(run_sweep(&cfg))?,
            "groundstate" => lift(run_groundstate(&cfg))?,
            other => {
                return Err((
                    TdgStatus::InvalidArgument,
                    format!("unknown command `{other}`"),
                ))
            }
        };
        let csv = CString::new(table.to_csv()).map_err(|e| (TdgStatus::Io, e.to_string()))?;
        *out = csv.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by [`tdg_run_csv`].
#[no_mangle]
pub unsafe extern "C" fn tdg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
