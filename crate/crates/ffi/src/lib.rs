//! C ABI for `lzsim`.
//!
//! Every fallible function returns an [`LzsimStatus`] and writes results
//! through out-pointers. On failure the message is available from
//! [`lzsim_last_error`] on the same thread. Drives and trajectories are opaque
//! handles owned by the caller and released with their `_free` function.
//! Panics never cross the boundary; they are reported as `LZSIM_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use lzsim::landau_zener::{default_config, default_half_window, run_lz_experiment_in_window};
use lzsim::{
    DensityMatrix, DissipatorParams, DriveModel, EffectiveModel, Error, PropagatorConfig,
    TrajectoryRecord, TwoLevelStatic,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LzsimStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    DegenerateDrive = 3,
    NotHermitian = 4,
    NotNormalized = 5,
    InvalidDensityMatrix = 6,
    StepTooLarge = 7,
    IntegrationAccuracy = 8,
    PositivityViolation = 9,
    FitFailed = 10,
    IndexOutOfRange = 11,
    Panic = 12,
}

impl From<&Error> for LzsimStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::NotHermitian { .. } => LzsimStatus::NotHermitian,
            Error::NotNormalized { .. } => LzsimStatus::NotNormalized,
            Error::InvalidDensityMatrix(_) => LzsimStatus::InvalidDensityMatrix,
            Error::DegenerateDrive(_) => LzsimStatus::DegenerateDrive,
            Error::InvalidParameter { .. } => LzsimStatus::InvalidParameter,
            Error::StepTooLarge { .. } => LzsimStatus::StepTooLarge,
            Error::IntegrationAccuracy { .. } => LzsimStatus::IntegrationAccuracy,
            Error::PositivityViolation { .. } => LzsimStatus::PositivityViolation,
            Error::FitFailed { .. } => LzsimStatus::FitFailed,
        }
    }
}

/// Result of a linear sweep run.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LzsimLzResult {
    pub p_analytic: f64,
    pub p_numeric: f64,
    pub p_diabatic: f64,
    pub t_start: f64,
    pub t_end: f64,
    pub dt: f64,
}

/// Opaque drive handle.
pub struct LzsimDrive {
    inner: DriveModel,
}

/// Opaque trajectory handle: times, populations and (for master runs) flux.
pub struct LzsimTrajectory {
    times: Vec<f64>,
    populations: Vec<[f64; 2]>,
    flux: Option<Vec<f64>>,
}

impl<S> From<TrajectoryRecord<S>> for LzsimTrajectory {
    fn from(t: TrajectoryRecord<S>) -> Self {
        Self {
            times: t.times,
            populations: t.populations,
            flux: t.flux,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

struct Failure(LzsimStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(LzsimStatus::from(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(LzsimStatus::NullPointer, format!("{what} is NULL"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> LzsimStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LzsimStatus::Ok,
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
            LzsimStatus::Panic
        }
    }
}

/// # Safety
/// `out` must be NULL or valid for writes.
unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

/// # Safety
/// `handle` must be NULL or a live handle from this library.
unsafe fn borrow<'a, T>(handle: *const T, what: &str) -> Result<&'a T, Failure> {
    handle.as_ref().ok_or_else(|| null(what))
}

fn step_config(dt: f64, fallback: f64, stride: usize) -> Result<PropagatorConfig, Failure> {
    let dt = if dt > 0.0 { dt } else { fallback };
    Ok(PropagatorConfig::new(dt, stride.max(1))?)
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn lzsim_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn lzsim_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Diabatic survival `exp(−2πJ²/|v−u|)`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lzsim_lz_probability(
    j: f64,
    v: f64,
    u: f64,
    out: *mut f64,
) -> LzsimStatus {
    guard(|| write(out, lzsim::lz_probability(j, v, u)?, "out"))
}

/// One-pass transition probability `1 − exp(−2πJ²/(ω|v−u|))`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lzsim_lz_pass_probability(
    j: f64,
    v: f64,
    u: f64,
    omega: f64,
    out: *mut f64,
) -> LzsimStatus {
    guard(|| write(out, lzsim::lz_pass_probability(j, v, u, omega)?, "out"))
}

/// Loop integral to the branch point; exact value `iπJ²/(v−u)`.
///
/// # Safety
/// `out_re` and `out_im` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lzsim_contour_integral(
    j: f64,
    v: f64,
    u: f64,
    n_points: usize,
    out_re: *mut f64,
    out_im: *mut f64,
) -> LzsimStatus {
    guard(|| {
        if out_re.is_null() || out_im.is_null() {
            return Err(null("output pointer"));
        }
        let c = lzsim::contour_integral(j, v, u, n_points)?;
        write(out_re, c.re, "out_re")?;
        write(out_im, c.im, "out_im")
    })
}

/// `P₁→₂(t)` for the static double well with mean energy, half-splitting and coupling.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lzsim_static_transition_probability(
    mean: f64,
    delta: f64,
    j: f64,
    t: f64,
    out: *mut f64,
) -> LzsimStatus {
    guard(|| {
        if !t.is_finite() {
            return Err(Failure(
                LzsimStatus::InvalidParameter,
                "t must be finite".into(),
            ));
        }
        let model = TwoLevelStatic::new(mean, delta, j)?;
        write(out, lzsim::static_transition_probability(&model, t), "out")
    })
}

/// Linear sweep from the adiabatic ground state. `half_window <= 0` and
/// `dt <= 0` select the defaults.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lzsim_run_lz_experiment(
    j: f64,
    v: f64,
    u: f64,
    half_window: f64,
    dt: f64,
    out: *mut LzsimLzResult,
) -> LzsimStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        DriveModel::linear(v, u, j)?;
        let half = if half_window > 0.0 {
            half_window
        } else {
            default_half_window(j, v, u)
        };
        let base = default_config(j, v, u, half)?;
        let cfg = step_config(dt, base.dt, 1)?;
        let r = run_lz_experiment_in_window(j, v, u, &cfg, half)?;
        write(
            out,
            LzsimLzResult {
                p_analytic: r.p_analytic,
                p_numeric: r.p_numeric,
                p_diabatic: r.p_diabatic,
                t_start: r.window.0,
                t_end: r.window.1,
                dt: r.dt_used,
            },
            "out",
        )
    })
}

fn new_drive(
    out: *mut *mut LzsimDrive,
    make: impl FnOnce() -> lzsim::Result<DriveModel>,
) -> LzsimStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let drive = make()?;
        // SAFETY: checked non-null above; caller guarantees it is writable.
        unsafe { out.write(Box::into_raw(Box::new(LzsimDrive { inner: drive }))) };
        Ok(())
    })
}

/// Linear sweep `diag(v t, u t)` with coupling `j`.
///
/// # Safety
/// `out` must be valid for writes; the handle is released with [`lzsim_drive_free`].
#[no_mangle]
pub unsafe extern "C" fn lzsim_drive_linear(
    v: f64,
    u: f64,
    j: f64,
    out: *mut *mut LzsimDrive,
) -> LzsimStatus {
    new_drive(out, || DriveModel::linear(v, u, j))
}

/// Sinusoidal vibron `diag(v, u)·sin ωt`.
///
/// # Safety
/// As [`lzsim_drive_linear`].
#[no_mangle]
pub unsafe extern "C" fn lzsim_drive_sinusoidal(
    v: f64,
    u: f64,
    j: f64,
    omega: f64,
    out: *mut *mut LzsimDrive,
) -> LzsimStatus {
    new_drive(out, || DriveModel::sinusoidal(v, u, j, omega))
}

/// Cosine ansatz `diag(v, u)·(1 − α cos ωt)`.
///
/// # Safety
/// As [`lzsim_drive_linear`].
#[no_mangle]
pub unsafe extern "C" fn lzsim_drive_cosine(
    v: f64,
    u: f64,
    j: f64,
    omega: f64,
    alpha: f64,
    out: *mut *mut LzsimDrive,
) -> LzsimStatus {
    new_drive(out, || DriveModel::cosine(v, u, j, omega, alpha))
}

/// # Safety
/// `drive` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lzsim_drive_free(drive: *mut LzsimDrive) {
    if !drive.is_null() {
        drop(Box::from_raw(drive));
    }
}

/// Adiabatic gap `E₊(t) − E₋(t)`.
///
/// # Safety
/// `drive` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lzsim_drive_adiabatic_gap(
    drive: *const LzsimDrive,
    t: f64,
    out: *mut f64,
) -> LzsimStatus {
    guard(|| {
        let d = borrow(drive, "drive")?;
        write(out, d.inner.adiabatic_gap(t), "out")
    })
}

/// Propagates `|1⟩` over `n_periods` vibron periods. `dt <= 0` selects the default step.
///
/// # Safety
/// `drive` must be a live handle and `out` valid for writes; the result is
/// released with [`lzsim_trajectory_free`].
#[no_mangle]
pub unsafe extern "C" fn lzsim_run_vibron(
    drive: *const LzsimDrive,
    n_periods: usize,
    dt: f64,
    record_stride: usize,
    out: *mut *mut LzsimTrajectory,
) -> LzsimStatus {
    guard(|| {
        let d = borrow(drive, "drive")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let cfg = step_config(dt, PropagatorConfig::for_drive(&d.inner).dt, record_stride)?;
        let traj = lzsim::run_vibron_experiment(&d.inner, n_periods, &cfg)?;
        out.write(Box::into_raw(Box::new(LzsimTrajectory::from(traj))));
        Ok(())
    })
}

/// Transfer efficiency for each of `n_alphas` cosine depths; `drive` must be a
/// cosine drive (its own α is ignored). Writes `n_alphas` values to `out_metrics`.
///
/// # Safety
/// `alphas` must point to `n_alphas` readable values and `out_metrics` to
/// `n_alphas` writable ones.
#[no_mangle]
pub unsafe extern "C" fn lzsim_resonance_scan(
    drive: *const LzsimDrive,
    alphas: *const f64,
    n_alphas: usize,
    n_periods: usize,
    dt: f64,
    out_metrics: *mut f64,
) -> LzsimStatus {
    guard(|| {
        let d = borrow(drive, "drive")?;
        if alphas.is_null() || out_metrics.is_null() {
            return Err(null("array pointer"));
        }
        let grid = std::slice::from_raw_parts(alphas, n_alphas);
        let widest = grid.iter().copied().fold(0.0, f64::max);
        let DriveModel::CosineAnsatz { v, u, j, omega, .. } = d.inner else {
            return Err(Failure(
                LzsimStatus::InvalidParameter,
                "scan needs a cosine drive".into(),
            ));
        };
        let fallback = PropagatorConfig::for_drive(&DriveModel::cosine(v, u, j, omega, widest)?).dt;
        let cfg = step_config(dt, fallback, 1)?;
        let scan = lzsim::resonance_scan(&d.inner, grid, n_periods, &cfg)?;
        std::slice::from_raw_parts_mut(out_metrics, n_alphas).copy_from_slice(&scan.metrics);
        Ok(())
    })
}

/// Master equation for `H = sσx` with the detailed-balance dissipator, from
/// `diag(1 − p2_init, p2_init)` at `t = 0`. The trajectory carries the flux `γ⁻p₂`.
///
/// # Safety
/// `out` must be valid for writes; release with [`lzsim_trajectory_free`].
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn lzsim_run_master(
    s: f64,
    gamma_minus: f64,
    beta: f64,
    eps1: f64,
    eps2: f64,
    p2_init: f64,
    t_end: f64,
    dt: f64,
    record_stride: usize,
    out: *mut *mut LzsimTrajectory,
) -> LzsimStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let d = DissipatorParams::new(gamma_minus, beta, eps1, eps2)?;
        let eff = EffectiveModel::new(s)?;
        let rho0 = DensityMatrix::diagonal(1.0 - p2_init, p2_init)?;
        let cfg = PropagatorConfig::new(dt, record_stride.max(1))?;
        let traj = lzsim::run_master_experiment(&eff, &d, &rho0, t_end, &cfg)?;
        out.write(Box::into_raw(Box::new(LzsimTrajectory::from(traj))));
        Ok(())
    })
}

/// Number of records; 0 for NULL.
///
/// # Safety
/// `traj` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lzsim_trajectory_len(traj: *const LzsimTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.times.len())
}

/// Time and populations of record `index`.
///
/// # Safety
/// `traj` must be a live handle; the out-pointers must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lzsim_trajectory_get(
    traj: *const LzsimTrajectory,
    index: usize,
    out_time: *mut f64,
    out_p1: *mut f64,
    out_p2: *mut f64,
) -> LzsimStatus {
    guard(|| {
        let t = borrow(traj, "trajectory")?;
        if out_time.is_null() || out_p1.is_null() || out_p2.is_null() {
            return Err(null("output pointer"));
        }
        let (Some(&time), Some(&p)) = (t.times.get(index), t.populations.get(index)) else {
            return Err(Failure(
                LzsimStatus::IndexOutOfRange,
                format!("index {index} out of range for {} records", t.times.len()),
            ));
        };
        write(out_time, time, "out_time")?;
        write(out_p1, p[0], "out_p1")?;
        write(out_p2, p[1], "out_p2")
    })
}

/// Flux at record `index`; `LZSIM_STATUS_INVALID_PARAMETER` for trajectories without flux.
///
/// # Safety
/// `traj` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lzsim_trajectory_flux(
    traj: *const LzsimTrajectory,
    index: usize,
    out: *mut f64,
) -> LzsimStatus {
    guard(|| {
        let t = borrow(traj, "trajectory")?;
        let flux = t.flux.as_ref().ok_or_else(|| {
            Failure(
                LzsimStatus::InvalidParameter,
                "trajectory has no flux series".into(),
            )
        })?;
        let &f = flux.get(index).ok_or_else(|| {
            Failure(
                LzsimStatus::IndexOutOfRange,
                format!("index {index} out of range"),
            )
        })?;
        write(out, f, "out")
    })
}

/// # Safety
/// `traj` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lzsim_trajectory_free(traj: *mut LzsimTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}
