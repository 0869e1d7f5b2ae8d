//! Fixed-step RK4 integration of the Schrödinger equation (time-ordered
//! exponential) and of the von Neumann / GKSL master equation.
//!
//! Nothing is renormalized or projected: norm or trace drift beyond the
//! thresholds below is reported as an error naming the step size.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::algebra::{Complex2Matrix, DensityMatrix, PureState};
use crate::error::{Error, Result};
use crate::hamiltonians::{DriveModel, Hamiltonian};

/// Norm drift `|‖ψ‖ − 1|` above which a Schrödinger run is rejected.
pub const NORM_DRIFT_LIMIT: f64 = 1e-6;
/// Trace drift `|Tr ρ − 1|` above which a master-equation run is rejected.
pub const TRACE_DRIFT_LIMIT: f64 = 1e-7;
/// Smallest eigenvalue tolerated along a master-equation run.
pub const POSITIVITY_LIMIT: f64 = -1e-8;

const MINUS_I: C64 = C64::new(0.0, -1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Method {
    Rk4Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagatorConfig {
    pub dt: f64,
    pub method: Method,
    /// Record every `record_stride`-th step (endpoints and checkpoints are always recorded).
    pub record_stride: usize,
}

impl PropagatorConfig {
    pub fn new(dt: f64, record_stride: usize) -> Result<Self> {
        let cfg = Self {
            dt,
            method: Method::Rk4Fixed,
            record_stride,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::param(
                "dt",
                format!("must be positive, got {}", self.dt),
            ));
        }
        if self.record_stride == 0 {
            return Err(Error::param("record_stride", "must be at least 1"));
        }
        Ok(())
    }

    /// Default step: `(2π/ω)/2000` for periodic drives, `min(1/|v−u|, 1/|J|)/1000` for sweeps.
    ///
    /// Periodic drives are bounded, so the step is further capped at
    /// `0.01 / max‖H(t)‖`; RK4 norm loss per step scales as `(dt‖H‖)⁶`.
    /// Sweeps are unbounded in time and get the same cap from their window
    /// (see `landau_zener::default_config`).
    pub fn for_drive(drive: &DriveModel) -> Self {
        let (v, u) = drive.sweep_velocities();
        let j = drive.coupling().abs();
        let dt = match *drive {
            DriveModel::LinearSweep { .. } => {
                let scale = if j > 0.0 {
                    (1.0 / (v - u).abs()).min(1.0 / j)
                } else {
                    1.0 / (v - u).abs()
                };
                scale / 1000.0
            }
            DriveModel::SinusoidalSweep { omega, .. } => {
                let bound = v.abs().max(u.abs()) + j;
                (std::f64::consts::TAU / omega / 2000.0).min(0.01 / bound)
            }
            DriveModel::CosineAnsatz { omega, alpha, .. } => {
                let bound = v.abs().max(u.abs()) * (1.0 + alpha) + j;
                (std::f64::consts::TAU / omega / 2000.0).min(0.01 / bound)
            }
        };
        Self {
            dt,
            method: Method::Rk4Fixed,
            record_stride: 1,
        }
    }

    pub fn with_stride(mut self, record_stride: usize) -> Self {
        self.record_stride = record_stride;
        self
    }
}

/// Time series produced by a propagation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord<S> {
    pub times: Vec<f64>,
    pub states: Vec<S>,
    /// Diabatic populations `(p₁, p₂)` at each recorded time.
    pub populations: Vec<[f64; 2]>,
    /// Downward flux `γ⁻ p₂`, present for dissipative runs.
    pub flux: Option<Vec<f64>>,
    /// Largest step actually taken (segments are split evenly, so it never exceeds the configured `dt`).
    pub dt_used: f64,
}

impl<S> TrajectoryRecord<S> {
    fn with_capacity(n: usize) -> Self {
        Self {
            times: Vec::with_capacity(n),
            states: Vec::with_capacity(n),
            populations: Vec::with_capacity(n),
            flux: None,
            dt_used: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_populations(&self) -> Option<[f64; 2]> {
        self.populations.last().copied()
    }

    pub fn max_p2(&self) -> f64 {
        self.populations.iter().map(|p| p[1]).fold(0.0, f64::max)
    }

    /// Mean of the flux series over the second half of the run.
    pub fn long_time_flux(&self) -> Option<f64> {
        let flux = self.flux.as_ref()?;
        if flux.is_empty() {
            return None;
        }
        let tail = &flux[flux.len() / 2..];
        Some(tail.iter().sum::<f64>() / tail.len() as f64)
    }
}

/// A trace-annihilating superoperator added to the commutator flow.
pub trait Dissipator: Sync {
    fn apply(&self, rho: &Complex2Matrix) -> Complex2Matrix;
}

trait Vector: Copy {
    fn add_scaled(&self, other: &Self, k: f64) -> Self;
}

impl Vector for [C64; 2] {
    fn add_scaled(&self, other: &Self, k: f64) -> Self {
        [self[0] + other[0] * k, self[1] + other[1] * k]
    }
}

impl Vector for Complex2Matrix {
    fn add_scaled(&self, other: &Self, k: f64) -> Self {
        *self + other.scale_re(k)
    }
}

fn rk4_step<V: Vector>(f: &impl Fn(f64, &V) -> V, t: f64, y: &V, h: f64) -> V {
    let k1 = f(t, y);
    let k2 = f(t + 0.5 * h, &y.add_scaled(&k1, 0.5 * h));
    let k3 = f(t + 0.5 * h, &y.add_scaled(&k2, 0.5 * h));
    let k4 = f(t + h, &y.add_scaled(&k3, h));
    y.add_scaled(&k1, h / 6.0)
        .add_scaled(&k2, h / 3.0)
        .add_scaled(&k3, h / 3.0)
        .add_scaled(&k4, h / 6.0)
}

/// Drives RK4 from `t_start` to `t_end`, landing exactly on every checkpoint.
/// `check` runs after each step, `record` at each recorded time. Returns the largest step used.
#[allow(clippy::too_many_arguments)]
fn integrate<V: Vector>(
    f: impl Fn(f64, &V) -> V,
    y0: V,
    t_start: f64,
    t_end: f64,
    checkpoints: &[f64],
    cfg: &PropagatorConfig,
    mut check: impl FnMut(f64, &V) -> Result<()>,
    mut record: impl FnMut(f64, &V),
) -> Result<f64> {
    cfg.validate()?;
    if !(t_start < t_end) || !t_start.is_finite() || !t_end.is_finite() {
        return Err(Error::param(
            "t_end",
            format!("integration window [{t_start}, {t_end}] is empty"),
        ));
    }
    let mut stops: Vec<f64> = checkpoints
        .iter()
        .copied()
        .filter(|&c| c > t_start && c < t_end)
        .collect();
    stops.push(t_end);
    stops.sort_by(|a, b| a.total_cmp(b));
    stops.dedup();

    let mut y = y0;
    let mut t = t_start;
    let mut dt_used: f64 = 0.0;
    let mut step_count = 0usize;
    record(t, &y);
    for stop in stops {
        let seg_start = t;
        let len = stop - seg_start;
        let n = (len / cfg.dt).ceil().max(1.0) as usize;
        let h = len / n as f64;
        dt_used = dt_used.max(h);
        for k in 1..=n {
            y = rk4_step(&f, t, &y, h);
            t = if k == n {
                stop
            } else {
                seg_start + h * k as f64
            };
            step_count += 1;
            check(t, &y)?;
            if k == n || step_count.is_multiple_of(cfg.record_stride) {
                record(t, &y);
            }
        }
    }
    Ok(dt_used)
}

/// Solves `dψ/dt = −i H(t) ψ` on `[t_start, t_end]`.
pub fn propagate_schrodinger<H: Hamiltonian + ?Sized>(
    h: &H,
    psi0: &PureState,
    t_start: f64,
    t_end: f64,
    cfg: &PropagatorConfig,
) -> Result<TrajectoryRecord<PureState>> {
    propagate_schrodinger_through(h, psi0, t_start, t_end, &[], cfg)
}

/// As [`propagate_schrodinger`], additionally recording exactly at each time in `checkpoints`.
pub fn propagate_schrodinger_through<H: Hamiltonian + ?Sized>(
    h: &H,
    psi0: &PureState,
    t_start: f64,
    t_end: f64,
    checkpoints: &[f64],
    cfg: &PropagatorConfig,
) -> Result<TrajectoryRecord<PureState>> {
    let rhs = |t: f64, psi: &[C64; 2]| {
        let hp = h.at(t).apply(psi);
        [hp[0] * MINUS_I, hp[1] * MINUS_I]
    };
    let estimate = ((t_end - t_start) / cfg.dt / cfg.record_stride.max(1) as f64) as usize;
    let mut traj = TrajectoryRecord::with_capacity(estimate.min(1 << 22) + checkpoints.len() + 2);
    let dt = cfg.dt;
    let check = |_t: f64, psi: &[C64; 2]| {
        let norm = (psi[0].norm_sqr() + psi[1].norm_sqr()).sqrt();
        let drift = (norm - 1.0).abs();
        if drift <= NORM_DRIFT_LIMIT {
            Ok(())
        } else {
            Err(Error::StepTooLarge { dt, drift })
        }
    };
    let dt_used = integrate(
        rhs,
        psi0.amplitudes(),
        t_start,
        t_end,
        checkpoints,
        cfg,
        check,
        |t, psi| {
            let state = PureState::from_amplitudes_unchecked(*psi);
            traj.times.push(t);
            traj.populations.push(state.populations());
            traj.states.push(state);
        },
    )?;
    traj.dt_used = dt_used;
    Ok(traj)
}

/// Integrates `dρ/dt = −i[H(t), ρ] + D(ρ)` with an optional dissipator `D`.
pub fn propagate_master<H: Hamiltonian + ?Sized>(
    h: &H,
    rho0: &DensityMatrix,
    dissipator: Option<&dyn Dissipator>,
    t_start: f64,
    t_end: f64,
    cfg: &PropagatorConfig,
) -> Result<TrajectoryRecord<DensityMatrix>> {
    let rhs = |t: f64, rho: &Complex2Matrix| {
        let coherent = h.at(t).commutator(rho).scale(MINUS_I);
        match dissipator {
            Some(d) => coherent + d.apply(rho),
            None => coherent,
        }
    };
    let estimate = ((t_end - t_start) / cfg.dt / cfg.record_stride.max(1) as f64) as usize;
    let mut traj = TrajectoryRecord::with_capacity(estimate.min(1 << 22) + 2);
    let dt = cfg.dt;
    let check = |time: f64, rho: &Complex2Matrix| {
        let drift = (rho.trace().re - 1.0).abs().max(rho.trace().im.abs());
        if !(drift <= TRACE_DRIFT_LIMIT) {
            return Err(Error::IntegrationAccuracy { dt, drift });
        }
        let min_eigenvalue = rho.hermitian_eigenvalues()[0];
        if !(min_eigenvalue >= POSITIVITY_LIMIT) {
            return Err(Error::PositivityViolation {
                time,
                min_eigenvalue,
            });
        }
        Ok(())
    };
    let dt_used = integrate(
        rhs,
        *rho0.matrix(),
        t_start,
        t_end,
        &[],
        cfg,
        check,
        |t, rho| {
            let state = DensityMatrix::from_matrix_unchecked(*rho);
            traj.times.push(t);
            traj.populations.push(state.populations());
            traj.states.push(state);
        },
    )?;
    traj.dt_used = dt_used;
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::matrix_exponential_propagator;
    use crate::hamiltonians::TwoLevelStatic;
    use std::f64::consts::PI;

    #[test]
    fn config_validation() {
        assert!(PropagatorConfig::new(0.0, 1).is_err());
        assert!(PropagatorConfig::new(-1.0, 1).is_err());
        assert!(PropagatorConfig::new(0.1, 0).is_err());
        let d = DriveModel::sinusoidal(1.0, 0.0, 0.1, 2.0).unwrap();
        assert!((PropagatorConfig::for_drive(&d).dt - PI / 2000.0).abs() < 1e-15);
        let d = DriveModel::sinusoidal(50.0, -50.0, 0.1, 1.0).unwrap();
        assert!((PropagatorConfig::for_drive(&d).dt - 0.01 / 50.1).abs() < 1e-15);
        let d = DriveModel::cosine(1.0, 0.0, 0.05, 0.05, 1.0).unwrap();
        assert!((PropagatorConfig::for_drive(&d).dt - 0.01 / 2.05).abs() < 1e-15);
        let d = DriveModel::linear(1.0, -1.0, 0.25).unwrap();
        assert!((PropagatorConfig::for_drive(&d).dt - 0.5e-3).abs() < 1e-15);
        let d = DriveModel::linear(1.0, -1.0, 0.0).unwrap();
        assert!((PropagatorConfig::for_drive(&d).dt - 0.5e-3).abs() < 1e-15);
    }

    #[test]
    fn static_run_matches_exact_exponential() {
        let params = TwoLevelStatic::new(0.3, 0.4, 0.7).unwrap();
        let period = PI / (0.4f64.hypot(0.7));
        let cfg = PropagatorConfig::new(period / 1e4, 100).unwrap();
        let traj = propagate_schrodinger(&params, &PureState::ket1(), 0.0, period, &cfg).unwrap();
        let u = matrix_exponential_propagator(&params.matrix(), period).unwrap();
        let exact = u.apply(&PureState::ket1().amplitudes());
        let got = traj.states.last().unwrap().amplitudes();
        assert!((got[0] - exact[0]).norm() < 5e-9 && (got[1] - exact[1]).norm() < 5e-9);
        assert_eq!(*traj.times.last().unwrap(), period);
    }

    #[test]
    fn uncoupled_populations_frozen() {
        let d = DriveModel::sinusoidal(2.0, -1.0, 0.0, 1.0).unwrap();
        let cfg = PropagatorConfig::for_drive(&d).with_stride(50);
        let traj = propagate_schrodinger(&d, &PureState::ket1(), 0.0, 20.0, &cfg).unwrap();
        for p in &traj.populations {
            assert!((p[0] - 1.0).abs() < 1e-9 && p[1] == 0.0);
        }
    }

    #[test]
    fn oversized_step_is_reported() {
        let h = Complex2Matrix::symmetric(10.0, 1.0, -10.0);
        let cfg = PropagatorConfig::new(0.5, 1).unwrap();
        let err = propagate_schrodinger(&h, &PureState::ket1(), 0.0, 10.0, &cfg).unwrap_err();
        assert!(matches!(err, Error::StepTooLarge { dt, .. } if dt == 0.5));
    }

    #[test]
    fn records_stride_checkpoints_and_endpoint() {
        let h = Complex2Matrix::sigma_x();
        let cfg = PropagatorConfig::new(0.1, 4).unwrap();
        let traj =
            propagate_schrodinger_through(&h, &PureState::ket1(), 0.0, 1.0, &[0.25, 0.5], &cfg)
                .unwrap();
        assert_eq!(traj.times.first(), Some(&0.0));
        assert_eq!(traj.times.last(), Some(&1.0));
        assert!(traj.times.contains(&0.25) && traj.times.contains(&0.5));
        assert!(traj.times.windows(2).all(|w| w[0] < w[1]));
        assert!(traj.dt_used <= 0.1);
        assert_eq!(traj.times.len(), traj.states.len());
        assert_eq!(traj.times.len(), traj.populations.len());
    }

    #[test]
    fn unitary_master_matches_schrodinger() {
        let d = DriveModel::linear(1.0, -1.0, 0.3).unwrap();
        let cfg = PropagatorConfig::new(1e-3, 10).unwrap();
        let pure = propagate_schrodinger(&d, &PureState::ket1(), -8.0, 8.0, &cfg).unwrap();
        let mixed = propagate_master(
            &d,
            &DensityMatrix::from_pure(&PureState::ket1()),
            None,
            -8.0,
            8.0,
            &cfg,
        )
        .unwrap();
        assert_eq!(pure.times, mixed.times);
        for ((a, b), rho) in pure
            .populations
            .iter()
            .zip(&mixed.populations)
            .zip(&mixed.states)
        {
            assert!((a[0] - b[0]).abs() < 1e-7 && (a[1] - b[1]).abs() < 1e-7);
            assert!((rho.purity() - 1.0).abs() < 1e-8);
            assert!((rho.trace() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn time_ordering_is_not_a_plain_exponential() {
        // strong sinusoidal drive over a quarter period
        let omega = 1.0;
        let d = DriveModel::sinusoidal(4.0, -4.0, 1.0, omega).unwrap();
        let t_end = PI / (2.0 * omega);
        let cfg = PropagatorConfig::new(1e-4, 1000).unwrap();
        let ordered = propagate_schrodinger(&d, &PureState::ket1(), 0.0, t_end, &cfg).unwrap();

        // exact integral of e1 over [0, T] is v(1 − cos ωT)/ω
        let mean = |amp: f64| amp * (1.0 - (omega * t_end).cos()) / (omega * t_end);
        let averaged = Complex2Matrix::symmetric(mean(4.0), 1.0, mean(-4.0));
        let naive = matrix_exponential_propagator(&averaged, t_end)
            .unwrap()
            .apply(&PureState::ket1().amplitudes());
        let p_naive = naive[1].norm_sqr();
        let p_ordered = ordered.final_populations().unwrap()[1];
        assert!(
            (p_naive - p_ordered).abs() > 1e-3,
            "{p_naive} vs {p_ordered}"
        );
    }

    #[test]
    fn diagonal_flow_keeps_coherence_zero() {
        let rho0 = DensityMatrix::diagonal(0.3, 0.7).unwrap();
        let h = Complex2Matrix::sigma_x().scale_re(0.0);
        let cfg = PropagatorConfig::new(0.01, 10).unwrap();
        let traj = propagate_master(&h, &rho0, None, 0.0, 5.0, &cfg).unwrap();
        for rho in &traj.states {
            assert_eq!(rho.coherence(), C64::new(0.0, 0.0));
        }
    }
}
