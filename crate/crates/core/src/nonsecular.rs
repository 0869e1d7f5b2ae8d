//! Vibron-driven multi-pass dynamics and the coarse-grained non-secular master
//! equation `dρ/dτ = −i[s σₓ, ρ] + θ(ρ)`.

use std::f64::consts::{FRAC_PI_2, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{eigen_hermitian, Complex2Matrix, DensityMatrix, PureState};
use crate::error::{Error, Result};
use crate::hamiltonians::{DriveModel, Hamiltonian};
use crate::propagation::{
    propagate_master, propagate_schrodinger, propagate_schrodinger_through, Dissipator,
    PropagatorConfig, TrajectoryRecord,
};

/// Rates of the two-level GKSL dissipator. `γ⁻` drives `|2⟩ → |1⟩`; the upward
/// rate follows from detailed balance, `γ⁺ = γ⁻ e^{−β(ε₂−ε₁)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DissipatorParams {
    pub gamma_minus: f64,
    pub beta: f64,
    pub eps1: f64,
    pub eps2: f64,
}

impl DissipatorParams {
    pub fn new(gamma_minus: f64, beta: f64, eps1: f64, eps2: f64) -> Result<Self> {
        if !(gamma_minus >= 0.0 && gamma_minus.is_finite()) {
            return Err(Error::param("gamma_minus", "must be a non-negative rate"));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::param("beta", "inverse temperature must be positive"));
        }
        if !(eps1.is_finite() && eps2.is_finite()) {
            return Err(Error::param("eps2", "level energies must be finite"));
        }
        if !(eps2 > eps1) {
            return Err(Error::param(
                "eps2",
                format!("need eps2 > eps1, got {eps2} <= {eps1}"),
            ));
        }
        Ok(Self {
            gamma_minus,
            beta,
            eps1,
            eps2,
        })
    }

    /// `e^{−β(ε₂−ε₁)}`
    pub fn boltzmann_ratio(&self) -> f64 {
        (-self.beta * (self.eps2 - self.eps1)).exp()
    }

    pub fn gamma_plus(&self) -> f64 {
        self.gamma_minus * self.boltzmann_ratio()
    }

    /// The thermal state `diag(p₁, p₂)` with `p₂/p₁ = e^{−β(ε₂−ε₁)}`.
    pub fn gibbs_state(&self) -> DensityMatrix {
        let r = self.boltzmann_ratio();
        DensityMatrix::from_matrix_unchecked(Complex2Matrix::diagonal(
            1.0 / (1.0 + r),
            r / (1.0 + r),
        ))
    }
}

/// `θ(ρ) = γ⁻(⟨2|ρ|2⟩|1⟩⟨1| − ½{ρ, |2⟩⟨2|}) + γ⁺(⟨1|ρ|1⟩|2⟩⟨2| − ½{ρ, |1⟩⟨1|})`
pub fn dissipator_apply(rho: &DensityMatrix, d: &DissipatorParams) -> Complex2Matrix {
    d.apply(rho.matrix())
}

impl Dissipator for DissipatorParams {
    fn apply(&self, rho: &Complex2Matrix) -> Complex2Matrix {
        let p1 = Complex2Matrix::diagonal(1.0, 0.0);
        let p2 = Complex2Matrix::diagonal(0.0, 1.0);
        let down = p1.scale(rho.get(1, 1)) - rho.anticommutator(&p2).scale_re(0.5);
        let up = p2.scale(rho.get(0, 0)) - rho.anticommutator(&p1).scale_re(0.5);
        down.scale_re(self.gamma_minus) + up.scale_re(self.gamma_plus())
    }
}

/// Coarse-grained non-secular Hamiltonian `H = s σₓ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveModel {
    pub s: f64,
}

impl EffectiveModel {
    pub fn new(s: f64) -> Result<Self> {
        if !(s >= 0.0 && s.is_finite()) {
            return Err(Error::param("s", format!("must be non-negative, got {s}")));
        }
        Ok(Self { s })
    }

    pub fn matrix(&self) -> Complex2Matrix {
        Complex2Matrix::sigma_x().scale_re(self.s)
    }
}

impl Hamiltonian for EffectiveModel {
    fn at(&self, _t: f64) -> Complex2Matrix {
        self.matrix()
    }
}

/// A one-parameter sweep: `metrics[i]` was measured at `parameters[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub parameter_name: String,
    pub parameters: Vec<f64>,
    pub metric_name: String,
    pub metrics: Vec<f64>,
    pub drive: DriveModel,
    pub config: PropagatorConfig,
    pub n_periods: usize,
}

impl ScanResult {
    /// Parameter value with the largest metric (first one on ties).
    pub fn argmax(&self) -> Option<f64> {
        let mut best: Option<(f64, f64)> = None;
        for (&p, &m) in self.parameters.iter().zip(&self.metrics) {
            if best.is_none_or(|(_, bm)| m > bm) {
                best = Some((p, m));
            }
        }
        best.map(|(p, _)| p)
    }

    pub fn metric_at(&self, parameter: f64) -> Option<f64> {
        self.parameters
            .iter()
            .position(|&p| p == parameter)
            .map(|i| self.metrics[i])
    }
}

fn require_periodic(drive: &DriveModel) -> Result<f64> {
    drive.validate()?;
    match drive {
        DriveModel::LinearSweep { .. } => Err(Error::param(
            "drive",
            "vibron experiments need a sinusoidal or cosine drive",
        )),
        _ => Ok(drive.period().expect("periodic drive")),
    }
}

/// Propagates `|1⟩` from `t = 0` over `n_periods` vibron periods, recording the
/// populations at every stride step, every diabatic crossing, and every period boundary.
pub fn run_vibron_experiment(
    drive: &DriveModel,
    n_periods: usize,
    cfg: &PropagatorConfig,
) -> Result<TrajectoryRecord<PureState>> {
    let period = require_periodic(drive)?;
    if n_periods == 0 {
        return Err(Error::param("n_periods", "must be at least 1"));
    }
    let t_end = period * n_periods as f64;
    let mut checkpoints: Vec<f64> = (1..n_periods).map(|k| period * k as f64).collect();
    checkpoints.extend(drive.find_crossings(0.0, t_end)?.iter().map(|c| c.time));
    propagate_schrodinger_through(drive, &PureState::ket1(), 0.0, t_end, &checkpoints, cfg)
}

/// Diabatic transition probability for the single crossing at `t = 0` of a
/// sinusoidal drive.
///
/// The run spans `[−π/(2ω), π/(2ω)]`, between the extrema of the diabatic gap
/// where the drive is momentarily stationary. It starts on the adiabatic state
/// that carries diabatic level 1 and returns the population found on the
/// adiabatic state carrying level 2 at the end, which is how a diabatic
/// transition shows up once the levels have separated again.
pub fn first_pass_transition(drive: &DriveModel, cfg: &PropagatorConfig) -> Result<f64> {
    let omega = match *drive {
        DriveModel::SinusoidalSweep { omega, .. } => omega,
        _ => {
            return Err(Error::param(
                "drive",
                "first pass is defined for the sinusoidal sweep",
            ))
        }
    };
    drive.validate()?;
    let (t0, t1) = (-FRAC_PI_2 / omega, FRAC_PI_2 / omega);
    let carrying = |t: f64, level: usize| -> Result<PureState> {
        let eig = eigen_hermitian(&drive.hamiltonian_at(t))?;
        let [a, b] = eig.vectors;
        Ok(if a.populations()[level] >= b.populations()[level] {
            a
        } else {
            b
        })
    };
    let psi0 = carrying(t0, 0)?;
    let traj = propagate_schrodinger(drive, &psi0, t0, t1, &cfg.with_stride(usize::MAX))?;
    let psi1 = traj.states.last().expect("trajectory has endpoints");
    Ok(carrying(t1, 1)?.inner(psi1).norm_sqr())
}

const RISE_CEILING: f64 = 0.9;
const FIT_RESIDUAL_LIMIT: f64 = 0.05;
const MIN_PERIODS: f64 = 10.0;

/// Fits the stroboscopic (once per vibron period) population `p₂` to `sin²(s t)`
/// over its initial rise and returns the non-secular amplitude `s`.
///
/// The rise is the leading run of non-decreasing samples below 0.9, with `t`
/// measured from the first sample. A flat zero trajectory yields `s = 0`; fewer
/// than three rise samples or a relative RMS residual above 5% is a fit failure.
pub fn extract_effective_s(
    traj: &TrajectoryRecord<PureState>,
    omega: f64,
) -> Result<EffectiveModel> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::param("omega", "must be positive"));
    }
    let period = TAU / omega;
    let (Some(&first), Some(&last)) = (traj.times.first(), traj.times.last()) else {
        return Err(Error::param("traj", "trajectory is empty"));
    };
    if last - first < MIN_PERIODS * period * (1.0 - 1e-9) {
        return Err(Error::param(
            "traj",
            format!(
                "spans {:.3} periods, need at least 10",
                (last - first) / period
            ),
        ));
    }

    let mut samples: Vec<(f64, f64)> = Vec::new();
    let mut last_k: Option<i64> = None;
    for (&t, pops) in traj.times.iter().zip(&traj.populations) {
        let k = (t / period).round();
        if (t - k * period).abs() <= 1e-9 * (1.0 + t.abs()) && last_k != Some(k as i64) {
            samples.push((t, pops[1]));
            last_k = Some(k as i64);
        }
    }
    if samples.iter().all(|&(_, p)| p <= 1e-12) {
        return EffectiveModel::new(0.0);
    }

    let t0 = samples[0].0;
    let mut rise: Vec<(f64, f64)> = vec![(0.0, samples[0].1)];
    for w in samples.windows(2) {
        let (t, p) = w[1];
        if p >= RISE_CEILING || p < w[0].1 {
            break;
        }
        rise.push((t - t0, p));
    }
    if rise.len() < 3 {
        return Err(Error::FitFailed {
            reason: format!(
                "only {} stroboscopic samples in the initial rise",
                rise.len()
            ),
            residual: f64::NAN,
        });
    }

    let (t_last, p_last) = *rise.last().expect("non-empty");
    let mut s = p_last.sqrt().min(1.0).asin() / t_last;
    for _ in 0..100 {
        let (mut num, mut den) = (0.0, 0.0);
        for &(t, p) in &rise {
            let r = (s * t).sin().powi(2) - p;
            let g = t * (2.0 * s * t).sin();
            num += r * g;
            den += g * g;
        }
        if den == 0.0 {
            break;
        }
        let step = num / den;
        s -= step;
        if step.abs() <= 1e-15 * s.abs() {
            break;
        }
    }
    let s = s.abs();
    let scale = rise.iter().map(|&(_, p)| p).fold(0.0, f64::max);
    let rms = (rise
        .iter()
        .map(|&(t, p)| ((s * t).sin().powi(2) - p).powi(2))
        .sum::<f64>()
        / rise.len() as f64)
        .sqrt();
    let residual = rms / scale;
    if !(residual <= FIT_RESIDUAL_LIMIT) {
        return Err(Error::FitFailed {
            reason: "stroboscopic population does not follow sin²(s t)".into(),
            residual,
        });
    }
    EffectiveModel::new(s)
}

/// Transfer efficiency (maximum `p₂` over the run) on a grid of cosine depths `α`.
///
/// Grid points run in parallel on the current rayon pool; the output order
/// follows `alphas`.
pub fn resonance_scan(
    base: &DriveModel,
    alphas: &[f64],
    n_periods: usize,
    cfg: &PropagatorConfig,
) -> Result<ScanResult> {
    let DriveModel::CosineAnsatz { v, u, j, omega, .. } = *base else {
        return Err(Error::param(
            "drive",
            "resonance scan needs the cosine ansatz",
        ));
    };
    if alphas.is_empty() {
        return Err(Error::param("alphas", "grid is empty"));
    }
    let metrics = alphas
        .par_iter()
        .map(|&alpha| {
            let drive = DriveModel::cosine(v, u, j, omega, alpha)?;
            Ok(run_vibron_experiment(&drive, n_periods, cfg)?.max_p2())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(ScanResult {
        parameter_name: "alpha".into(),
        parameters: alphas.to_vec(),
        metric_name: "efficiency".into(),
        metrics,
        drive: *base,
        config: *cfg,
        n_periods,
    })
}

/// Integrates the non-secular master equation from `t = 0` and attaches the
/// downward flux `F(t) = γ⁻ ⟨2|ρ(t)|2⟩`.
pub fn run_master_experiment(
    eff: &EffectiveModel,
    d: &DissipatorParams,
    rho0: &DensityMatrix,
    t_end: f64,
    cfg: &PropagatorConfig,
) -> Result<TrajectoryRecord<DensityMatrix>> {
    let mut traj = propagate_master(eff, rho0, Some(d), 0.0, t_end, cfg)?;
    traj.flux = Some(
        traj.populations
            .iter()
            .map(|p| d.gamma_minus * p[1])
            .collect(),
    );
    Ok(traj)
}

/// Least-squares fit `F(s) ≈ F₀ + c s²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplificationFit {
    pub f0: f64,
    pub curvature: f64,
    /// Largest residual relative to the spread of the fluxes.
    pub relative_residual: f64,
}

pub fn fit_amplification(s_values: &[f64], fluxes: &[f64]) -> Result<AmplificationFit> {
    if s_values.len() != fluxes.len() || s_values.len() < 2 {
        return Err(Error::param(
            "fluxes",
            "need at least two (s, F) pairs of equal length",
        ));
    }
    let n = s_values.len() as f64;
    let x: Vec<f64> = s_values.iter().map(|s| s * s).collect();
    let mx = x.iter().sum::<f64>() / n;
    let my = fluxes.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|xi| (xi - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::param("s_values", "need at least two distinct |s|"));
    }
    let sxy: f64 = x
        .iter()
        .zip(fluxes)
        .map(|(xi, yi)| (xi - mx) * (yi - my))
        .sum();
    let curvature = sxy / sxx;
    let f0 = my - curvature * mx;
    let max_resid = x
        .iter()
        .zip(fluxes)
        .map(|(xi, yi)| (yi - (f0 + curvature * xi)).abs())
        .fold(0.0, f64::max);
    let spread = fluxes.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - fluxes.iter().copied().fold(f64::INFINITY, f64::min);
    let relative_residual = if spread > 0.0 {
        max_resid / spread
    } else if max_resid == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(AmplificationFit {
        f0,
        curvature,
        relative_residual,
    })
}
