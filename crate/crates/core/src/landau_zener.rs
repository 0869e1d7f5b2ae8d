//! Landau–Zener closed forms, the branch-point loop integral, and the numerical
//! sweep experiment that checks them against the time-ordered dynamics.

use std::f64::consts::{FRAC_PI_2, TAU};
use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::algebra::eigen_hermitian;
use crate::error::{Error, Result};
use crate::hamiltonians::DriveModel;
use crate::propagation::{propagate_schrodinger, PropagatorConfig};

/// Nodes per Gauss–Legendre panel in [`contour_integral`].
pub const PANEL_ORDER: usize = 16;

fn check_sweep(j: f64, v: f64, u: f64) -> Result<()> {
    for (name, value) in [("J", j), ("v", v), ("u", u)] {
        if !value.is_finite() {
            return Err(Error::param(name, "must be finite"));
        }
    }
    if v == u {
        return Err(Error::DegenerateDrive(v));
    }
    Ok(())
}

/// Probability of staying on the diabatic level after one linear sweep, `exp(−2πJ²/|v−u|)`.
pub fn lz_probability(j: f64, v: f64, u: f64) -> Result<f64> {
    check_sweep(j, v, u)?;
    Ok((-TAU * j * j / (v - u).abs()).exp())
}

/// Diabatic transition probability for one pass of the sinusoidal vibron,
/// whose crossing gap rate is `ω|v−u|`: `1 − exp(−2πJ²/(ω|v−u|))`.
pub fn lz_pass_probability(j: f64, v: f64, u: f64, omega: f64) -> Result<f64> {
    check_sweep(j, v, u)?;
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::param(
            "omega",
            format!("must be positive, got {omega}"),
        ));
    }
    Ok(-(-TAU * j * j / (omega * (v - u).abs())).exp_m1())
}

/// `∫₀¹ √(1 − z²) dz` by composite Gauss–Legendre after `z = sin φ`, which turns
/// the integrand into the smooth `cos² φ` on `[0, π/2]`.
///
/// Uses `n_points / 16` panels of 16 nodes, so at most `n_points` evaluations.
pub fn quarter_circle_area(n_points: usize) -> Result<f64> {
    if n_points < PANEL_ORDER {
        return Err(Error::param(
            "n_points",
            format!("need at least {PANEL_ORDER}, got {n_points}"),
        ));
    }
    let rule = GaussLegendre::new(NonZeroUsize::new(PANEL_ORDER).expect("nonzero order"));
    let panels = n_points / PANEL_ORDER;
    let width = FRAC_PI_2 / panels as f64;
    Ok((0..panels)
        .map(|k| {
            let a = width * k as f64;
            rule.integrate(a, a + width, |phi| phi.cos().powi(2))
        })
        .sum())
}

/// Integral of `E₊(τ) − E₋(τ)` from 0 to the branch point `2iJ/(v−u)` along the
/// imaginary axis. With `τ = 2iJz/(v−u)` the integrand is `2J√(1−z²)`, giving
/// `iπJ²/(v−u)` in closed form.
pub fn contour_integral(j: f64, v: f64, u: f64, n_points: usize) -> Result<C64> {
    check_sweep(j, v, u)?;
    let area = quarter_circle_area(n_points)?;
    let jacobian = C64::new(0.0, 2.0 * j / (v - u));
    Ok(jacobian * (2.0 * j * area))
}

/// `|A|² = exp(−2 |Im ∫|)`: the decaying factor carried by the loop integral.
pub fn probability_from_contour(integral: C64) -> f64 {
    (-2.0 * integral.im.abs()).exp()
}

/// Half-width `T` of the default integration window `[−T, T]`:
/// `max(200|J|/|v−u|, 200/√|v−u|)`.
pub fn default_half_window(j: f64, v: f64, u: f64) -> f64 {
    let rate = (v - u).abs();
    (200.0 * j.abs() / rate).max(200.0 / rate.sqrt())
}

/// Step for a sweep over `[−T, T]`: the drive default, further capped so that
/// `dt · max|E±| ≤ 0.01` at the window edges where the diabatic energies peak.
pub fn default_config(j: f64, v: f64, u: f64, half_window: f64) -> Result<PropagatorConfig> {
    let drive = DriveModel::linear(v, u, j)?;
    let edge = [-half_window, half_window]
        .iter()
        .map(|&t| {
            let (lo, hi) = drive.adiabatic_levels(t);
            lo.abs().max(hi.abs())
        })
        .fold(0.0, f64::max);
    let base = PropagatorConfig::for_drive(&drive);
    let dt = if edge > 0.0 {
        base.dt.min(0.01 / edge)
    } else {
        base.dt
    };
    PropagatorConfig::new(dt, base.record_stride)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LZResult {
    /// `exp(−2πJ²/|v−u|)`
    pub p_analytic: f64,
    /// Population left on the adiabatic level that continues the initial diabatic state.
    pub p_numeric: f64,
    /// Population on the initial diabatic state itself at the end of the window.
    pub p_diabatic: f64,
    pub window: (f64, f64),
    #[serde(rename = "dt")]
    pub dt_used: f64,
}

/// Runs a linear sweep over the default window; see [`run_lz_experiment_in_window`].
pub fn run_lz_experiment(j: f64, v: f64, u: f64, cfg: &PropagatorConfig) -> Result<LZResult> {
    run_lz_experiment_in_window(j, v, u, cfg, default_half_window(j, v, u))
}

/// Starts in the adiabatic ground state at `−T`, propagates to `+T`, and reports
/// the survival on the starting diabatic level.
///
/// At finite `T` the lower adiabatic state still carries a diabatic admixture of
/// order `J/(|v−u|T)`, which contaminates a bare diabatic measurement. `p_numeric`
/// therefore projects onto the adiabatic state at `+T` that tends to the starting
/// diabatic level; `p_diabatic` keeps the bare value.
pub fn run_lz_experiment_in_window(
    j: f64,
    v: f64,
    u: f64,
    cfg: &PropagatorConfig,
    half_window: f64,
) -> Result<LZResult> {
    let p_analytic = lz_probability(j, v, u)?;
    if !(half_window > 0.0 && half_window.is_finite()) {
        return Err(Error::param("half_window", "must be positive"));
    }
    let drive = DriveModel::linear(v, u, j)?;
    let (t_start, t_end) = (-half_window, half_window);

    let start = eigen_hermitian(&drive.hamiltonian_at(t_start))?;
    let psi0 = start.vectors[0];
    let pops0 = psi0.populations();
    let level = if pops0[0] >= pops0[1] { 0 } else { 1 };

    let run_cfg = cfg.with_stride(usize::MAX);
    let traj = propagate_schrodinger(&drive, &psi0, t_start, t_end, &run_cfg)?;
    let psi_end = *traj.states.last().expect("trajectory has endpoints");
    let p_diabatic = psi_end.populations()[level];

    let end = eigen_hermitian(&drive.hamiltonian_at(t_end))?;
    let continuing = end
        .vectors
        .iter()
        .max_by(|a, b| a.populations()[level].total_cmp(&b.populations()[level]))
        .expect("two eigenvectors");
    let p_numeric = continuing.inner(&psi_end).norm_sqr();

    Ok(LZResult {
        p_analytic,
        p_numeric,
        p_diabatic,
        window: (t_start, t_end),
        dt_used: traj.dt_used,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_4, LN_2, PI};

    #[test]
    fn closed_form_examples() {
        assert_eq!(lz_probability(0.0, 1.0, -1.0).unwrap(), 1.0);
        let p = lz_probability(1.0, 4.0 * PI, 0.0).unwrap();
        assert!((p - (-0.5f64).exp()).abs() < 1e-15);
        assert!((p - 0.606_530_659_712_633_4).abs() < 1e-15);
        let rate = 3.0;
        let j = (rate * LN_2 / TAU).sqrt();
        assert!((lz_probability(j, 1.0, -2.0).unwrap() - 0.5).abs() < 1e-15);
        assert!(matches!(
            lz_probability(1.0, 2.0, 2.0),
            Err(Error::DegenerateDrive(_))
        ));
    }

    #[test]
    fn closed_form_symmetries() {
        let a = lz_probability(0.3, 1.2, -0.4).unwrap();
        assert_eq!(a, lz_probability(-0.3, 1.2, -0.4).unwrap());
        assert_eq!(a, lz_probability(0.3, -0.4, 1.2).unwrap());
    }

    #[test]
    fn pass_probability_examples() {
        let p = lz_pass_probability(1.0, TAU, 0.0, 1.0).unwrap();
        assert!((p - 0.632_120_558_828_557_7).abs() < 1e-15);
        assert!((lz_pass_probability(1e3, 1.0, 0.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
        let (j, v, u, omega) = (0.4, 1.5, -0.5, 0.7);
        let lhs = lz_pass_probability(j, v, u, omega).unwrap();
        let rhs = 1.0 - lz_probability(j, omega * v, omega * u).unwrap();
        assert!((lhs - rhs).abs() < 1e-15);
        assert!(lz_pass_probability(j, v, u, 0.0).is_err());
    }

    #[test]
    fn contour_examples() {
        let c = contour_integral(1.0, 1.0, 0.0, 1_000_000).unwrap();
        assert!((c - C64::new(0.0, PI)).norm() < 1e-8);
        assert_eq!(contour_integral(0.0, 1.0, 0.0, 64).unwrap().norm(), 0.0);
        assert!((quarter_circle_area(16).unwrap() - FRAC_PI_4).abs() < 1e-14);
        assert!(quarter_circle_area(15).is_err());
        let c = contour_integral(0.7, -1.0, 2.0, 64).unwrap();
        assert!((c - C64::new(0.0, PI * 0.49 / -3.0)).norm() < 1e-14);
    }

    #[test]
    fn contour_reproduces_closed_form_probability() {
        for &(j, v, u) in &[(0.25, 1.0, -1.0), (1.3, 0.2, 4.0), (0.05, -3.0, 3.0)] {
            let c = contour_integral(j, v, u, 256).unwrap();
            let lhs = probability_from_contour(c);
            let rhs = lz_probability(j, v, u).unwrap();
            assert!(
                (lhs - rhs).abs() <= 1e-12 * rhs.max(1e-300),
                "{lhs} vs {rhs}"
            );
        }
    }

    #[test]
    fn window_rule() {
        assert!((default_half_window(0.25, 1.0, -1.0) - 200.0 / 2f64.sqrt()).abs() < 1e-12);
        assert!((default_half_window(50.0, 1.0, -1.0) - 5000.0).abs() < 1e-9);
        let cfg = default_config(0.25, 1.0, -1.0, 100.0).unwrap();
        assert!((cfg.dt - 0.01 / 100f64.hypot(0.25)).abs() < 1e-15);
        let cfg = default_config(0.25, 1.0, -1.0, 0.5).unwrap();
        assert!((cfg.dt - 0.5e-3).abs() < 1e-15);
    }
}
