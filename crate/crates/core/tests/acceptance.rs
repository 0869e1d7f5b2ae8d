//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any failure.
//!
//! Reference values are computed here from closed forms written out
//! independently of the library.

use std::f64::consts::{PI, TAU};
use std::process::ExitCode;
use std::time::Instant;

use lzsim::landau_zener::default_config;
use lzsim::nonsecular::fit_amplification;
use lzsim::{
    contour_integral, first_pass_transition, propagate_master, propagate_schrodinger,
    resonance_scan, run_lz_experiment, run_master_experiment, DensityMatrix, DissipatorParams,
    DriveModel, EffectiveModel, PropagatorConfig, PureState, TwoLevelStatic,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome, String> {
    Ok(Outcome { pass, detail })
}

type Check = fn() -> Result<Outcome, String>;

/// `exp(−2πJ²/|v−u|)`
fn survival(j: f64, dv: f64) -> f64 {
    (-TAU * j * j / dv.abs()).exp()
}

fn lz_grid() -> Result<Outcome, String> {
    const TOL: f64 = 0.01;
    // (exponent 2πJ²/|v−u|, v, u)
    let sets = [
        (0.05, 1.0, -1.0),
        (0.1, 0.5, -0.5),
        (0.2, 2.0, 0.0),
        (0.35, 1.0, -1.0),
        (0.5, -0.25, 0.25),
        (0.75, 1.5, -0.5),
        (1.0, 1.0, -1.0),
        (1.5, 0.75, -0.25),
        (2.0, -1.0, 1.0),
        (3.0, 1.0, 0.0),
        (4.0, 0.5, -1.5),
        (5.0, 1.0, -1.0),
    ];
    let mut worst: f64 = 0.0;
    for &(x, v, u) in &sets {
        let dv: f64 = v - u;
        let j = (x * dv.abs() / TAU).sqrt();
        let half = lzsim::landau_zener::default_half_window(j, v, u);
        let cfg = default_config(j, v, u, half).map_err(|e| e.to_string())?;
        let r = run_lz_experiment(j, v, u, &cfg).map_err(|e| e.to_string())?;
        worst = worst.max((r.p_numeric - survival(j, dv)).abs());
    }
    outcome(
        worst <= TOL,
        format!("12 sets, exponent 0.05..5, max |p_numeric - p_closed| = {worst:.3e} (tol {TOL})"),
    )
}

fn contour() -> Result<Outcome, String> {
    const TOL: f64 = 1e-8;
    let c = contour_integral(1.0, 1.0, 0.0, 100_000).map_err(|e| e.to_string())?;
    let err = (c.re.powi(2) + (c.im - PI).powi(2)).sqrt();
    outcome(
        err <= TOL,
        format!("J=1, v-u=1, 1e5 points, |I - i*pi| = {err:.3e} (tol {TOL:e})"),
    )
}

/// Vertex of the parabola through three equally spaced samples.
fn parabolic_peak(t: [f64; 3], y: [f64; 3]) -> (f64, f64) {
    let h = t[1] - t[0];
    let denom = y[0] - 2.0 * y[1] + y[2];
    let offset = 0.5 * (y[0] - y[2]) / denom;
    let peak = y[1] - 0.25 * (y[0] - y[2]) * offset;
    (t[1] + offset * h, peak)
}

fn first_peak(j: f64, delta: f64, t_end: f64, dt: f64) -> Result<(f64, f64), String> {
    let model = TwoLevelStatic::new(0.0, delta, j).map_err(|e| e.to_string())?;
    let cfg = PropagatorConfig::new(dt, 1).map_err(|e| e.to_string())?;
    let traj = propagate_schrodinger(&model, &PureState::ket1(), 0.0, t_end, &cfg)
        .map_err(|e| e.to_string())?;
    let p2: Vec<f64> = traj.populations.iter().map(|p| p[1]).collect();
    let i = (1..p2.len() - 1)
        .find(|&i| p2[i] >= p2[i - 1] && p2[i] > p2[i + 1])
        .ok_or("no interior maximum")?;
    Ok(parabolic_peak(
        [traj.times[i - 1], traj.times[i], traj.times[i + 1]],
        [p2[i - 1], p2[i], p2[i + 1]],
    ))
}

fn static_beats() -> Result<Outcome, String> {
    const TIME_TOL: f64 = 1e-6;
    const PEAK_TOL: f64 = 1e-9;
    let j = 0.8;
    let expected = PI / (2.0 * j);
    let (t_peak, p_full) = first_peak(j, 0.0, 1.5 * expected, 1e-3)?;
    let time_err = (t_peak - expected).abs() / expected;

    let (_, p_half) = first_peak(j, j, 1.5 * expected, 1e-3)?;
    let peak_err = (p_half - 0.5).abs();
    outcome(
        time_err <= TIME_TOL && peak_err <= PEAK_TOL && (p_full - 1.0).abs() < 1e-9,
        format!(
            "delta=0: t_peak rel err {time_err:.3e} (tol {TIME_TOL:e}), P={p_full:.12}; \
             delta=J: max P err {peak_err:.3e} (tol {PEAK_TOL:e})"
        ),
    )
}

fn first_pass() -> Result<Outcome, String> {
    const TOL: f64 = 0.15;
    let omega = 1.0;
    let mut worst: f64 = 0.0;
    for &dv in &[20.0, 50.0, 100.0] {
        for &x in &[0.05f64, 0.1, 0.2] {
            let j = (x * omega * dv / TAU).sqrt();
            let drive =
                DriveModel::sinusoidal(dv / 2.0, -dv / 2.0, j, omega).map_err(|e| e.to_string())?;
            let cfg = PropagatorConfig::new(0.01 / (dv / 2.0 + j), usize::MAX)
                .map_err(|e| e.to_string())?;
            let p = first_pass_transition(&drive, &cfg).map_err(|e| e.to_string())?;
            let expected = 1.0 - (-x).exp();
            worst = worst.max((p - expected).abs() / expected);
        }
    }
    outcome(
        worst <= TOL,
        format!("9 drives, exponent <= 0.2, max relative error {worst:.3e} (tol {TOL})"),
    )
}

fn scan() -> Result<Outcome, String> {
    const SUPPRESSION: f64 = 0.2;
    let base = DriveModel::cosine(1.0, 0.0, 0.05, 0.05, 1.0).map_err(|e| e.to_string())?;
    let alphas = [0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 2.0];
    let cfg = PropagatorConfig::for_drive(&base);
    let r = resonance_scan(&base, &alphas, 1, &cfg).map_err(|e| e.to_string())?;
    let at = |a: f64| r.metric_at(a).unwrap_or(f64::NAN);
    let ratio = at(0.5) / at(1.0);
    let argmax = r.argmax().unwrap_or(f64::NAN);
    let table: Vec<String> = alphas
        .iter()
        .map(|&a| format!("{a}:{:.4}", at(a)))
        .collect();
    outcome(
        argmax == 1.0 && ratio < SUPPRESSION,
        format!(
            "J/|v-u|=0.05, argmax alpha={argmax}, eff(0.5)/eff(1)={ratio:.3e} (< {SUPPRESSION}); [{}]",
            table.join(" ")
        ),
    )
}

/// Steady upper population of `H = sσx` with the dissipator, from the rate balance
/// with the coherence eliminated.
fn steady_p2(s: f64, gm: f64, gp: f64) -> f64 {
    let w = 2.0 * s * s / (0.5 * (gm + gp));
    (w + gp) / (2.0 * w + gp + gm)
}

fn master() -> Result<Outcome, String> {
    const TRACE_TOL: f64 = 1e-9;
    const RATIO_TOL: f64 = 1e-6;
    const RESID_TOL: f64 = 1e-2;
    let (gm, beta, eps1, eps2) = (1.0, 1.0, 0.0, 1.0);
    let d = DissipatorParams::new(gm, beta, eps1, eps2).map_err(|e| e.to_string())?;
    let boltzmann = (-beta * (eps2 - eps1)).exp();

    // Trace drift over 10⁴ steps with a coherent start.
    let eff = EffectiveModel::new(0.3).map_err(|e| e.to_string())?;
    let rho0 = DensityMatrix::from_pure(
        &PureState::normalized(1.0.into(), num_complex::Complex64::new(0.3, 0.4))
            .map_err(|e| e.to_string())?,
    );
    let cfg = PropagatorConfig::new(1e-3, 1).map_err(|e| e.to_string())?;
    let traj =
        propagate_master(&eff, &rho0, Some(&d), 0.0, 10.0, &cfg).map_err(|e| e.to_string())?;
    let drift = traj
        .states
        .iter()
        .map(|r| (r.trace() - 1.0).abs())
        .fold(0.0, f64::max);

    let cfg = PropagatorConfig::new(0.01, 100).map_err(|e| e.to_string())?;
    let t_end = 60.0;
    let rho0 = DensityMatrix::diagonal(1.0, 0.0).map_err(|e| e.to_string())?;
    let still = run_master_experiment(&EffectiveModel::new(0.0).unwrap(), &d, &rho0, t_end, &cfg)
        .map_err(|e| e.to_string())?;
    let p = still.final_populations().ok_or("empty trajectory")?;
    let ratio_err = (p[1] / p[0] - boltzmann).abs();

    let s_values: Vec<f64> = [0.0, 0.01, 0.02, 0.04].iter().map(|k| k * gm).collect();
    let mut fluxes = Vec::new();
    let mut oracle_err: f64 = 0.0;
    for &s in &s_values {
        let eff = EffectiveModel::new(s).map_err(|e| e.to_string())?;
        let traj =
            run_master_experiment(&eff, &d, &rho0, t_end, &cfg).map_err(|e| e.to_string())?;
        let f = traj.long_time_flux().ok_or("no flux")?;
        oracle_err = oracle_err.max((f - gm * steady_p2(s, gm, gm * boltzmann)).abs());
        fluxes.push(f);
    }
    let fit = fit_amplification(&s_values, &fluxes).map_err(|e| e.to_string())?;
    outcome(
        drift <= TRACE_TOL
            && ratio_err <= RATIO_TOL
            && fit.relative_residual < RESID_TOL
            && fit.curvature > 0.0,
        format!(
            "trace drift {drift:.2e} (tol {TRACE_TOL:e}); p2/p1 err {ratio_err:.2e} (tol {RATIO_TOL:e}); \
             F = {:.6} + {:.6} s^2, residual {:.2e} (tol {RESID_TOL:e}); max |F - F_steady| {oracle_err:.2e}",
            fit.f0, fit.curvature, fit.relative_residual
        ),
    )
}

fn rk4_order() -> Result<Outcome, String> {
    let drive = DriveModel::linear(1.0, -1.0, 0.25).map_err(|e| e.to_string())?;
    let (t0, t1) = (-5.0, 5.0);
    let dt = 0.02;
    let final_state = |step: f64| -> Result<[num_complex::Complex64; 2], String> {
        let cfg = PropagatorConfig::new(step, usize::MAX).map_err(|e| e.to_string())?;
        let traj = propagate_schrodinger(&drive, &PureState::ket1(), t0, t1, &cfg)
            .map_err(|e| e.to_string())?;
        Ok(traj.states.last().ok_or("empty")?.amplitudes())
    };
    let reference = final_state(dt / 8.0)?;
    let err = |a: [num_complex::Complex64; 2]| {
        ((a[0] - reference[0]).norm_sqr() + (a[1] - reference[1]).norm_sqr()).sqrt()
    };
    let e1 = err(final_state(dt)?);
    let e2 = err(final_state(dt / 2.0)?);
    let ratio = e1 / e2;
    outcome(
        (ratio - 16.0).abs() <= 0.2 * 16.0,
        format!("error(dt)/error(dt/2) = {ratio:.3} (16 +/- 20%), errors {e1:.2e}, {e2:.2e}"),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, Check); 7] = [
        ("1 lz-formula", lz_grid),
        ("2 contour", contour),
        ("3 static-beats", static_beats),
        ("4 first-pass", first_pass),
        ("5 resonance-scan", scan),
        ("6 master-equation", master),
        ("7 rk4-order", rk4_order),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let result = check();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(o) => {
                let tag = if o.pass { "PASS" } else { "FAIL" };
                if !o.pass {
                    failed += 1;
                }
                println!("{tag} [{name}] {} ({secs:.2}s)", o.detail);
            }
            Err(e) => {
                failed += 1;
                println!("FAIL [{name}] error: {e} ({secs:.2}s)");
            }
        }
    }
    println!("acceptance: {} of 7 passed", 7 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
