//! Command-line front end: argument parsing, parameter resolution, and dispatch.
//!
//! Values are resolved in the order: built-in defaults, `--config` file, flags.

use std::f64::consts::PI;
use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use crate::algebra::{matrix_exponential_propagator, DensityMatrix, PureState};
use crate::error::Error;
use crate::hamiltonians::{DriveModel, TwoLevelStatic};
use crate::io::{
    emit, ConfigFile, ContourResult, Experiment, ExperimentConfig, ExperimentOutput, Format,
    Params, StaticBeatsResult,
};
use crate::landau_zener::{
    contour_integral, default_config, default_half_window, probability_from_contour,
    run_lz_experiment_in_window,
};
use crate::nonsecular::{resonance_scan, run_master_experiment, DissipatorParams, EffectiveModel};
use crate::propagation::{PropagatorConfig, TrajectoryRecord};

pub const EXIT_SUCCESS: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// `--help` or `--version`; the text goes to stdout and the exit status is 0.
    Display(String),
    Usage(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Display(_) => EXIT_SUCCESS,
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Display(s) => f.write_str(s),
            CliError::Usage(s) => write!(f, "usage error: {s}"),
            CliError::Runtime(s) => write!(f, "error: {s}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "lzsim", version, about = "Driven two-level system simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Static double-well beats from the exact propagator.
    #[command(allow_negative_numbers = true)]
    StaticBeats(StaticBeatsArgs),
    /// Linear Landau–Zener sweep, numeric against closed form.
    #[command(allow_negative_numbers = true)]
    LzSweep(LzSweepArgs),
    /// Loop integral to the branch point by Gauss–Legendre quadrature.
    #[command(allow_negative_numbers = true)]
    ContourCheck(ContourArgs),
    /// Transfer efficiency over a grid of cosine depths α.
    #[command(allow_negative_numbers = true)]
    VibronScan(VibronScanArgs),
    /// Effective model with the non-secular dissipator; reports the flux.
    #[command(allow_negative_numbers = true)]
    MasterEq(MasterEqArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// JSON configuration file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_parser = parse_format)]
    format: Option<Format>,
    /// Fixed RK4 step.
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    record_stride: Option<usize>,
}

#[derive(Debug, Args)]
struct StaticBeatsArgs {
    #[command(flatten)]
    common: Common,
    /// Mean well energy.
    #[arg(long = "E")]
    mean_energy: Option<f64>,
    /// Half the well splitting.
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long = "J")]
    coupling: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Debug, Args)]
struct LzSweepArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long = "J")]
    coupling: Option<f64>,
    #[arg(long)]
    v: Option<f64>,
    #[arg(long)]
    u: Option<f64>,
    /// Half-width T of the window [−T, T].
    #[arg(long)]
    t_max: Option<f64>,
}

#[derive(Debug, Args)]
struct ContourArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long = "J")]
    coupling: Option<f64>,
    /// Sweep rate difference v − u.
    #[arg(long)]
    dv: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
}

#[derive(Debug, Args)]
struct VibronScanArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long = "J")]
    coupling: Option<f64>,
    #[arg(long)]
    v: Option<f64>,
    #[arg(long)]
    u: Option<f64>,
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long)]
    alpha_min: Option<f64>,
    #[arg(long)]
    alpha_max: Option<f64>,
    #[arg(long)]
    alpha_steps: Option<usize>,
    #[arg(long)]
    n_periods: Option<usize>,
    /// Worker threads for the scan.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, Args)]
struct MasterEqArgs {
    #[command(flatten)]
    common: Common,
    /// Effective coupling of H = s σx.
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    gamma_minus: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    eps1: Option<f64>,
    /// Defaults to eps1 + |v − u| when v and u are given.
    #[arg(long)]
    eps2: Option<f64>,
    #[arg(long)]
    v: Option<f64>,
    #[arg(long)]
    u: Option<f64>,
    /// Initial upper-level population.
    #[arg(long)]
    p2_init: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
}

fn parse_format(s: &str) -> Result<Format, String> {
    match s {
        "csv" => Ok(Format::Csv),
        "json" => Ok(Format::Json),
        other => Err(format!("expected csv or json, got {other}")),
    }
}

impl Command {
    fn split(self) -> (Experiment, Common, Params) {
        match self {
            Command::StaticBeats(a) => (
                Experiment::StaticBeats,
                a.common,
                Params {
                    mean_energy: a.mean_energy,
                    delta: a.delta,
                    coupling: a.coupling,
                    t_end: a.t_end,
                    samples: a.samples,
                    ..Params::default()
                },
            ),
            Command::LzSweep(a) => (
                Experiment::LzSweep,
                a.common,
                Params {
                    coupling: a.coupling,
                    v: a.v,
                    u: a.u,
                    t_max: a.t_max,
                    ..Params::default()
                },
            ),
            Command::ContourCheck(a) => (
                Experiment::ContourCheck,
                a.common,
                Params {
                    coupling: a.coupling,
                    dv: a.dv,
                    points: a.points,
                    ..Params::default()
                },
            ),
            Command::VibronScan(a) => (
                Experiment::VibronScan,
                a.common,
                Params {
                    coupling: a.coupling,
                    v: a.v,
                    u: a.u,
                    omega: a.omega,
                    alpha_min: a.alpha_min,
                    alpha_max: a.alpha_max,
                    alpha_steps: a.alpha_steps,
                    n_periods: a.n_periods,
                    threads: a.threads,
                    ..Params::default()
                },
            ),
            Command::MasterEq(a) => (
                Experiment::MasterEq,
                a.common,
                Params {
                    s: a.s,
                    gamma_minus: a.gamma_minus,
                    beta: a.beta,
                    eps1: a.eps1,
                    eps2: a.eps2,
                    v: a.v,
                    u: a.u,
                    p2_init: a.p2_init,
                    t_end: a.t_end,
                    ..Params::default()
                },
            ),
        }
    }
}

/// Parses `argv` (including the program name) into a validated configuration.
pub fn parse_cli<I, T>(args: I) -> Result<ExperimentConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| match e.kind() {
        ErrorKind::DisplayHelp
        | ErrorKind::DisplayVersion
        | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => CliError::Display(e.to_string()),
        _ => CliError::Usage(e.to_string()),
    })?;
    let (experiment, common, flags) = cli.command.split();

    let file = match &common.config {
        Some(path) => load_config_file(path)?,
        None => ConfigFile::default(),
    };
    if let Some(other) = file.experiment {
        if other != experiment {
            return Err(CliError::Usage(format!(
                "config file describes {}, not {}",
                other.name(),
                experiment.name()
            )));
        }
    }
    let mut params = file.params;
    params.overlay(&flags);
    params.dt = common.dt.or(params.dt);
    params.record_stride = common.record_stride.or(params.record_stride);

    let cfg = ExperimentConfig {
        experiment,
        params,
        output: common.out.or(file.output),
        format: common.format.or(file.format).unwrap_or_default(),
    };
    validate_config(&cfg)?;
    Ok(cfg)
}

fn load_config_file(path: &std::path::Path) -> Result<ConfigFile, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
}

fn missing(experiment: Experiment, flag: &str) -> CliError {
    CliError::Usage(format!(
        "{} requires --{flag} (flag or config file)",
        experiment.name()
    ))
}

fn need<T: Copy>(value: Option<T>, experiment: Experiment, flag: &str) -> Result<T, CliError> {
    value.ok_or_else(|| missing(experiment, flag))
}

/// Checks that every parameter the experiment needs is present.
pub fn validate_config(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let p = &cfg.params;
    let e = cfg.experiment;
    match e {
        Experiment::StaticBeats => {
            need(p.coupling, e, "J")?;
            need(p.delta, e, "delta")?;
        }
        Experiment::LzSweep => {
            need(p.coupling, e, "J")?;
            need(p.v, e, "v")?;
            need(p.u, e, "u")?;
        }
        Experiment::ContourCheck => {
            need(p.coupling, e, "J")?;
            need(p.dv, e, "dv")?;
        }
        Experiment::VibronScan => {
            for (value, flag) in [
                (p.coupling, "J"),
                (p.v, "v"),
                (p.u, "u"),
                (p.omega, "omega"),
                (p.alpha_min, "alpha-min"),
                (p.alpha_max, "alpha-max"),
            ] {
                need(value, e, flag)?;
            }
            let steps = need(p.alpha_steps, e, "alpha-steps")?;
            if steps == 0 {
                return Err(CliError::Usage("--alpha-steps must be at least 1".into()));
            }
            if p.threads == Some(0) {
                return Err(CliError::Usage("--threads must be at least 1".into()));
            }
        }
        Experiment::MasterEq => {
            for (value, flag) in [
                (p.s, "s"),
                (p.gamma_minus, "gamma-minus"),
                (p.beta, "beta"),
                (p.t_end, "t-end"),
            ] {
                need(value, e, flag)?;
            }
            if p.eps2.is_none() && (p.v.is_none() || p.u.is_none()) {
                return Err(missing(e, "eps2"));
            }
        }
    }
    Ok(())
}

fn propagator(dt: Option<f64>, fallback: f64, stride: usize) -> Result<PropagatorConfig, CliError> {
    Ok(PropagatorConfig::new(dt.unwrap_or(fallback), stride)?)
}

fn alpha_grid(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    if steps == 1 {
        return vec![lo];
    }
    (0..steps)
        .map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64)
        .collect()
}

/// Runs the configured experiment.
pub fn execute(cfg: &ExperimentConfig) -> Result<ExperimentOutput, CliError> {
    validate_config(cfg)?;
    let p = &cfg.params;
    let e = cfg.experiment;
    match e {
        Experiment::StaticBeats => {
            let model = TwoLevelStatic::new(
                p.mean_energy.unwrap_or(0.0),
                need(p.delta, e, "delta")?,
                need(p.coupling, e, "J")?,
            )?;
            let omega_r = model.j.hypot(model.delta);
            if omega_r == 0.0 && p.t_end.is_none() {
                return Err(CliError::Usage(
                    "static-beats with J = delta = 0 needs --t-end".into(),
                ));
            }
            let peak_time = PI / (2.0 * omega_r);
            let t_end = p.t_end.unwrap_or(2.0 * peak_time);
            let samples = p.samples.unwrap_or(201).max(2);
            let h = model.matrix();
            let psi0 = PureState::ket1();
            let mut traj = TrajectoryRecord {
                times: Vec::with_capacity(samples),
                states: Vec::with_capacity(samples),
                populations: Vec::with_capacity(samples),
                flux: None,
                dt_used: t_end / (samples - 1) as f64,
            };
            for i in 0..samples {
                let t = t_end * i as f64 / (samples - 1) as f64;
                let amps = matrix_exponential_propagator(&h, t)?.apply(&psi0.amplitudes());
                let psi = PureState::normalized(amps[0], amps[1])?;
                traj.times.push(t);
                traj.populations.push(psi.populations());
                traj.states.push(psi);
            }
            Ok(ExperimentOutput::StaticBeats(StaticBeatsResult {
                trajectory: traj,
                peak_time,
                peak_probability: model.j * model.j / (omega_r * omega_r),
            }))
        }
        Experiment::LzSweep => {
            let (j, v, u) = (
                need(p.coupling, e, "J")?,
                need(p.v, e, "v")?,
                need(p.u, e, "u")?,
            );
            DriveModel::linear(v, u, j)?;
            let half = p.t_max.unwrap_or_else(|| default_half_window(j, v, u));
            let base = default_config(j, v, u, half)?;
            let run_cfg = propagator(p.dt, base.dt, 1)?;
            Ok(ExperimentOutput::Lz(run_lz_experiment_in_window(
                j, v, u, &run_cfg, half,
            )?))
        }
        Experiment::ContourCheck => {
            let j = need(p.coupling, e, "J")?;
            let dv = need(p.dv, e, "dv")?;
            let points = p.points.unwrap_or(100_000);
            let integral = contour_integral(j, dv, 0.0, points)?;
            let expected_im = PI * j * j / dv;
            Ok(ExperimentOutput::Contour(ContourResult {
                integral_re: integral.re,
                integral_im: integral.im,
                expected_im,
                abs_error: (integral - num_complex::Complex64::new(0.0, expected_im)).norm(),
                probability: probability_from_contour(integral),
                points,
            }))
        }
        Experiment::VibronScan => {
            let base = DriveModel::cosine(
                need(p.v, e, "v")?,
                need(p.u, e, "u")?,
                need(p.coupling, e, "J")?,
                need(p.omega, e, "omega")?,
                need(p.alpha_max, e, "alpha-max")?.max(need(p.alpha_min, e, "alpha-min")?),
            )?;
            let alphas = alpha_grid(
                need(p.alpha_min, e, "alpha-min")?,
                need(p.alpha_max, e, "alpha-max")?,
                need(p.alpha_steps, e, "alpha-steps")?,
            );
            let default = PropagatorConfig::for_drive(&base);
            let run_cfg = propagator(p.dt, default.dt, p.record_stride.unwrap_or(1))?;
            let n_periods = p.n_periods.unwrap_or(1);
            let mut builder = rayon::ThreadPoolBuilder::new();
            if let Some(n) = p.threads {
                builder = builder.num_threads(n);
            }
            let pool = builder
                .build()
                .map_err(|err| CliError::Runtime(format!("thread pool: {err}")))?;
            let scan = pool.install(|| resonance_scan(&base, &alphas, n_periods, &run_cfg))?;
            Ok(ExperimentOutput::Scan(scan))
        }
        Experiment::MasterEq => {
            let eps1 = p.eps1.unwrap_or(0.0);
            let eps2 = match p.eps2 {
                Some(x) => x,
                None => eps1 + (need(p.v, e, "v")? - need(p.u, e, "u")?).abs(),
            };
            let d = DissipatorParams::new(
                need(p.gamma_minus, e, "gamma-minus")?,
                need(p.beta, e, "beta")?,
                eps1,
                eps2,
            )?;
            let eff = EffectiveModel::new(need(p.s, e, "s")?)?;
            let t_end = need(p.t_end, e, "t-end")?;
            let p2 = p.p2_init.unwrap_or(0.0);
            let rho0 = DensityMatrix::diagonal(1.0 - p2, p2)?;
            let rate = eff.s.max(d.gamma_minus).max(d.gamma_plus());
            let mut fallback = if rate > 0.0 {
                0.01 / rate
            } else {
                t_end / 1000.0
            };
            if t_end > 0.0 {
                fallback = fallback.min(t_end / 1000.0);
            }
            let dt = p.dt.unwrap_or(fallback);
            let steps = if dt > 0.0 {
                (t_end / dt).ceil() as usize
            } else {
                0
            };
            let stride = p.record_stride.unwrap_or((steps / 1000).max(1));
            let run_cfg = propagator(Some(dt), dt, stride)?;
            let trajectory = run_master_experiment(&eff, &d, &rho0, t_end, &run_cfg)?;
            let long_time_flux = trajectory.long_time_flux();
            Ok(ExperimentOutput::Master {
                trajectory,
                long_time_flux,
            })
        }
    }
}

/// Full command-line entry point; returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let outcome = parse_cli(args).and_then(|cfg| {
        let result = execute(&cfg)?;
        emit(&result, &cfg).map_err(|e| CliError::Runtime(format!("writing output: {e}")))
    });
    match outcome {
        Ok(()) => EXIT_SUCCESS,
        Err(CliError::Display(text)) => {
            print!("{text}");
            EXIT_SUCCESS
        }
        Err(err) => {
            eprintln!("{err}");
            err.exit_code()
        }
    }
}
