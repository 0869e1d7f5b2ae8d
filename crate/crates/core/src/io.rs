//! Experiment configuration and byte-stable CSV / JSON output.
//!
//! All floating-point numbers are written with 17 significant digits, so every
//! `f64` survives a write/read round trip unchanged.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::algebra::{DensityMatrix, PureState};
use crate::landau_zener::LZResult;
use crate::nonsecular::ScanResult;
use crate::propagation::TrajectoryRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    StaticBeats,
    LzSweep,
    ContourCheck,
    VibronScan,
    MasterEq,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::StaticBeats => "static-beats",
            Experiment::LzSweep => "lz-sweep",
            Experiment::ContourCheck => "contour-check",
            Experiment::VibronScan => "vibron-scan",
            Experiment::MasterEq => "master-eq",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Model and run parameters. JSON keys match the command-line flag names
/// (with `_` for `-`); absent values are omitted.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(rename = "E", skip_serializing_if = "Option::is_none")]
    pub mean_energy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(rename = "J", skip_serializing_if = "Option::is_none")]
    pub coupling: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dv: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_periods: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_minus: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p2_init: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub record_stride: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

macro_rules! overlay_fields {
    ($dst:expr, $src:expr, $($field:ident),* $(,)?) => {
        $( if $src.$field.is_some() { $dst.$field = $src.$field; } )*
    };
}

impl Params {
    /// Values present in `other` replace those in `self`.
    pub fn overlay(&mut self, other: &Params) {
        overlay_fields!(
            self,
            other,
            mean_energy,
            delta,
            coupling,
            v,
            u,
            dv,
            omega,
            alpha_min,
            alpha_max,
            alpha_steps,
            n_periods,
            points,
            s,
            gamma_minus,
            beta,
            eps1,
            eps2,
            p2_init,
            t_end,
            t_max,
            samples,
            dt,
            record_stride,
            threads,
        );
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    #[serde(flatten)]
    pub params: Params,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

/// The same document with every field optional, as read from `--config`.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub experiment: Option<Experiment>,
    #[serde(flatten)]
    pub params: Params,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
}

impl ExperimentConfig {
    pub fn to_json(&self) -> String {
        to_json_string(self)
    }
}

/// Loop-integral check result.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourResult {
    pub integral_re: f64,
    pub integral_im: f64,
    pub expected_im: f64,
    pub abs_error: f64,
    /// `exp(−2|Im ∫|)`
    pub probability: f64,
    pub points: usize,
}

/// Static quantum beats, sampled from the exact propagator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StaticBeatsResult {
    pub trajectory: TrajectoryRecord<PureState>,
    /// First time of maximal transfer, `π/(2√(J²+Δ²))`.
    pub peak_time: f64,
    /// `J²/(J²+Δ²)`
    pub peak_probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ExperimentOutput {
    StaticBeats(StaticBeatsResult),
    Lz(LZResult),
    Contour(ContourResult),
    Scan(ScanResult),
    Master {
        #[serde(flatten)]
        trajectory: TrajectoryRecord<DensityMatrix>,
        long_time_flux: Option<f64>,
    },
}

/// `{:.16e}`: 17 significant digits.
pub fn format_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

struct FixedDigits;

impl serde_json::ser::Formatter for FixedDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Compact JSON with 17-significant-digit floats.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedDigits);
    value
        .serialize(&mut ser)
        .expect("in-memory serialization does not fail");
    String::from_utf8(buf).expect("serde_json writes UTF-8")
}

#[derive(Serialize)]
struct Document<'a> {
    tool: &'static str,
    version: &'static str,
    config: &'a ExperimentConfig,
    result: &'a ExperimentOutput,
}

fn csv_line(out: &mut String, values: impl IntoIterator<Item = f64>) {
    let row: Vec<String> = values.into_iter().map(format_f64).collect();
    out.push_str(&row.join(","));
    out.push('\n');
}

/// Renders `result` in the configured format. Identical inputs give identical bytes.
pub fn render(result: &ExperimentOutput, cfg: &ExperimentConfig) -> String {
    match cfg.format {
        Format::Json => {
            let mut s = to_json_string(&Document {
                tool: "lzsim",
                version: crate::VERSION,
                config: cfg,
                result,
            });
            s.push('\n');
            s
        }
        Format::Csv => render_csv(result),
    }
}

fn render_csv(result: &ExperimentOutput) -> String {
    let mut out = String::new();
    match result {
        ExperimentOutput::StaticBeats(beats) => {
            out.push_str("time,re_c1,im_c1,re_c2,im_c2,p1,p2\n");
            let traj = &beats.trajectory;
            for ((t, psi), p) in traj.times.iter().zip(&traj.states).zip(&traj.populations) {
                let [c1, c2] = psi.amplitudes();
                csv_line(&mut out, [*t, c1.re, c1.im, c2.re, c2.im, p[0], p[1]]);
            }
        }
        ExperimentOutput::Lz(r) => {
            out.push_str("p_analytic,p_numeric,p_diabatic,t_start,t_end,dt\n");
            csv_line(
                &mut out,
                [
                    r.p_analytic,
                    r.p_numeric,
                    r.p_diabatic,
                    r.window.0,
                    r.window.1,
                    r.dt_used,
                ],
            );
        }
        ExperimentOutput::Contour(c) => {
            out.push_str("integral_re,integral_im,expected_im,abs_error,probability,points\n");
            let mut row: Vec<String> = [
                c.integral_re,
                c.integral_im,
                c.expected_im,
                c.abs_error,
                c.probability,
            ]
            .into_iter()
            .map(format_f64)
            .collect();
            row.push(c.points.to_string());
            let _ = writeln!(out, "{}", row.join(","));
        }
        ExperimentOutput::Scan(scan) => {
            let _ = writeln!(out, "{},{}", scan.parameter_name, scan.metric_name);
            for (p, m) in scan.parameters.iter().zip(&scan.metrics) {
                csv_line(&mut out, [*p, *m]);
            }
        }
        ExperimentOutput::Master { trajectory, .. } => {
            out.push_str("time,p1,p2,re_rho12,im_rho12,flux\n");
            let flux = trajectory.flux.as_deref().unwrap_or(&[]);
            for (i, (t, rho)) in trajectory.times.iter().zip(&trajectory.states).enumerate() {
                let p = trajectory.populations[i];
                let c = rho.coherence();
                let f = flux.get(i).copied().unwrap_or(f64::NAN);
                csv_line(&mut out, [*t, p[0], p[1], c.re, c.im, f]);
            }
        }
    }
    out
}

/// Writes the rendered result to `cfg.output`, or to stdout when no path is set.
pub fn emit(result: &ExperimentOutput, cfg: &ExperimentConfig) -> io::Result<()> {
    let text = render(result, cfg);
    match &cfg.output {
        Some(path) => std::fs::write(path, text),
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(text.as_bytes())?;
            lock.flush()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lz_config() -> ExperimentConfig {
        ExperimentConfig {
            experiment: Experiment::LzSweep,
            params: Params {
                coupling: Some(0.25),
                v: Some(1.0),
                u: Some(-1.0),
                dt: Some(0.1 + 0.2),
                ..Params::default()
            },
            output: Some("r.csv".into()),
            format: Format::Json,
        }
    }

    #[test]
    fn seventeen_digits() {
        assert_eq!(format_f64(1.0), "1.0000000000000000e0");
        assert_eq!(format_f64(-0.25), "-2.5000000000000000e-1");
        let x = 0.1 + 0.2;
        assert_eq!(format_f64(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn config_json_round_trip() {
        let cfg = lz_config();
        let text = cfg.to_json();
        let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cfg);
        assert!(text.contains("\"J\":2.5000000000000000e-1"));
        assert!(text.contains("\"experiment\":\"lz-sweep\""));
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = serde_json::from_str::<ConfigFile>(r#"{"experiment":"lz-sweep","bogus":1}"#);
        assert!(err.is_err());
    }

    #[test]
    fn overlay_prefers_later_values() {
        let mut base = Params {
            coupling: Some(1.0),
            v: Some(2.0),
            ..Params::default()
        };
        base.overlay(&Params {
            coupling: Some(3.0),
            ..Params::default()
        });
        assert_eq!(base.coupling, Some(3.0));
        assert_eq!(base.v, Some(2.0));
    }

    #[test]
    fn lz_result_json_fields() {
        let r = LZResult {
            p_analytic: 0.8,
            p_numeric: 0.79,
            p_diabatic: 0.78,
            window: (-10.0, 10.0),
            dt_used: 1e-3,
        };
        let doc = render(&ExperimentOutput::Lz(r), &lz_config());
        let v: serde_json::Value = serde_json::from_str(&doc).unwrap();
        for key in ["p_analytic", "p_numeric", "window", "dt"] {
            assert!(v["result"].get(key).is_some(), "missing {key}");
        }
        assert_eq!(v["tool"], "lzsim");
        assert_eq!(v["config"]["experiment"], "lz-sweep");
    }

    #[test]
    fn trajectory_csv_has_header_plus_rows() {
        let traj = TrajectoryRecord {
            times: vec![0.0, 0.5, 1.0],
            states: vec![PureState::ket1(); 3],
            populations: vec![[1.0, 0.0]; 3],
            flux: None,
            dt_used: 0.5,
        };
        let out = ExperimentOutput::StaticBeats(StaticBeatsResult {
            trajectory: traj,
            peak_time: 1.0,
            peak_probability: 1.0,
        });
        let mut cfg = lz_config();
        cfg.format = Format::Csv;
        let text = render(&out, &cfg);
        assert_eq!(text.lines().count(), 4);
        assert!(text.starts_with("time,re_c1,im_c1,re_c2,im_c2,p1,p2\n"));
        assert!(!text.contains('\r'));
    }
}
