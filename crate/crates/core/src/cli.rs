//! Command-line front end. Exit codes: 0 success, 1 invalid input or
//! configuration, 2 simulation failure, 3 infeasible operating point.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::analysis::{damping_estimate, dominant_frequency, p_delta_sweep, sweep_peak};
use crate::config::RunConfig;
use crate::error::Error;
use crate::line_models::{
    compensation_for, effective_reactance, line_admittance, loadability_gain, size_series_capacitor,
    ssr_frequency, CompensationSpec, LineParams, PRACTICAL_COMPENSATION_LIMIT,
};
use crate::sim::{run_scenario, Channel, SimResult};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_SIMULATION: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;

const VERSION: &str = env!("CARGO_PKG_VERSION");
const SSR_CHANNEL: &str = "i_a_transient: phase-a sending current minus its steady-state forced response";
const POWER_CONVENTION: &str = "p_w/q_var use the sending-end sign convention (negative when the sending bus exports); *_delivered_* columns are their negatives";

#[derive(Debug, Parser)]
#[command(name = "sercomp", version, about = "Series-compensated line simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one scenario and write timeseries.csv, summary.json and manifest.json.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Measure the resonance frequency and decay rate for several compensation degrees.
    SsrSweep {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated compensation degrees, each in (0, 1).
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Tabulate the line admittance G_αα and G_αβ over a log-spaced frequency grid.
    Bode {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        fmin: f64,
        #[arg(long)]
        fmax: f64,
        #[arg(long)]
        points: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Size the series capacitor for a compensation degree.
    Design(DesignArgs),
    /// Steady-state power against angle, compensated and uncompensated.
    Pdelta {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        delta_min_deg: f64,
        #[arg(long, default_value_t = 179.0, allow_hyphen_values = true)]
        delta_max_deg: f64,
        #[arg(long, default_value_t = 180)]
        steps: usize,
    },
}

#[derive(Debug, Args)]
struct DesignArgs {
    #[arg(long)]
    n: f64,
    #[arg(long)]
    r_series_ohm: Option<f64>,
    #[arg(long)]
    l_series_h: Option<f64>,
    #[arg(long)]
    f0_hz: Option<f64>,
    #[arg(long)]
    c_shunt_per_end_f: Option<f64>,
    #[arg(long)]
    num_segments: Option<u32>,
    /// Directory for design.json.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Divergence { .. } | Error::Singular { .. } => EXIT_SIMULATION,
            Error::Capability { .. } => EXIT_INFEASIBLE,
            _ => EXIT_INPUT,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult<T = ()> = std::result::Result<T, Failure>;

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let outcome = match cli.command {
        Command::Simulate { config, out } => cmd_simulate(&config, &out),
        Command::SsrSweep { config, n, out } => cmd_ssr_sweep(&config, &n, &out),
        Command::Bode {
            config,
            fmin,
            fmax,
            points,
            out,
        } => cmd_bode(&config, fmin, fmax, points, &out),
        Command::Design(args) => cmd_design(&args),
        Command::Pdelta {
            config,
            out,
            delta_min_deg,
            delta_max_deg,
            steps,
        } => cmd_pdelta(&config, &out, (delta_min_deg, delta_max_deg), steps),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn load_config(path: &Path) -> CliResult<(RunConfig, Vec<u8>)> {
    let bytes = fs::read(path).map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
    let cfg = RunConfig::from_json(&bytes)?;
    Ok((cfg, bytes))
}

/// Writes `contents` to `dir/name` through a temporary file and a rename.
fn write_atomic(dir: &Path, name: &str, contents: &[u8]) -> CliResult {
    let io_err = |e: std::io::Error| Failure::input(format!("cannot write {}: {e}", dir.join(name).display()));
    fs::create_dir_all(dir).map_err(io_err)?;
    let tmp = dir.join(format!(".{name}.tmp"));
    let mut f = fs::File::create(&tmp).map_err(io_err)?;
    f.write_all(contents).map_err(io_err)?;
    f.sync_all().map_err(io_err)?;
    fs::rename(&tmp, dir.join(name)).map_err(io_err)
}

fn write_json(dir: &Path, name: &str, value: &impl Serialize) -> CliResult {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Failure::input(e.to_string()))?;
    s.push('\n');
    write_atomic(dir, name, s.as_bytes())
}

fn csv(header: &[&str], rows: impl Iterator<Item = Vec<f64>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            let _ = write!(out, "{v:?}");
        }
        out.push('\n');
    }
    out
}

fn manifest(command: &str, cfg: Option<(&RunConfig, &[u8])>, extra: Value) -> Value {
    let mut m = json!({
        "tool": "sercomp",
        "version": VERSION,
        "command": command,
    });
    if let Some((cfg, bytes)) = cfg {
        m["config_sha256"] = Value::String(hex::encode(Sha256::digest(bytes)));
        m["resolved_config"] = serde_json::to_value(cfg.resolved()).unwrap_or(Value::Null);
    }
    m["interpretation"] = extra;
    m
}

fn interpretation(result: Option<&SimResult>) -> Value {
    json!({
        "event_semantics": result.map(|r| r.event_semantics),
        "ssr_measurement_channel": SSR_CHANNEL,
        "power_sign_convention": POWER_CONVENTION,
        "defaults_origin": "line constants, gains and step size are engineering defaults, not measured data",
    })
}

fn finite_or_null(v: Option<f64>) -> Value {
    match v {
        Some(x) if x.is_finite() => json!(x),
        _ => Value::Null,
    }
}

fn last_event_time(cfg: &RunConfig) -> f64 {
    cfg.events.last().map(|e| e.t_s).unwrap_or(0.0)
}

/// Time after `t_start` from which `series` stays within ±`tol` of `target`.
fn settling_time(time: &[f64], series: &[f64], t_start: f64, target: f64, tol: f64) -> Option<f64> {
    let band = tol * target.abs().max(1.0);
    let last_out = time
        .iter()
        .zip(series)
        .rposition(|(t, v)| *t >= t_start && (v - target).abs() > band);
    match last_out {
        None => Some(0.0),
        Some(i) if i + 1 < time.len() => Some(time[i + 1] - t_start),
        Some(_) => None,
    }
}

fn cmd_simulate(config: &Path, out: &Path) -> CliResult {
    let (cfg, bytes) = load_config(config)?;
    let mut scenario = cfg.to_scenario()?;
    let record = cfg.resolved().record_channels();
    scenario.record = Vec::new();
    let result = run_scenario(&scenario)?;

    let mut header = vec!["time_s"];
    header.extend(record.iter().map(|c| c.name()));
    let cols: Vec<&[f64]> = record.iter().map(|c| result.channel(*c).unwrap_or(&[])).collect();
    let table = csv(
        &header,
        (0..result.len()).map(|k| {
            let mut row = vec![result.time[k]];
            row.extend(cols.iter().map(|c| c[k]));
            row
        }),
    );

    let p = result.channel(Channel::PDelivered).unwrap_or(&[]);
    let q = result.channel(Channel::QDelivered).unwrap_or(&[]);
    let p_ref = result.channel(Channel::PRefDelivered).unwrap_or(&[]);
    let t_event = last_event_time(&cfg);
    let window = (t_event, scenario.duration);
    let i_tr = result.channel(Channel::IATransient).unwrap_or(&[]);
    let f_current = dominant_frequency(i_tr, scenario.dt, window).ok().map(|s| s.peak_frequency);
    let f_power = dominant_frequency(p, scenario.dt, window).ok().map(|s| s.peak_frequency);
    let sigma = damping_estimate(i_tr, scenario.dt, window).ok();
    let f_pred = ssr_frequency(cfg.compensation.n_pu, cfg.line.f0_hz).ok().filter(|f| *f > 0.0);
    let target = p_ref.last().copied().unwrap_or(0.0);
    let op = &result.operating_point;
    let summary = json!({
        "samples": result.len(),
        "final_p_delivered_w": finite_or_null(p.last().copied()),
        "final_q_delivered_var": finite_or_null(q.last().copied()),
        "p_ref_delivered_w": target,
        "settling_time_s": finite_or_null(settling_time(&result.time, p, t_event, target, 0.01)),
        "settling_band_fraction": 0.01,
        "operating_point": {
            "delta_deg": op.delta.to_degrees(),
            "vr_magnitude_v": op.vr_magnitude,
            "transfer_limit_w": op.limit_w,
        },
        "ssr": {
            "window_s": [window.0, window.1],
            "f_predicted_hz": finite_or_null(f_pred),
            "f_measured_current_hz": finite_or_null(f_current),
            "f_measured_power_hz": finite_or_null(f_power),
            "decay_rate_1_per_s": finite_or_null(sigma),
        },
    });

    write_atomic(out, "timeseries.csv", table.as_bytes())?;
    write_json(out, "summary.json", &summary)?;
    write_json(out, "manifest.json", &manifest("simulate", Some((&cfg, &bytes)), interpretation(Some(&result))))?;
    Ok(())
}

fn cmd_ssr_sweep(config: &Path, ns: &[f64], out: &Path) -> CliResult {
    let (cfg, bytes) = load_config(config)?;
    if ns.is_empty() {
        return Err(Failure::input("--n: at least one compensation degree is required"));
    }
    if let Some(bad) = ns.iter().find(|n| !(n.is_finite() && **n > 0.0 && **n < 1.0)) {
        return Err(Failure::input(format!("--n: {bad} is outside (0, 1)")));
    }
    if cfg.events.is_empty() {
        return Err(Failure::input("events: the sweep needs at least one event to excite the line"));
    }
    let window = (last_event_time(&cfg), cfg.sim.duration_s);
    let rows: Vec<CliResult<Vec<f64>>> = ns
        .par_iter()
        .map(|&n| {
            let mut c = cfg.clone();
            c.compensation.n_pu = n;
            c.controller = None;
            let mut s = c.to_scenario()?;
            s.record = vec![Channel::IATransient, Channel::PDelivered];
            let r = run_scenario(&s)?;
            let i_tr = r.channel(Channel::IATransient).unwrap_or(&[]);
            let p = r.channel(Channel::PDelivered).unwrap_or(&[]);
            let measure = |e: Error| Failure {
                code: EXIT_SIMULATION,
                message: format!("n_pu = {n}: {e}"),
            };
            let fi = dominant_frequency(i_tr, s.dt, window).map_err(measure)?;
            let fp = dominant_frequency(p, s.dt, window).map_err(measure)?;
            let sigma = damping_estimate(i_tr, s.dt, window).map_err(measure)?;
            Ok(vec![n, ssr_frequency(n, c.line.f0_hz)?, fi.peak_frequency, fp.peak_frequency, sigma])
        })
        .collect();
    let rows: Vec<Vec<f64>> = rows.into_iter().collect::<CliResult<_>>()?;
    let table = csv(
        &[
            "n_pu",
            "f_predicted_hz",
            "f_measured_current_hz",
            "f_measured_power_hz",
            "decay_rate_1_per_s",
        ],
        rows.into_iter(),
    );
    let mut interp = interpretation(None);
    interp["event_semantics"] = json!(crate::sim::EVENT_SEMANTICS_UNCONTROLLED);
    interp["controller"] = json!("ignored: every sweep row runs uncontrolled");
    interp["measurement_window_s"] = json!([window.0, window.1]);
    interp["f_measured_power_hz"] = json!("p_delivered_w carries the beat |f0 - f_ssr|");
    write_atomic(out, "ssr_sweep.csv", table.as_bytes())?;
    write_json(out, "ssr_sweep.manifest.json", &manifest("ssr-sweep", Some((&cfg, &bytes)), interp))
}

fn cmd_bode(config: &Path, fmin: f64, fmax: f64, points: usize, out: &Path) -> CliResult {
    let (cfg, bytes) = load_config(config)?;
    if !(fmin.is_finite() && fmax.is_finite() && fmin > 0.0 && fmax > fmin) {
        return Err(Failure::input("--fmin/--fmax: need 0 < fmin < fmax"));
    }
    if points < 2 {
        return Err(Failure::input("--points: must be >= 2"));
    }
    let params = cfg.line_params();
    let comp = compensation_for(cfg.compensation.n_pu, &params, cfg.compensation.num_segments)?;
    let mut rows = Vec::with_capacity(points);
    for i in 0..points {
        let f = if i + 1 == points {
            fmax
        } else {
            fmin * (fmax / fmin).powf(i as f64 / (points - 1) as f64)
        };
        let g = line_admittance(&params, &comp, Complex64::new(0.0, 2.0 * std::f64::consts::PI * f))?;
        rows.push(vec![f, g.g_aa.norm(), g.g_aa.arg().to_degrees(), g.g_ab.norm(), g.g_ab.arg().to_degrees()]);
    }
    let table = csv(
        &["f_hz", "g_aa_mag_s", "g_aa_phase_deg", "g_ab_mag_s", "g_ab_phase_deg"],
        rows.into_iter(),
    );
    let mut interp = interpretation(None);
    interp["symmetry"] = json!("g_bb equals g_aa and g_ba equals -g_ab, so only g_aa and g_ab are tabulated");
    interp["units"] = json!("admittance magnitudes in siemens, evaluated at s = j*2*pi*f");
    write_atomic(out, "bode.csv", table.as_bytes())?;
    write_json(out, "bode.manifest.json", &manifest("bode", Some((&cfg, &bytes)), interp))
}

#[derive(Debug, Serialize)]
struct Design {
    n_pu: f64,
    num_segments: u32,
    c_series_total_f: f64,
    c_per_segment_f: f64,
    f_res_hz: f64,
    loadability_gain: f64,
    x_c_ohm: f64,
    x_l_ohm: f64,
    x_eff_ohm: f64,
    exceeds_practical_limit: bool,
    practical_limit_pu: f64,
}

fn cmd_design(args: &DesignArgs) -> CliResult {
    let d = crate::config::LineSection::default();
    let f0 = args.f0_hz.unwrap_or(d.f0_hz);
    let params = LineParams::new(
        args.r_series_ohm.unwrap_or(d.r_series_ohm),
        args.l_series_h.unwrap_or(d.l_series_h),
        2.0 * std::f64::consts::PI * f0,
        args.c_shunt_per_end_f.unwrap_or(d.c_shunt_per_end_f),
    )?;
    let segments = args
        .num_segments
        .unwrap_or(crate::config::CompensationSection::default().num_segments);
    let comp: CompensationSpec = size_series_capacitor(args.n, &params, segments)?;
    let design = Design {
        n_pu: args.n,
        num_segments: segments,
        c_series_total_f: comp.c_series_total,
        c_per_segment_f: comp.per_segment_capacitance(),
        f_res_hz: ssr_frequency(args.n, f0)?,
        loadability_gain: loadability_gain(args.n)?,
        x_c_ohm: comp.x_c(params.omega),
        x_l_ohm: params.x_l(),
        x_eff_ohm: effective_reactance(&params, &comp),
        exceeds_practical_limit: args.n > PRACTICAL_COMPENSATION_LIMIT,
        practical_limit_pu: PRACTICAL_COMPENSATION_LIMIT,
    };
    if design.exceeds_practical_limit {
        eprintln!(
            "warning: n = {} exceeds the customary {} p.u. compensation limit",
            args.n, PRACTICAL_COMPENSATION_LIMIT
        );
    }
    let text = serde_json::to_string_pretty(&design).map_err(|e| Failure::input(e.to_string()))?;
    println!("{text}");
    write_json(&args.out, "design.json", &design)
}

fn cmd_pdelta(config: &Path, out: &Path, delta: (f64, f64), steps: usize) -> CliResult {
    let (cfg, bytes) = load_config(config)?;
    let params = cfg.line_params();
    let comp = compensation_for(cfg.compensation.n_pu, &params, cfg.compensation.num_segments)?;
    let v = cfg.v_nominal();
    let with = p_delta_sweep(&params, &comp, v, v, delta, steps)?;
    let without = p_delta_sweep(&params, &CompensationSpec::uncompensated(), v, v, delta, steps)?;
    let table = csv(
        &[
            "delta_deg",
            "p_w_compensated",
            "q_var_compensated",
            "p_w_uncompensated",
            "q_var_uncompensated",
        ],
        with.iter()
            .zip(&without)
            .map(|(a, b)| vec![a.delta_deg, a.p_w, a.q_var, b.p_w, b.q_var]),
    );
    let peak_c = sweep_peak(&with).map(|p| (p.delta_deg, p.p_w));
    let peak_u = sweep_peak(&without).map(|p| (p.delta_deg, p.p_w));
    let summary = json!({
        "peak_compensated": peak_c.map(|(d, p)| json!({"delta_deg": d, "p_w": p})),
        "peak_uncompensated": peak_u.map(|(d, p)| json!({"delta_deg": d, "p_w": p})),
        "peak_ratio": match (peak_c, peak_u) {
            (Some(c), Some(u)) if u.1 > 0.0 => json!(c.1 / u.1),
            _ => Value::Null,
        },
        "loadability_gain": finite_or_null(loadability_gain(cfg.compensation.n_pu).ok()),
    });
    println!("{}", serde_json::to_string_pretty(&summary).unwrap_or_default());
    let mut interp = interpretation(None);
    interp["bus_magnitudes"] = json!("both buses at the nominal alpha-beta peak voltage; powers are three-phase, delivered by the sending bus");
    interp["summary"] = summary;
    write_atomic(out, "pdelta.csv", table.as_bytes())?;
    write_json(out, "pdelta.manifest.json", &manifest("pdelta", Some((&cfg, &bytes)), interp))
}
