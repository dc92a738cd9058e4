//! C ABI for the `sercomp` simulator.
//!
//! Every function returns a [`SercompStatus`]; outputs go through pointer
//! arguments. On failure the message is kept per thread and can be read
//! with [`sercomp_last_error_message`]. Scenarios and results are opaque
//! handles that the caller releases with the matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_complex::Complex64;
use sercomp::config::RunConfig;
use sercomp::line_models::{
    compensation_for, line_admittance, loadability_gain, size_series_capacitor, ssr_frequency, LineParams,
};
use sercomp::power::{instantaneous_pq, pq_derivatives, BusVoltages, PQ};
use sercomp::sim::{run_scenario, Channel, Scenario, SimResult};
use sercomp::transforms::{clarke, inverse_clarke, AlphaBetaPair, ThreePhaseSample};
use sercomp::Error;

/// Result code of every exported function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SercompStatus {
    Ok = 0,
    /// A parameter, configuration key or channel name was rejected.
    InvalidInput = 1,
    /// The integration diverged or the controller lost its sending bus.
    SimulationFailed = 2,
    /// The requested flow is beyond the line's transfer capability.
    Infeasible = 3,
    NullPointer = 4,
    /// A Rust panic was caught at the boundary.
    Panic = 5,
}

/// Line constants. `c_shunt_per_end_f` is only used by the split-π model.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SercompLine {
    pub r_series_ohm: f64,
    pub l_series_h: f64,
    pub f0_hz: f64,
    pub c_shunt_per_end_f: f64,
}

/// Line admittance at one complex frequency. `G_ββ = G_αα` and
/// `G_βα = −G_αβ`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SercompAdmittance {
    pub g_aa_re: f64,
    pub g_aa_im: f64,
    pub g_ab_re: f64,
    pub g_ab_im: f64,
}

/// αβ bus voltages driving the line.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SercompBus {
    pub vs_alpha: f64,
    pub vs_beta: f64,
    pub vr_alpha: f64,
    pub vr_beta: f64,
    pub vcon_alpha: f64,
    pub vcon_beta: f64,
}

/// A validated run configuration.
pub struct SercompScenario {
    scenario: Scenario,
}

/// Recorded time series of one run.
pub struct SercompResult {
    result: SimResult,
}

thread_local! {
    static LAST_ERROR: RefCell<Vec<u8>> = const { RefCell::new(Vec::new()) };
}

fn set_error(msg: &str) {
    LAST_ERROR.with(|e| {
        let mut e = e.borrow_mut();
        e.clear();
        e.extend(msg.bytes().filter(|b| *b != 0));
    });
}

struct Failure(SercompStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Divergence { .. } | Error::Singular { .. } => SercompStatus::SimulationFailed,
            Error::Capability { .. } => SercompStatus::Infeasible,
            _ => SercompStatus::InvalidInput,
        };
        Failure(status, e.to_string())
    }
}

fn null(name: &str) -> Failure {
    Failure(SercompStatus::NullPointer, format!("`{name}` is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SercompStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            SercompStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".to_string());
            set_error(&format!("panic: {msg}"));
            SercompStatus::Panic
        }
    }
}

/// Writes `value` through `out`.
///
/// # Safety
/// `out` must be null or valid for a write of `T`.
unsafe fn put<T>(out: *mut T, name: &str, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(name));
    }
    out.write(value);
    Ok(())
}

fn line_params(line: &SercompLine) -> Result<LineParams, Failure> {
    Ok(LineParams::new(
        line.r_series_ohm,
        line.l_series_h,
        2.0 * std::f64::consts::PI * line.f0_hz,
        line.c_shunt_per_end_f,
    )?)
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sercomp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the calling thread's last error message into `buf` (truncated,
/// always NUL-terminated when `len > 0`) and returns the full message
/// length in bytes, excluding the terminator.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn sercomp_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = e.len().min(len - 1);
            ptr::copy_nonoverlapping(e.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        e.len()
    })
}

/// Amplitude-invariant Clarke transform.
///
/// # Safety
/// `alpha` and `beta` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sercomp_clarke(a: f64, b: f64, c: f64, alpha: *mut f64, beta: *mut f64) -> SercompStatus {
    guard(|| {
        let ab = clarke(ThreePhaseSample::new(a, b, c));
        put(alpha, "alpha", ab.alpha)?;
        put(beta, "beta", ab.beta)
    })
}

/// Inverse Clarke transform with zero zero-sequence.
///
/// # Safety
/// `a`, `b` and `c` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sercomp_inverse_clarke(
    alpha: f64,
    beta: f64,
    a: *mut f64,
    b: *mut f64,
    c: *mut f64,
) -> SercompStatus {
    guard(|| {
        let x = inverse_clarke(AlphaBetaPair::new(alpha, beta));
        put(a, "a", x.a)?;
        put(b, "b", x.b)?;
        put(c, "c", x.c)
    })
}

/// Subsynchronous resonance frequency `f0·√N`, Hz.
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn sercomp_ssr_frequency(n_pu: f64, f0_hz: f64, out: *mut f64) -> SercompStatus {
    guard(|| put(out, "out", ssr_frequency(n_pu, f0_hz)?))
}

/// Transfer capability gain `1/(1 − N)`.
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn sercomp_loadability_gain(n_pu: f64, out: *mut f64) -> SercompStatus {
    guard(|| put(out, "out", loadability_gain(n_pu)?))
}

/// Total series capacitance for compensation degree `n_pu`, F.
///
/// # Safety
/// `line` must point to a valid [`SercompLine`]; `c_total_f` must be valid
/// for a write.
#[no_mangle]
pub unsafe extern "C" fn sercomp_size_series_capacitor(
    line: *const SercompLine,
    n_pu: f64,
    num_segments: u32,
    c_total_f: *mut f64,
) -> SercompStatus {
    guard(|| {
        let line = line.as_ref().ok_or_else(|| null("line"))?;
        let comp = size_series_capacitor(n_pu, &line_params(line)?, num_segments)?;
        put(c_total_f, "c_total_f", comp.c_series_total)
    })
}

/// Instantaneous three-phase P and Q from αβ voltage and current, sending-end
/// sign convention.
///
/// # Safety
/// `p` and `q` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sercomp_instantaneous_pq(
    v_alpha: f64,
    v_beta: f64,
    i_alpha: f64,
    i_beta: f64,
    p: *mut f64,
    q: *mut f64,
) -> SercompStatus {
    guard(|| {
        let pq = instantaneous_pq(AlphaBetaPair::new(v_alpha, v_beta), AlphaBetaPair::new(i_alpha, i_beta));
        put(p, "p", pq.p)?;
        put(q, "q", pq.q)
    })
}

/// Line admittance at `s = s_re + j·s_im`, rad/s. `n_pu = 0` gives the bare line.
///
/// # Safety
/// `line` must point to a valid [`SercompLine`]; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn sercomp_line_admittance(
    line: *const SercompLine,
    n_pu: f64,
    s_re: f64,
    s_im: f64,
    out: *mut SercompAdmittance,
) -> SercompStatus {
    guard(|| {
        let line = line.as_ref().ok_or_else(|| null("line"))?;
        let params = line_params(line)?;
        let comp = compensation_for(n_pu, &params, 1)?;
        let g = line_admittance(&params, &comp, Complex64::new(s_re, s_im))?;
        put(
            out,
            "out",
            SercompAdmittance {
                g_aa_re: g.g_aa.re,
                g_aa_im: g.g_aa.im,
                g_ab_re: g.g_ab.re,
                g_ab_im: g.g_ab.im,
            },
        )
    })
}

/// Time derivatives of P and Q for a compensated line, W/s and var/s.
///
/// # Safety
/// `line` and `bus` must point to valid structs; `dp_dt` and `dq_dt` must
/// be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sercomp_pq_derivatives(
    line: *const SercompLine,
    n_pu: f64,
    bus: *const SercompBus,
    p: f64,
    q: f64,
    dp_dt: *mut f64,
    dq_dt: *mut f64,
) -> SercompStatus {
    guard(|| {
        let line = line.as_ref().ok_or_else(|| null("line"))?;
        let bus = bus.as_ref().ok_or_else(|| null("bus"))?;
        let params = line_params(line)?;
        let comp = compensation_for(n_pu, &params, 1)?;
        let bus = BusVoltages::new(
            AlphaBetaPair::new(bus.vs_alpha, bus.vs_beta),
            AlphaBetaPair::new(bus.vr_alpha, bus.vr_beta),
            AlphaBetaPair::new(bus.vcon_alpha, bus.vcon_beta),
        );
        let r = pq_derivatives(&PQ::new(p, q), &bus, &params, &comp)?;
        put(dp_dt, "dp_dt", r.dp_dt)?;
        put(dq_dt, "dq_dt", r.dq_dt)
    })
}

/// Parses and validates a JSON run configuration (the format read by the
/// `sercomp` command line tool).
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn sercomp_scenario_from_json(
    json: *const c_char,
    out: *mut *mut SercompScenario,
) -> SercompStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        out.write(ptr::null_mut());
        if json.is_null() {
            return Err(null("json"));
        }
        let cfg = RunConfig::from_json(CStr::from_ptr(json).to_bytes())?;
        let scenario = cfg.to_scenario()?;
        out.write(Box::into_raw(Box::new(SercompScenario { scenario })));
        Ok(())
    })
}

/// # Safety
/// `scenario` must be null or a handle from [`sercomp_scenario_from_json`]
/// not freed before.
#[no_mangle]
pub unsafe extern "C" fn sercomp_scenario_free(scenario: *mut SercompScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Runs a scenario. The scenario stays owned by the caller.
///
/// # Safety
/// `scenario` must be a live handle; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn sercomp_scenario_run(
    scenario: *const SercompScenario,
    out: *mut *mut SercompResult,
) -> SercompStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        out.write(ptr::null_mut());
        let s = scenario.as_ref().ok_or_else(|| null("scenario"))?;
        let result = run_scenario(&s.scenario)?;
        out.write(Box::into_raw(Box::new(SercompResult { result })));
        Ok(())
    })
}

/// # Safety
/// `result` must be null or a handle from [`sercomp_scenario_run`] not
/// freed before.
#[no_mangle]
pub unsafe extern "C" fn sercomp_result_free(result: *mut SercompResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Number of samples per channel and the step size.
///
/// # Safety
/// `result` must be a live handle; `len` and `dt` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sercomp_result_shape(
    result: *const SercompResult,
    len: *mut usize,
    dt: *mut f64,
) -> SercompStatus {
    guard(|| {
        let r = result.as_ref().ok_or_else(|| null("result"))?;
        put(len, "len", r.result.len())?;
        put(dt, "dt", r.result.dt)
    })
}

/// Borrows a recorded channel by name, or the sample times for `"time_s"`.
/// The data stays valid until the result is freed.
///
/// # Safety
/// `result` must be a live handle, `name` a NUL-terminated string, `data`
/// and `len` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sercomp_result_channel(
    result: *const SercompResult,
    name: *const c_char,
    data: *mut *const f64,
    len: *mut usize,
) -> SercompStatus {
    guard(|| {
        let r = result.as_ref().ok_or_else(|| null("result"))?;
        if name.is_null() {
            return Err(null("name"));
        }
        let name = CStr::from_ptr(name)
            .to_str()
            .map_err(|_| Failure(SercompStatus::InvalidInput, "channel name is not UTF-8".into()))?;
        let series: &[f64] = if name == "time_s" {
            &r.result.time
        } else {
            let ch: Channel = name.parse()?;
            r.result.channel(ch).ok_or_else(|| {
                Failure(SercompStatus::InvalidInput, format!("channel `{name}` was not recorded"))
            })?
        };
        put(data, "data", series.as_ptr())?;
        put(len, "len", series.len())
    })
}
