//! Fixed-step time-domain simulation of a line model with an optional
//! direct power controller in the loop.
//!
//! Every run starts from the sinusoidal steady state that carries the
//! initial flow, so traces are flat until the first event. Buses rotate
//! synchronously; the converter injection is held constant in the αβ frame
//! between samples.

mod operating_point;
pub(crate) mod plant;

pub use operating_point::{solve_operating_point, OperatingPoint};

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dpc::{DpcConfig, DpcController, PQReference};
use crate::error::{Error, Result};
use crate::line_models::{CompensationSpec, LineParams};
use crate::power::{instantaneous_pq, BusVoltages, PQ};
use crate::transforms::AlphaBetaPair;
use operating_point::solve_with_plant;
use plant::Plant;

/// Description of how events are applied, echoed into run manifests.
pub const EVENT_SEMANTICS_UNCONTROLLED: &str =
    "uncontrolled: each event re-solves the receiving-bus phasor for the new flow target and applies it as a step";
pub const EVENT_SEMANTICS_CONTROLLED: &str =
    "controlled: each event steps the power references; bus voltages stay fixed";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// Per-phase series R–L–C, six states.
    AbcRlc,
    /// Two π sections either side of the series capacitor.
    SplitPi,
    /// Two-state αβ model with the capacitor folded in at synchronous frequency.
    Reduced,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PfSign {
    Lagging,
    Leading,
}

/// Apparent power and power factor delivered by the sending bus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowTarget {
    pub s_va: f64,
    pub pf: f64,
    pub pf_sign: PfSign,
}

impl FlowTarget {
    pub fn new(s_va: f64, pf: f64, pf_sign: PfSign) -> Self {
        Self { s_va, pf, pf_sign }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.s_va.is_finite() && self.s_va >= 0.0) {
            return Err(Error::invalid("s_va", "must be >= 0"));
        }
        if !(self.pf > 0.0 && self.pf <= 1.0) {
            return Err(Error::invalid("pf", "must lie in (0, 1]"));
        }
        Ok(())
    }

    /// `(S·pf, ±S·sin(acos pf))`, with lagging meaning reactive power is
    /// delivered.
    pub fn delivered(&self) -> PQ {
        let q = self.s_va * (1.0 - self.pf * self.pf).max(0.0).sqrt();
        PQ::new(
            self.s_va * self.pf,
            match self.pf_sign {
                PfSign::Lagging => q,
                PfSign::Leading => -q,
            },
        )
    }

    /// The flow as a controller set-point in the sending-end convention.
    pub fn reference(&self) -> PQReference {
        let d = self.delivered();
        PQReference {
            p_ref: -d.p,
            q_ref: -d.q,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub t: f64,
    pub target: FlowTarget,
}

macro_rules! channels {
    ($($variant:ident => $name:literal),* $(,)?) => {
        /// Recordable series.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
        pub enum Channel {
            $($variant),*
        }

        impl Channel {
            pub const ALL: &'static [Channel] = &[$(Channel::$variant),*];

            pub fn name(&self) -> &'static str {
                match self {
                    $(Channel::$variant => $name),*
                }
            }
        }

        impl FromStr for Channel {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($name => Ok(Channel::$variant),)*
                    _ => Err(Error::invalid("record", format!("unknown channel `{s}`"))),
                }
            }
        }
    };
}

channels! {
    IA => "i_a",
    IB => "i_b",
    IC => "i_c",
    IAlpha => "i_alpha",
    IBeta => "i_beta",
    VcA => "vc_a",
    VcB => "vc_b",
    VcC => "vc_c",
    P => "p_w",
    Q => "q_var",
    PDelivered => "p_delivered_w",
    QDelivered => "q_delivered_var",
    VconAlpha => "vcon_alpha",
    VconBeta => "vcon_beta",
    PRefDelivered => "p_ref_delivered_w",
    QRefDelivered => "q_ref_delivered_var",
    IATransient => "i_a_transient",
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub params: LineParams,
    pub compensation: CompensationSpec,
    pub model: ModelKind,
    pub controller: Option<DpcConfig>,
    /// Sending-bus voltage, αβ peak (line-to-neutral peak), V.
    pub v_nominal: f64,
    pub initial_flow: FlowTarget,
    pub events: Vec<Event>,
    pub dt: f64,
    pub duration: f64,
    /// Channels to keep; empty keeps all.
    pub record: Vec<Channel>,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::invalid("dt", "must be > 0"));
        }
        if !(self.duration.is_finite() && self.duration >= self.dt) {
            return Err(Error::invalid("duration", "must be >= dt"));
        }
        if !(self.v_nominal.is_finite() && self.v_nominal > 0.0) {
            return Err(Error::invalid("v_nominal", "must be > 0"));
        }
        self.initial_flow.validate()?;
        let mut last = f64::NEG_INFINITY;
        for e in &self.events {
            if !(e.t >= 0.0 && e.t <= self.duration) {
                return Err(Error::invalid("events.t", "must lie within [0, duration]"));
            }
            if e.t <= last {
                return Err(Error::invalid("events.t", "must be strictly increasing"));
            }
            last = e.t;
            e.target.validate()?;
        }
        if let Some(cfg) = &self.controller {
            cfg.validate()?;
            if !self.compensation.is_compensated() {
                return Err(Error::invalid("n_pu", "direct power control needs a compensated line"));
            }
        }
        Ok(())
    }

    /// Number of recorded samples, `floor(duration/dt) + 1`.
    pub fn sample_count(&self) -> usize {
        (self.duration / self.dt + 1e-9).floor() as usize + 1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub dt: f64,
    pub duration: f64,
    pub time: Vec<f64>,
    pub channels: Vec<(Channel, Vec<f64>)>,
    pub operating_point: OperatingPoint,
    /// Plant state at the last sample.
    pub final_state: Vec<f64>,
    pub event_semantics: &'static str,
}

impl SimResult {
    pub fn channel(&self, c: Channel) -> Option<&[f64]> {
        self.channels.iter().find(|(k, _)| *k == c).map(|(_, v)| v.as_slice())
    }

    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }
}

/// Scratch buffers for classical fourth-order Runge–Kutta steps.
#[derive(Debug, Clone)]
pub struct Rk4 {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4 {
    pub fn new(n: usize) -> Self {
        Self {
            k1: vec![0.0; n],
            k2: vec![0.0; n],
            k3: vec![0.0; n],
            k4: vec![0.0; n],
            tmp: vec![0.0; n],
        }
    }

    /// Advances `x` in place from `t` to `t + dt`.
    pub fn step<F>(&mut self, mut f: F, t: f64, x: &mut [f64], dt: f64) -> Result<()>
    where
        F: FnMut(f64, &[f64], &mut [f64]),
    {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::invalid("dt", "must be > 0"));
        }
        let n = x.len();
        let finite = |k: &[f64]| k.iter().all(|v| v.is_finite());

        f(t, x, &mut self.k1);
        if !finite(&self.k1) {
            return Err(Error::Divergence { t });
        }
        for i in 0..n {
            self.tmp[i] = x[i] + 0.5 * dt * self.k1[i];
        }
        f(t + 0.5 * dt, &self.tmp, &mut self.k2);
        if !finite(&self.k2) {
            return Err(Error::Divergence { t });
        }
        for i in 0..n {
            self.tmp[i] = x[i] + 0.5 * dt * self.k2[i];
        }
        f(t + 0.5 * dt, &self.tmp, &mut self.k3);
        if !finite(&self.k3) {
            return Err(Error::Divergence { t });
        }
        for i in 0..n {
            self.tmp[i] = x[i] + dt * self.k3[i];
        }
        f(t + dt, &self.tmp, &mut self.k4);
        if !finite(&self.k4) {
            return Err(Error::Divergence { t });
        }
        for i in 0..n {
            x[i] += dt / 6.0 * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
        }
        if !finite(x) {
            return Err(Error::Divergence { t: t + dt });
        }
        Ok(())
    }
}

/// One classical RK4 step of `x' = f(t, x)`.
pub fn rk4_step<F>(f: F, t: f64, x: &[f64], dt: f64) -> Result<Vec<f64>>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let mut out = x.to_vec();
    Rk4::new(x.len()).step(f, t, &mut out, dt)?;
    Ok(out)
}

struct Recorder {
    keep: Vec<Channel>,
    data: Vec<Vec<f64>>,
}

impl Recorder {
    fn new(record: &[Channel], n: usize) -> Self {
        let keep: Vec<Channel> = if record.is_empty() {
            Channel::ALL.to_vec()
        } else {
            record.to_vec()
        };
        let data = keep.iter().map(|_| Vec::with_capacity(n)).collect();
        Self { keep, data }
    }

    fn push(&mut self, value: impl Fn(Channel) -> f64) {
        for (c, series) in self.keep.iter().zip(self.data.iter_mut()) {
            series.push(value(*c));
        }
    }
}

/// Integrates a scenario from its solved operating point.
///
/// At sample `k` the runner applies any event scheduled at `round(t_e/dt) = k`,
/// records the measurements, computes the next converter command from them
/// and then integrates one step with the command computed at sample `k − 1`
/// (one-step computation delay). The controller sees the bus voltages rotated
/// to the middle of the interval its command will be applied over.
///
/// A controller with `vs_floor = 0` uses 1 % of `v_nominal`.
pub fn run_scenario(s: &Scenario) -> Result<SimResult> {
    s.validate()?;
    let plant = Plant::new(s.model, &s.params, &s.compensation)?;
    let op = solve_with_plant(&plant, &s.params, &s.compensation, s.v_nominal, &s.initial_flow)?;
    let omega = s.params.omega;
    let dt = s.dt;
    let n = s.sample_count();

    // The control law works on a series R–L–C line; it is handed the
    // plant's synchronous-frequency equivalent so its equilibrium is exact.
    let (ctl_params, vr_scale) = plant.synchronous_equivalent(&s.params, &s.compensation);
    let mut controller = match s.controller {
        Some(mut cfg) => {
            if cfg.vs_floor == 0.0 {
                cfg.vs_floor = 0.01 * s.v_nominal;
            }
            Some(DpcController::new(cfg, ctl_params, s.compensation)?)
        }
        None => None,
    };
    let event_semantics = if controller.is_some() {
        EVENT_SEMANTICS_CONTROLLED
    } else {
        EVENT_SEMANTICS_UNCONTROLLED
    };
    let event_samples: Vec<(usize, FlowTarget)> = s
        .events
        .iter()
        .map(|e| ((e.t / dt).round() as usize, e.target))
        .collect();

    let vs0 = op.bus.vs;
    let mut vr0 = op.bus.vr;
    let mut target = s.initial_flow;
    let mut reference = target.reference();
    let mut applied = AlphaBetaPair::ZERO;
    let mut pending = AlphaBetaPair::ZERO;

    let mut x = op.state.clone();
    let mut rk = Rk4::new(x.len());
    let mut u = vec![0.0; plant.lti.input_dim()];
    let mut time = Vec::with_capacity(n);
    let mut rec = Recorder::new(&s.record, n);

    for k in 0..n {
        let t = k as f64 * dt;
        for (_, ev) in event_samples.iter().filter(|(ke, _)| *ke == k) {
            let solved = solve_with_plant(&plant, &s.params, &s.compensation, s.v_nominal, ev)?;
            if controller.is_none() {
                vr0 = solved.bus.vr;
            }
            target = *ev;
            reference = target.reference();
        }
        applied = if controller.is_some() { pending } else { applied };

        let vs_t = vs0.rotate(omega * t);
        let i_meas = plant.branch_current(&x);
        let pq = instantaneous_pq(vs_t, i_meas);
        let delivered = pq.delivered();
        let iabc = crate::transforms::inverse_clarke(i_meas);
        let vc = plant.cap_voltages(&x);
        let vcon_phasor = applied.rotate(-omega * t).to_complex();
        let i_ss = plant.steady_branch_current_fast(vs0.to_complex() + vcon_phasor, vr0.to_complex());
        let i_a_ss = (i_ss * Complex64::from_polar(1.0, omega * t)).re;
        let ref_delivered = target.delivered();
        time.push(t);
        rec.push(|c| match c {
            Channel::IA => iabc.a,
            Channel::IB => iabc.b,
            Channel::IC => iabc.c,
            Channel::IAlpha => i_meas.alpha,
            Channel::IBeta => i_meas.beta,
            Channel::VcA => vc.a,
            Channel::VcB => vc.b,
            Channel::VcC => vc.c,
            Channel::P => pq.p,
            Channel::Q => pq.q,
            Channel::PDelivered => delivered.p,
            Channel::QDelivered => delivered.q,
            Channel::VconAlpha => applied.alpha,
            Channel::VconBeta => applied.beta,
            Channel::PRefDelivered => ref_delivered.p,
            Channel::QRefDelivered => ref_delivered.q,
            Channel::IATransient => iabc.a - i_a_ss,
        });

        if k + 1 == n {
            break;
        }

        if let Some(ctl) = controller.as_mut() {
            let vr_seen = AlphaBetaPair::from_complex(vr0.to_complex() * vr_scale);
            let bus = BusVoltages::new(vs0, vr_seen, applied).rotate(omega * (t + 1.5 * dt));
            pending = ctl.command(&pq, &reference, &bus, dt)?;
        }

        let vcon = applied;
        rk.step(
            |tau, xs, dx| {
                let us = vs0.rotate(omega * tau) + vcon;
                let ur = vr0.rotate(omega * tau);
                plant.fill_inputs(us, ur, &mut u);
                plant.lti.derivative(xs, &u, dx);
            },
            t,
            &mut x,
            dt,
        )?;
    }

    let channels = rec.keep.into_iter().zip(rec.data).collect();
    Ok(SimResult {
        dt,
        duration: s.duration,
        time,
        channels,
        operating_point: op,
        final_state: x,
        event_semantics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::line_models::size_series_capacitor;

    fn scenario(model: ModelKind, duration: f64) -> Scenario {
        let params = LineParams::default();
        Scenario {
            params,
            compensation: size_series_capacitor(0.25, &params, 2).unwrap(),
            model,
            controller: None,
            v_nominal: 345e3 * (2.0f64 / 3.0).sqrt(),
            initial_flow: FlowTarget::new(360e6, 0.8, PfSign::Lagging),
            events: vec![],
            dt: 20e-6,
            duration,
            record: vec![],
        }
    }

    #[test]
    fn rk4_trivial_and_exponential() {
        let x = rk4_step(|_, _, dx| dx.fill(0.0), 0.0, &[3.0, -1.0], 0.1).unwrap();
        assert_eq!(x, vec![3.0, -1.0]);
        let x = rk4_step(|_, x, dx| dx[0] = -x[0], 0.0, &[1.0], 0.1).unwrap();
        assert!((x[0] - 0.9048375).abs() < 1e-6);
        assert!((x[0] - (-0.1f64).exp()).abs() < 1e-6);
    }

    #[test]
    fn rk4_flags_non_finite_derivative() {
        let r = rk4_step(|_, _, dx| dx[0] = f64::NAN, 0.5, &[1.0], 0.1);
        assert_eq!(r, Err(Error::Divergence { t: 0.5 }));
        assert!(rk4_step(|_, _, dx| dx[0] = 0.0, 0.0, &[1.0], 0.0).is_err());
    }

    #[test]
    fn reduced_model_current_norm_decays() {
        let p = LineParams::default();
        let c = size_series_capacitor(0.25, &p, 1).unwrap();
        let m = crate::line_models::reduced_model(&p, &c).unwrap();
        let mut x: Vec<f64> = vec![100.0, -50.0];
        let mut rk = Rk4::new(2);
        let n0 = x[0].hypot(x[1]);
        for k in 0..1000 {
            rk.step(
                |_, xs, dx| {
                    let d = m.derivative(AlphaBetaPair::new(xs[0], xs[1]), AlphaBetaPair::ZERO);
                    dx[0] = d.alpha;
                    dx[1] = d.beta;
                },
                k as f64 * 1e-4,
                &mut x,
                1e-4,
            )
            .unwrap();
        }
        assert!(x[0].hypot(x[1]) < n0 * (-34.0 * 0.1f64).exp() * 1.01);
    }

    #[test]
    fn flat_power_without_events() {
        for model in [ModelKind::AbcRlc, ModelKind::SplitPi, ModelKind::Reduced] {
            let r = run_scenario(&scenario(model, 0.05)).unwrap();
            let p = r.channel(Channel::PDelivered).unwrap();
            let q = r.channel(Channel::QDelivered).unwrap();
            assert_eq!(p.len(), 2501);
            for (pv, qv) in p.iter().zip(q) {
                assert!((pv - 288e6).abs() < 1e-3 * 288e6, "{model:?} {pv}");
                assert!((qv - 216e6).abs() < 1e-3 * 216e6, "{model:?} {qv}");
            }
        }
    }

    #[test]
    fn reference_channel_steps_at_event_sample() {
        let mut s = scenario(ModelKind::AbcRlc, 0.01);
        s.events.push(Event {
            t: 0.005,
            target: FlowTarget::new(480e6, 0.8, PfSign::Lagging),
        });
        let r = run_scenario(&s).unwrap();
        let pref = r.channel(Channel::PRefDelivered).unwrap();
        assert_eq!(pref[249], 288e6);
        assert!((pref[250] - 384e6).abs() < 1.0);
        let ia = r.channel(Channel::IA).unwrap();
        let jump = (ia[250] - ia[249]).abs();
        let typical = (ia[249] - ia[248]).abs();
        assert!(jump < 3.0 * typical + 1.0);
    }

    #[test]
    fn sample_count_matches_floor() {
        let s = scenario(ModelKind::Reduced, 0.001);
        assert_eq!(s.sample_count(), 51);
        let mut s2 = s.clone();
        s2.duration = 0.00103;
        assert_eq!(s2.sample_count(), 52);
    }

    #[test]
    fn invalid_scenarios() {
        let mut s = scenario(ModelKind::AbcRlc, 0.01);
        s.dt = 0.0;
        assert!(matches!(s.validate(), Err(Error::InvalidParameter { name, .. }) if name == "dt"));
        let mut s = scenario(ModelKind::AbcRlc, 0.01);
        let ev = Event {
            t: 0.005,
            target: FlowTarget::new(1.0, 1.0, PfSign::Lagging),
        };
        s.events = vec![ev, ev];
        assert!(s.validate().is_err());
    }

    #[test]
    fn channel_names_round_trip() {
        for c in Channel::ALL {
            assert_eq!(c.name().parse::<Channel>().unwrap(), *c);
        }
        assert!("nope".parse::<Channel>().is_err());
    }
}
