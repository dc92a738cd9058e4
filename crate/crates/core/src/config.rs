//! JSON scenario configuration.
//!
//! Every section is optional and falls back to the defaults below. Keys
//! carry their SI unit as a suffix. Unknown keys are rejected.
//!
//! | key | default |
//! |---|---|
//! | `line.r_series_ohm` | 8.5 |
//! | `line.l_series_h` | 0.25 |
//! | `line.f0_hz` | 60 |
//! | `line.c_shunt_per_end_f` | 1.1e-6 |
//! | `line.v_nominal_ll_v` | 345e3 |
//! | `compensation.n_pu` | 0.25 |
//! | `compensation.num_segments` | 2 |
//! | `model` | `"abc_rlc"` |
//! | `controller` | `null` (uncontrolled) |
//! | `controller.mode` | `"deadbeat"` |
//! | `controller.k_p_per_s`, `controller.k_q_per_s` | 50 |
//! | `controller.smc_gain_w_per_s` | 5e9 |
//! | `controller.boundary_layer_w` | 1e8 |
//! | `controller.v_max_v` | 1e5 |
//! | `controller.ramp_max_v_per_s` | 1e9 |
//! | `controller.vs_floor_v` | 1 % of the nominal αβ peak |
//! | `initial_flow` | 360 MVA, pf 0.8 lagging |
//! | `events` | none |
//! | `sim.dt_s` | 20e-6 |
//! | `sim.duration_s` | 1.0 |
//! | `record` | all channels |

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::dpc::{DpcConfig, DpcMode};
use crate::error::{Error, Result};
use crate::line_models::{compensation_for, LineParams};
use crate::sim::{Channel, Event, FlowTarget, ModelKind, PfSign, Scenario};

/// αβ peak magnitude of a balanced set with the given RMS line-to-line voltage.
pub fn alpha_beta_peak(v_ll_rms: f64) -> f64 {
    v_ll_rms * (2.0f64 / 3.0).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LineSection {
    pub r_series_ohm: f64,
    pub l_series_h: f64,
    pub f0_hz: f64,
    pub c_shunt_per_end_f: f64,
    pub v_nominal_ll_v: f64,
}

impl Default for LineSection {
    fn default() -> Self {
        Self {
            r_series_ohm: 8.5,
            l_series_h: 0.25,
            f0_hz: 60.0,
            c_shunt_per_end_f: 1.1e-6,
            v_nominal_ll_v: 345e3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CompensationSection {
    pub n_pu: f64,
    pub num_segments: u32,
}

impl Default for CompensationSection {
    fn default() -> Self {
        Self {
            n_pu: 0.25,
            num_segments: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ControllerSection {
    pub mode: DpcMode,
    pub k_p_per_s: f64,
    pub k_q_per_s: f64,
    pub smc_gain_w_per_s: f64,
    pub boundary_layer_w: f64,
    pub v_max_v: f64,
    pub ramp_max_v_per_s: f64,
    pub vs_floor_v: Option<f64>,
}

impl Default for ControllerSection {
    fn default() -> Self {
        let d = DpcConfig::default();
        Self {
            mode: d.mode,
            k_p_per_s: d.k_p,
            k_q_per_s: d.k_q,
            smc_gain_w_per_s: d.smc_gain,
            boundary_layer_w: d.boundary_layer,
            v_max_v: d.v_max,
            ramp_max_v_per_s: d.ramp_max,
            vs_floor_v: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FlowSection {
    pub s_va: f64,
    pub pf: f64,
    pub pf_sign: PfSign,
}

impl Default for FlowSection {
    fn default() -> Self {
        Self {
            s_va: 360e6,
            pf: 0.8,
            pf_sign: PfSign::Lagging,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventSection {
    pub t_s: f64,
    pub target_s_va: f64,
    pub target_pf: f64,
    #[serde(default = "lagging")]
    pub pf_sign: PfSign,
}

fn lagging() -> PfSign {
    PfSign::Lagging
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimSection {
    pub dt_s: f64,
    pub duration_s: f64,
}

impl Default for SimSection {
    fn default() -> Self {
        Self {
            dt_s: 20e-6,
            duration_s: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub line: LineSection,
    pub compensation: CompensationSection,
    pub model: ModelKind,
    pub controller: Option<ControllerSection>,
    pub initial_flow: FlowSection,
    pub events: Vec<EventSection>,
    pub sim: SimSection,
    pub record: Vec<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            line: LineSection::default(),
            compensation: CompensationSection::default(),
            model: ModelKind::AbcRlc,
            controller: None,
            initial_flow: FlowSection::default(),
            events: Vec::new(),
            sim: SimSection::default(),
            record: Vec::new(),
        }
    }
}

fn check(ok: bool, key: &str, reason: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::invalid(key, reason))
    }
}

fn positive(v: f64) -> bool {
    v.is_finite() && v > 0.0
}

fn non_negative(v: f64) -> bool {
    v.is_finite() && v >= 0.0
}

impl RunConfig {
    /// Parses and validates a JSON document. Errors name the offending key.
    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let mut de = serde_json::Deserializer::from_slice(bytes);
        let cfg: Self = serde_path_to_error::deserialize(&mut de).map_err(|e| {
            let path = e.path().to_string();
            Error::invalid(if path == "." { "<root>".to_string() } else { path }, e.inner().to_string())
        })?;
        de.end().map_err(|e| Error::invalid("<root>", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let l = &self.line;
        check(non_negative(l.r_series_ohm), "line.r_series_ohm", "must be >= 0")?;
        check(positive(l.l_series_h), "line.l_series_h", "must be > 0")?;
        check(positive(l.f0_hz), "line.f0_hz", "must be > 0")?;
        check(non_negative(l.c_shunt_per_end_f), "line.c_shunt_per_end_f", "must be >= 0")?;
        check(positive(l.v_nominal_ll_v), "line.v_nominal_ll_v", "must be > 0")?;

        let c = &self.compensation;
        check(
            c.n_pu.is_finite() && (0.0..1.0).contains(&c.n_pu),
            "compensation.n_pu",
            "must lie in [0, 1)",
        )?;
        check(c.num_segments >= 1, "compensation.num_segments", "must be >= 1")?;
        if self.model == ModelKind::SplitPi {
            check(
                l.c_shunt_per_end_f > 0.0,
                "line.c_shunt_per_end_f",
                "split_pi model needs a shunt capacitance > 0",
            )?;
        }
        if self.model == ModelKind::Reduced {
            check(c.n_pu > 0.0, "compensation.n_pu", "reduced model needs n_pu > 0")?;
        }

        if let Some(ctl) = &self.controller {
            check(c.n_pu > 0.0, "controller", "direct power control needs n_pu > 0")?;
            check(positive(ctl.k_p_per_s), "controller.k_p_per_s", "must be > 0")?;
            check(positive(ctl.k_q_per_s), "controller.k_q_per_s", "must be > 0")?;
            check(non_negative(ctl.smc_gain_w_per_s), "controller.smc_gain_w_per_s", "must be >= 0")?;
            check(positive(ctl.boundary_layer_w), "controller.boundary_layer_w", "must be > 0")?;
            check(positive(ctl.v_max_v), "controller.v_max_v", "must be > 0")?;
            check(positive(ctl.ramp_max_v_per_s), "controller.ramp_max_v_per_s", "must be > 0")?;
            if let Some(f) = ctl.vs_floor_v {
                check(non_negative(f), "controller.vs_floor_v", "must be >= 0")?;
            }
        }

        let f = &self.initial_flow;
        check(non_negative(f.s_va), "initial_flow.s_va", "must be >= 0")?;
        check(f.pf > 0.0 && f.pf <= 1.0, "initial_flow.pf", "must lie in (0, 1]")?;

        let s = &self.sim;
        check(positive(s.dt_s), "sim.dt_s", "must be > 0")?;
        check(
            s.duration_s.is_finite() && s.duration_s >= s.dt_s,
            "sim.duration_s",
            "must be >= sim.dt_s",
        )?;

        let mut last = f64::NEG_INFINITY;
        for (i, e) in self.events.iter().enumerate() {
            let key = |k: &str| format!("events[{i}].{k}");
            check(
                e.t_s.is_finite() && e.t_s >= 0.0 && e.t_s <= s.duration_s,
                &key("t_s"),
                "must lie within [0, sim.duration_s]",
            )?;
            check(e.t_s > last, &key("t_s"), "event times must be strictly increasing")?;
            last = e.t_s;
            check(non_negative(e.target_s_va), &key("target_s_va"), "must be >= 0")?;
            check(e.target_pf > 0.0 && e.target_pf <= 1.0, &key("target_pf"), "must lie in (0, 1]")?;
        }

        for (i, name) in self.record.iter().enumerate() {
            name.parse::<Channel>()
                .map_err(|_| Error::invalid(format!("record[{i}]"), format!("unknown channel `{name}`")))?;
        }
        Ok(())
    }

    pub fn line_params(&self) -> LineParams {
        LineParams {
            r_series: self.line.r_series_ohm,
            l_series: self.line.l_series_h,
            omega: 2.0 * PI * self.line.f0_hz,
            c_shunt_per_end: self.line.c_shunt_per_end_f,
        }
    }

    pub fn v_nominal(&self) -> f64 {
        alpha_beta_peak(self.line.v_nominal_ll_v)
    }

    /// The same document with every implicit value written out.
    pub fn resolved(&self) -> Self {
        let mut out = self.clone();
        let v = self.v_nominal();
        if let Some(ctl) = out.controller.as_mut() {
            ctl.vs_floor_v.get_or_insert(0.01 * v);
        }
        if out.record.is_empty() {
            out.record = Channel::ALL.iter().map(|c| c.name().to_string()).collect();
        }
        out
    }

    pub fn dpc_config(&self) -> Option<DpcConfig> {
        let v = self.v_nominal();
        self.controller.as_ref().map(|c| DpcConfig {
            mode: c.mode,
            k_p: c.k_p_per_s,
            k_q: c.k_q_per_s,
            smc_gain: c.smc_gain_w_per_s,
            boundary_layer: c.boundary_layer_w,
            v_max: c.v_max_v,
            ramp_max: c.ramp_max_v_per_s,
            vs_floor: c.vs_floor_v.unwrap_or(0.01 * v),
        })
    }

    pub fn record_channels(&self) -> Vec<Channel> {
        self.record.iter().filter_map(|n| n.parse().ok()).collect()
    }

    pub fn to_scenario(&self) -> Result<Scenario> {
        self.validate()?;
        let params = self.line_params();
        let compensation = compensation_for(self.compensation.n_pu, &params, self.compensation.num_segments)?;
        let f = &self.initial_flow;
        Ok(Scenario {
            params,
            compensation,
            model: self.model,
            controller: self.dpc_config(),
            v_nominal: self.v_nominal(),
            initial_flow: FlowTarget::new(f.s_va, f.pf, f.pf_sign),
            events: self
                .events
                .iter()
                .map(|e| Event {
                    t: e.t_s,
                    target: FlowTarget::new(e.target_s_va, e.target_pf, e.pf_sign),
                })
                .collect(),
            dt: self.sim.dt_s,
            duration: self.sim.duration_s,
            record: self.record_channels(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key_of(r: Result<RunConfig>) -> String {
        match r {
            Err(Error::InvalidParameter { name, .. }) => name,
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn empty_document_is_all_defaults() {
        let cfg = RunConfig::from_json(b"{}").unwrap();
        assert_eq!(cfg, RunConfig::default());
        let s = cfg.to_scenario().unwrap();
        assert_eq!(s.dt, 20e-6);
        assert!((s.v_nominal - 281_691.3).abs() < 0.1);
        assert!(s.controller.is_none());
    }

    #[test]
    fn errors_name_the_key() {
        assert_eq!(key_of(RunConfig::from_json(br#"{"sim": {"dt_s": 0}}"#)), "sim.dt_s");
        assert_eq!(key_of(RunConfig::from_json(br#"{"sim": {"dt": 1e-5}}"#)), "sim.dt");
        assert_eq!(key_of(RunConfig::from_json(br#"{"line": {"l_series_h": "x"}}"#)), "line.l_series_h");
        assert_eq!(
            key_of(RunConfig::from_json(
                br#"{"events": [{"t_s": 0.1, "target_s_va": 1, "target_pf": 0.8}, {"t_s": 0.1, "target_s_va": 1, "target_pf": 0.8}]}"#
            )),
            "events[1].t_s"
        );
        assert_eq!(key_of(RunConfig::from_json(br#"{"record": ["i_a", "bogus"]}"#)), "record[1]");
        assert_eq!(key_of(RunConfig::from_json(br#"{"model": "tline"}"#)), "model");
        assert_eq!(
            key_of(RunConfig::from_json(br#"{"compensation": {"n_pu": 0}, "controller": {}}"#)),
            "controller"
        );
    }

    #[test]
    fn resolved_fills_floor_and_channels() {
        let cfg = RunConfig::from_json(br#"{"controller": {"mode": "sliding"}}"#).unwrap();
        let r = cfg.resolved();
        let floor = r.controller.as_ref().unwrap().vs_floor_v.unwrap();
        assert!((floor - 0.01 * cfg.v_nominal()).abs() < 1e-9);
        assert_eq!(r.record.len(), Channel::ALL.len());
        assert_eq!(cfg.dpc_config().unwrap().mode, DpcMode::Sliding);
    }
}
