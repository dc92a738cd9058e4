//! Direct power control of the series converter voltage.
//!
//! Both laws exploit that the power rates are affine in the converter
//! voltage: `d(P,Q)/dt = drift + J·vcon`, with `J` invertible whenever the
//! sending bus is energised. The deadbeat law requests first-order error
//! decay `d(P,Q)/dt = (k_p e_P, k_q e_Q)`; the sliding law requests
//! `−smc_gain · sat(s / boundary_layer)` on the surfaces `s = (P − P*, Q − Q*)`.
//!
//! All powers here use the sending-end sign convention of [`crate::power`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::line_models::{CompensationSpec, LineParams};
use crate::power::{pq_drift, BusVoltages, PqRates, PQ};
use crate::transforms::AlphaBetaPair;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DpcMode {
    Deadbeat,
    Sliding,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DpcConfig {
    pub mode: DpcMode,
    /// Deadbeat convergence rate for P, 1/s.
    pub k_p: f64,
    /// Deadbeat convergence rate for Q, 1/s.
    pub k_q: f64,
    /// Saturated sliding-mode rate, W/s (var/s for Q).
    pub smc_gain: f64,
    /// Width of the linear region around each sliding surface, W (var).
    pub boundary_layer: f64,
    /// Converter injection magnitude limit, V.
    pub v_max: f64,
    /// Per-channel slew limit, V/s.
    pub ramp_max: f64,
    /// Sending-bus magnitude below which the controller refuses to act, V.
    pub vs_floor: f64,
}

impl Default for DpcConfig {
    fn default() -> Self {
        Self {
            mode: DpcMode::Deadbeat,
            k_p: 50.0,
            k_q: 50.0,
            smc_gain: 5.0e9,
            boundary_layer: 1.0e8,
            v_max: 1.0e5,
            ramp_max: 1.0e9,
            vs_floor: 0.0,
        }
    }
}

impl DpcConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.k_p) {
            return Err(Error::invalid("k_p", "must be > 0"));
        }
        if !positive(self.k_q) {
            return Err(Error::invalid("k_q", "must be > 0"));
        }
        if !(self.smc_gain.is_finite() && self.smc_gain >= 0.0) {
            return Err(Error::invalid("smc_gain", "must be >= 0"));
        }
        if !positive(self.boundary_layer) {
            return Err(Error::invalid("boundary_layer", "must be > 0"));
        }
        if !positive(self.v_max) {
            return Err(Error::invalid("v_max", "must be > 0"));
        }
        if !positive(self.ramp_max) {
            return Err(Error::invalid("ramp_max", "must be > 0"));
        }
        if !(self.vs_floor.is_finite() && self.vs_floor >= 0.0) {
            return Err(Error::invalid("vs_floor", "must be >= 0"));
        }
        Ok(())
    }
}

/// Power set-point in the sending-end sign convention.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PQReference {
    pub p_ref: f64,
    pub q_ref: f64,
}

/// Converter voltage that makes the power rates equal `target`.
pub fn command_for_rates(
    state: &PQ,
    target: PqRates,
    bus: &BusVoltages,
    params: &LineParams,
    comp: &CompensationSpec,
    vs_floor: f64,
) -> Result<AlphaBetaPair> {
    if !comp.is_compensated() {
        return Err(Error::invalid(
            "n_pu",
            "power dynamics are defined for a compensated line",
        ));
    }
    let magnitude = bus.vs.magnitude();
    if !(magnitude > vs_floor) || magnitude == 0.0 {
        return Err(Error::Singular {
            magnitude,
            floor: vs_floor,
        });
    }
    let drift = pq_drift(state, &bus.with_vcon(AlphaBetaPair::ZERO), params, comp);
    let rhs_p = target.dp_dt - drift.dp_dt;
    let rhs_q = target.dq_dt - drift.dq_dt;
    // J = −k [[a, b], [b, −a]] with k = 3/(2L), so J⁻¹ = −[[a, b], [b, −a]] / (k|vs|²)
    let scale = 1.5 / params.l_series * magnitude * magnitude;
    let (a, b) = (bus.vs.alpha, bus.vs.beta);
    Ok(AlphaBetaPair::new(
        -(a * rhs_p + b * rhs_q) / scale,
        -(b * rhs_p - a * rhs_q) / scale,
    ))
}

pub fn deadbeat_command(
    state: &PQ,
    reference: &PQReference,
    bus: &BusVoltages,
    params: &LineParams,
    comp: &CompensationSpec,
    cfg: &DpcConfig,
) -> Result<AlphaBetaPair> {
    let target = PqRates {
        dp_dt: cfg.k_p * (reference.p_ref - state.p),
        dq_dt: cfg.k_q * (reference.q_ref - state.q),
    };
    command_for_rates(state, target, bus, params, comp, cfg.vs_floor)
}

fn sat(x: f64) -> f64 {
    x.clamp(-1.0, 1.0)
}

pub fn sliding_command(
    state: &PQ,
    reference: &PQReference,
    bus: &BusVoltages,
    params: &LineParams,
    comp: &CompensationSpec,
    cfg: &DpcConfig,
) -> Result<AlphaBetaPair> {
    let s_p = state.p - reference.p_ref;
    let s_q = state.q - reference.q_ref;
    let target = PqRates {
        dp_dt: -cfg.smc_gain * sat(s_p / cfg.boundary_layer),
        dq_dt: -cfg.smc_gain * sat(s_q / cfg.boundary_layer),
    };
    command_for_rates(state, target, bus, params, comp, cfg.vs_floor)
}

/// Clamps a converter command to the magnitude limit, then to the per-channel
/// slew limit relative to `prev`.
///
/// The slew clamp can push a point that was inside the magnitude circle back
/// outside it; in that case the output is pulled back along the segment
/// towards `prev`, which keeps both constraints satisfied whenever `prev`
/// itself is within `v_max`.
pub fn apply_limits(cmd: AlphaBetaPair, prev: AlphaBetaPair, dt: f64, cfg: &DpcConfig) -> AlphaBetaPair {
    debug_assert!(dt > 0.0);
    let mag = cmd.magnitude();
    let clamped = if mag > cfg.v_max {
        cmd * (cfg.v_max / mag)
    } else {
        cmd
    };
    let step = cfg.ramp_max * dt;
    let slewed = AlphaBetaPair::new(
        prev.alpha + (clamped.alpha - prev.alpha).clamp(-step, step),
        prev.beta + (clamped.beta - prev.beta).clamp(-step, step),
    );
    if slewed.magnitude() <= cfg.v_max || prev.magnitude() > cfg.v_max {
        return slewed;
    }
    // largest λ in [0, 1] with |prev + λ d| ≤ v_max
    let d = slewed - prev;
    let a = d.dot(&d);
    let b = 2.0 * prev.dot(&d);
    let c = prev.dot(&prev) - cfg.v_max * cfg.v_max;
    let lambda = ((-b + (b * b - 4.0 * a * c).max(0.0).sqrt()) / (2.0 * a)).clamp(0.0, 1.0);
    let out = prev + d * lambda;
    if out.magnitude() > cfg.v_max {
        out * (cfg.v_max / out.magnitude())
    } else {
        out
    }
}

/// Stateful controller: one per simulation, remembers the last command for
/// slew limiting.
#[derive(Debug, Clone)]
pub struct DpcController {
    pub cfg: DpcConfig,
    params: LineParams,
    comp: CompensationSpec,
    prev: AlphaBetaPair,
}

impl DpcController {
    pub fn new(cfg: DpcConfig, params: LineParams, comp: CompensationSpec) -> Result<Self> {
        cfg.validate()?;
        if !comp.is_compensated() {
            return Err(Error::invalid(
                "n_pu",
                "direct power control needs a compensated line",
            ));
        }
        Ok(Self {
            cfg,
            params,
            comp,
            prev: AlphaBetaPair::ZERO,
        })
    }

    pub fn last_command(&self) -> AlphaBetaPair {
        self.prev
    }

    /// Computes, limits and remembers the next converter command.
    pub fn command(
        &mut self,
        state: &PQ,
        reference: &PQReference,
        bus: &BusVoltages,
        dt: f64,
    ) -> Result<AlphaBetaPair> {
        let raw = match self.cfg.mode {
            DpcMode::Deadbeat => deadbeat_command(state, reference, bus, &self.params, &self.comp, &self.cfg)?,
            DpcMode::Sliding => sliding_command(state, reference, bus, &self.params, &self.comp, &self.cfg)?,
        };
        let out = apply_limits(raw, self.prev, dt, &self.cfg);
        self.prev = out;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::line_models::size_series_capacitor;
    use crate::power::pq_derivatives;

    fn setup() -> (LineParams, CompensationSpec, DpcConfig) {
        let p = LineParams::default();
        let c = size_series_capacitor(0.25, &p, 1).unwrap();
        (p, c, DpcConfig::default())
    }

    #[test]
    fn equilibrium_needs_no_injection() {
        let (p, c, cfg) = setup();
        let v = AlphaBetaPair::new(0.0, -2.8e5);
        let bus = BusVoltages::new(v, v, AlphaBetaPair::ZERO);
        let u = deadbeat_command(&PQ::default(), &PQReference::default(), &bus, &p, &c, &cfg).unwrap();
        assert!(u.magnitude() < 1e-9, "{u:?}");
    }

    #[test]
    fn deadbeat_back_substitution() {
        let (p, c, cfg) = setup();
        let state = PQ::new(-2.9e8, -2.1e8);
        let r = PQReference {
            p_ref: -3.84e8,
            q_ref: -2.88e8,
        };
        let bus = BusVoltages::new(
            AlphaBetaPair::new(1.1e5, -2.6e5),
            AlphaBetaPair::new(0.4e5, -2.5e5),
            AlphaBetaPair::ZERO,
        );
        let u = deadbeat_command(&state, &r, &bus, &p, &c, &cfg).unwrap();
        let got = pq_derivatives(&state, &bus.with_vcon(u), &p, &c).unwrap();
        let want_p = cfg.k_p * (r.p_ref - state.p);
        let want_q = cfg.k_q * (r.q_ref - state.q);
        assert!((got.dp_dt - want_p).abs() < 1e-9 * want_p.abs());
        assert!((got.dq_dt - want_q).abs() < 1e-9 * want_q.abs());
    }

    #[test]
    fn collapsed_bus_is_singular() {
        let (p, c, mut cfg) = setup();
        cfg.vs_floor = 2.8e3;
        let bus = BusVoltages::new(AlphaBetaPair::new(1.0e3, 0.0), AlphaBetaPair::ZERO, AlphaBetaPair::ZERO);
        let e = deadbeat_command(&PQ::default(), &PQReference::default(), &bus, &p, &c, &cfg);
        assert!(matches!(e, Err(Error::Singular { .. })));
        cfg.vs_floor = 0.0;
        let bus = BusVoltages::default();
        assert!(deadbeat_command(&PQ::default(), &PQReference::default(), &bus, &p, &c, &cfg).is_err());
    }

    #[test]
    fn sliding_on_surface_cancels_drift_only() {
        let (p, c, cfg) = setup();
        let state = PQ::new(-1e8, 5e7);
        let r = PQReference {
            p_ref: state.p,
            q_ref: state.q,
        };
        let bus = BusVoltages::new(
            AlphaBetaPair::new(0.0, -2.8e5),
            AlphaBetaPair::new(0.3e5, -2.7e5),
            AlphaBetaPair::ZERO,
        );
        let u = sliding_command(&state, &r, &bus, &p, &c, &cfg).unwrap();
        let got = pq_derivatives(&state, &bus.with_vcon(u), &p, &c).unwrap();
        let scale = pq_drift(&state, &bus, &p, &c);
        assert!(got.dp_dt.abs() < 1e-9 * scale.dp_dt.abs().max(scale.dq_dt.abs()));
        assert!(got.dq_dt.abs() < 1e-9 * scale.dp_dt.abs().max(scale.dq_dt.abs()));
    }

    #[test]
    fn sliding_saturates_far_from_surface() {
        let (p, c, cfg) = setup();
        let state = PQ::new(0.0, 0.0);
        let r = PQReference {
            p_ref: 100.0 * cfg.boundary_layer,
            q_ref: -100.0 * cfg.boundary_layer,
        };
        let bus = BusVoltages::new(
            AlphaBetaPair::new(0.0, -2.8e5),
            AlphaBetaPair::new(0.3e5, -2.7e5),
            AlphaBetaPair::ZERO,
        );
        let u = sliding_command(&state, &r, &bus, &p, &c, &cfg).unwrap();
        let got = pq_derivatives(&state, &bus.with_vcon(u), &p, &c).unwrap();
        assert!((got.dp_dt - cfg.smc_gain).abs() < 1e-9 * cfg.smc_gain);
        assert!((got.dq_dt + cfg.smc_gain).abs() < 1e-9 * cfg.smc_gain);
    }

    #[test]
    fn limit_examples() {
        let cfg = DpcConfig {
            v_max: 10.0,
            ramp_max: 1000.0,
            ..DpcConfig::default()
        };
        let dt = 1e-3;
        let prev = AlphaBetaPair::new(3.0, 4.0);
        let cmd = AlphaBetaPair::new(3.5, 4.2);
        assert_eq!(apply_limits(cmd, prev, dt, &cfg), cmd);

        let big = AlphaBetaPair::new(12.0, 16.0);
        let loose = DpcConfig { ramp_max: 1e9, ..cfg };
        let out = apply_limits(big, AlphaBetaPair::ZERO, dt, &loose);
        assert!((out.magnitude() - 10.0).abs() < 1e-12);
        assert!((out.alpha / out.beta - 0.75).abs() < 1e-12);

        let slow = DpcConfig { ramp_max: 1.0 / dt, ..cfg };
        let out = apply_limits(AlphaBetaPair::new(10.0, 0.0), AlphaBetaPair::ZERO, dt, &slow);
        assert!((out.alpha - 1.0).abs() < 1e-12 && out.beta == 0.0);
    }

    #[test]
    fn slew_corner_is_pulled_back_inside() {
        let cfg = DpcConfig {
            v_max: 1.0,
            ramp_max: 100.0,
            ..DpcConfig::default()
        };
        let prev = AlphaBetaPair::new(0.8, 0.6);
        let cmd = AlphaBetaPair::new(0.9, -0.43);
        let out = apply_limits(cmd, prev, 1e-3, &cfg);
        assert!(out.magnitude() <= 1.0 + 1e-15);
        assert!((out.alpha - prev.alpha).abs() <= 0.1 + 1e-15);
        assert!((out.beta - prev.beta).abs() <= 0.1 + 1e-15);
    }

    #[test]
    fn config_validation() {
        assert!(DpcConfig::default().validate().is_ok());
        assert!(DpcConfig { k_p: 0.0, ..DpcConfig::default() }.validate().is_err());
        assert!(DpcConfig { boundary_layer: 0.0, ..DpcConfig::default() }.validate().is_err());
        assert!(DpcConfig { smc_gain: -1.0, ..DpcConfig::default() }.validate().is_err());
    }
}
