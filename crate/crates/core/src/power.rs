//! Instantaneous and steady-state sending-end power, and the power-flow
//! dynamics the direct power controller acts on.
//!
//! Signs follow the sending-end convention `P = −(3/2)(v_S · i)`: power
//! leaving the sending bus into the line is negative. [`PQ::delivered`]
//! flips both components for the "power delivered by the sending bus" view.

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::line_models::{line_admittance, CompensationSpec, LineParams};
use crate::transforms::AlphaBetaPair;

/// Real power (W) and reactive power (var).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PQ {
    pub p: f64,
    pub q: f64,
}

impl PQ {
    pub fn new(p: f64, q: f64) -> Self {
        Self { p, q }
    }

    /// The same flow with the sign convention flipped.
    pub fn delivered(&self) -> Self {
        Self {
            p: -self.p,
            q: -self.q,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.p.is_finite() && self.q.is_finite()
    }
}

/// Time derivatives of [`PQ`], W/s and var/s.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PqRates {
    pub dp_dt: f64,
    pub dq_dt: f64,
}

/// Bus voltages seen by the line: sending bus, receiving bus and the series
/// converter injection. The line is driven by `vs − vr + vcon`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BusVoltages {
    pub vs: AlphaBetaPair,
    pub vr: AlphaBetaPair,
    pub vcon: AlphaBetaPair,
}

impl BusVoltages {
    pub fn new(vs: AlphaBetaPair, vr: AlphaBetaPair, vcon: AlphaBetaPair) -> Self {
        Self { vs, vr, vcon }
    }

    pub fn net_drive(&self) -> AlphaBetaPair {
        self.vs - self.vr + self.vcon
    }

    pub fn with_vcon(&self, vcon: AlphaBetaPair) -> Self {
        Self { vcon, ..*self }
    }

    /// All three phasors advanced by `angle` radians.
    pub fn rotate(&self, angle: f64) -> Self {
        Self {
            vs: self.vs.rotate(angle),
            vr: self.vr.rotate(angle),
            vcon: self.vcon.rotate(angle),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.vs.is_finite() && self.vr.is_finite() && self.vcon.is_finite()
    }
}

pub fn instantaneous_pq(vs: AlphaBetaPair, i: AlphaBetaPair) -> PQ {
    PQ {
        p: -1.5 * (vs.alpha * i.alpha + vs.beta * i.beta),
        q: -1.5 * (vs.beta * i.alpha - vs.alpha * i.beta),
    }
}

/// Sending-end power in balanced sinusoidal steady state.
///
/// The bus values are αβ snapshots of positive-sequence sets at a common
/// instant. The current follows from the line admittance at `s = jω`
/// applied to the net drive phasor; the result is time invariant.
pub fn steady_state_pq(bus: &BusVoltages, params: &LineParams, comp: &CompensationSpec) -> Result<PQ> {
    let i = steady_state_current(bus, params, comp)?;
    Ok(instantaneous_pq(bus.vs, i))
}

/// αβ snapshot of the steady-state line current for the given bus snapshot.
pub fn steady_state_current(
    bus: &BusVoltages,
    params: &LineParams,
    comp: &CompensationSpec,
) -> Result<AlphaBetaPair> {
    let g = line_admittance(params, comp, Complex64::new(0.0, params.omega))?;
    Ok(g.positive_sequence_response(bus.net_drive().to_complex()))
}

/// `ω − 1/(ωLC)`, the rotation rate coupling P and Q, rad/s.
pub fn effective_omega(params: &LineParams, comp: &CompensationSpec) -> f64 {
    params.omega - 1.0 / (params.omega * params.l_series * comp.c_series_total)
}

/// Rates of change of sending-end P and Q along the reduced line dynamics.
///
/// ```text
/// dP/dt = −(3/2L)[|vs|² − vs·vr + vs·vcon] − ω_eff Q − (R/L) P
/// dQ/dt = −(3/2L)[−(vsβ vrα − vsα vrβ) + (vsβ vconα − vsα vconβ)] + ω_eff P − (R/L) Q
/// ```
///
/// obtained by differentiating the instantaneous power along the reduced
/// αβ current dynamics with the bus rotating synchronously. The cross terms
/// are dot and cross products of the bus vectors and `ω_eff` carries rad/s.
pub fn pq_derivatives(
    state: &PQ,
    bus: &BusVoltages,
    params: &LineParams,
    comp: &CompensationSpec,
) -> Result<PqRates> {
    if !comp.is_compensated() {
        return Err(Error::invalid(
            "n_pu",
            "power dynamics are defined for a compensated line",
        ));
    }
    let drift = pq_drift(state, bus, params, comp);
    let jac = power_jacobian(bus.vs, params);
    Ok(PqRates {
        dp_dt: drift.dp_dt + jac[(0, 0)] * bus.vcon.alpha + jac[(0, 1)] * bus.vcon.beta,
        dq_dt: drift.dq_dt + jac[(1, 0)] * bus.vcon.alpha + jac[(1, 1)] * bus.vcon.beta,
    })
}

/// The part of [`pq_derivatives`] that does not depend on `vcon`.
pub(crate) fn pq_drift(
    state: &PQ,
    bus: &BusVoltages,
    params: &LineParams,
    comp: &CompensationSpec,
) -> PqRates {
    let k = 1.5 / params.l_series;
    let vs = bus.vs;
    let vr = bus.vr;
    let w_eff = effective_omega(params, comp);
    let r_over_l = params.r_series / params.l_series;
    let cross_r = vs.beta * vr.alpha - vs.alpha * vr.beta;
    PqRates {
        dp_dt: -k * (vs.dot(&vs) - vs.dot(&vr)) - w_eff * state.q - r_over_l * state.p,
        dq_dt: -k * (-cross_r) + w_eff * state.p - r_over_l * state.q,
    }
}

/// `∂(dP/dt, dQ/dt) / ∂(vconα, vconβ)`. Its determinant is
/// `−(3/2L)² |vs|²`, singular only for a collapsed sending bus.
pub fn power_jacobian(vs: AlphaBetaPair, params: &LineParams) -> Matrix2<f64> {
    let k = 1.5 / params.l_series;
    Matrix2::new(-k * vs.alpha, -k * vs.beta, -k * vs.beta, k * vs.alpha)
}
